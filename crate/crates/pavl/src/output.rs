use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Output directory that refuses to clobber existing files unless forced.
#[derive(Debug, Clone)]
pub struct OutDir {
    root: PathBuf,
    force: bool,
}

impl OutDir {
    pub fn new(root: impl Into<PathBuf>, force: bool) -> Self {
        OutDir { root: root.into(), force }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Creates the directory and checks every target up front, so a refused
    /// run leaves nothing half written.
    pub fn prepare(&self, names: &[&str]) -> Result<()> {
        std::fs::create_dir_all(&self.root).map_err(|e| Error::io(&self.root, e))?;
        if !self.force {
            for name in names {
                let path = self.path(name);
                if path.exists() {
                    return Err(Error::Exists(path));
                }
            }
        }
        Ok(())
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}
