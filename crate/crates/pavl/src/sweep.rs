use std::time::Instant;

use pavl_core::harness::{build_p_grid, run_seed, run_single};
use pavl_core::{RunRecord, SweepConfig};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Runs every `(n, p, run)` cell of `config` on a pool of `threads` workers
/// (0 picks rayon's default). Records come back in canonical
/// `(n, p, run_index)` order whatever the schedule.
///
/// `elapsed_ms` stays 0 unless `timing` is set, so that default output is a
/// pure function of the config.
pub fn run_sweep(config: &SweepConfig, threads: usize, timing: bool) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let grid = build_p_grid(&config.p_grid)?;
    let mut cells = Vec::with_capacity(config.n_values.len() * grid.len() * config.runs_per_point);
    for &n in &config.n_values {
        for (pi, &p) in grid.iter().enumerate() {
            for run in 0..config.runs_per_point {
                cells.push((n, pi, p, run));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let order = config.key_order;
    let master = config.master_seed;
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(n, pi, p, run)| {
                let seed = run_seed(master, n, pi, run);
                let start = timing.then(Instant::now);
                let mut rec = run_single(n, p, seed, order)?;
                rec.run_index = run;
                if let Some(t) = start {
                    rec.elapsed_ms = t.elapsed().as_secs_f64() * 1e3;
                }
                Ok(rec)
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use pavl_core::PGridSpec;

    fn small() -> SweepConfig {
        SweepConfig {
            n_values: vec![50, 80],
            p_grid: PGridSpec {
                dense_count: 2,
                coarse_count: 2,
                ..PGridSpec::default()
            },
            runs_per_point: 3,
            master_seed: 11,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn canonical_order_and_seeds() {
        let c = small();
        let recs = run_sweep(&c, 2, false).unwrap();
        let grid = build_p_grid(&c.p_grid).unwrap();
        assert_eq!(recs.len(), 2 * grid.len() * 3);
        for (i, r) in recs.iter().enumerate() {
            let run = i % 3;
            let pi = (i / 3) % grid.len();
            assert_eq!(r.run_index, run);
            assert_eq!(r.p, grid[pi]);
            assert_eq!(r.seed, run_seed(11, r.n, pi, run));
            assert_eq!(r.elapsed_ms, 0.0);
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let c = small();
        assert_eq!(run_sweep(&c, 1, false).unwrap(), run_sweep(&c, 4, false).unwrap());
    }
}
