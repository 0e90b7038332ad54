//! Experiment configuration and single-run execution.
//!
//! Everything here is deterministic: a run is a pure function of
//! `(n, p, seed, key order)`, and sweep seeds are derived from indices so that
//! results do not depend on the order in which runs are executed.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::metrics::{self, MetricsError};
use crate::tree::{PavlTree, TreeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyOrder {
    Random,
    Sorted,
    Reversed,
}

impl fmt::Display for KeyOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KeyOrder::Random => "random",
            KeyOrder::Sorted => "sorted",
            KeyOrder::Reversed => "reversed",
        })
    }
}

impl FromStr for KeyOrder {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "random" => Ok(KeyOrder::Random),
            "sorted" => Ok(KeyOrder::Sorted),
            "reversed" => Ok(KeyOrder::Reversed),
            other => Err(ConfigError::UnknownKeyOrder(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("dense p range must satisfy 0 < dense_lo < dense_hi < 1 (got {lo}, {hi})")]
    InvalidDenseRange { lo: f64, hi: f64 },
    #[error("explicit p value {0} is outside [0, 1]")]
    InvalidExtraP(f64),
    #[error("p grid is empty")]
    EmptyGrid,
    #[error("n_values must be a nonempty ascending list of positive sizes")]
    InvalidSizes,
    #[error("runs_per_point must be at least 1")]
    NoRuns,
    #[error("tree size must be at least 1")]
    EmptyTree,
    #[error("unknown key order `{0}` (expected random, sorted or reversed)")]
    UnknownKeyOrder(String),
}

/// Log-spaced p grid: an optional exact 0, `dense_count` points on
/// `[dense_lo, dense_hi]`, `coarse_count` points strictly inside
/// `(dense_hi, 1)`, an optional exact 1, plus any explicit `extra` values.
#[derive(Debug, Clone, PartialEq)]
pub struct PGridSpec {
    pub dense_lo: f64,
    pub dense_hi: f64,
    pub dense_count: usize,
    pub coarse_count: usize,
    pub include_zero: bool,
    pub include_one: bool,
    pub extra: Vec<f64>,
}

impl Default for PGridSpec {
    fn default() -> Self {
        PGridSpec {
            dense_lo: 1e-6,
            dense_hi: 1e-3,
            dense_count: 16,
            coarse_count: 16,
            include_zero: true,
            include_one: true,
            extra: Vec::new(),
        }
    }
}

fn log_space(lo: f64, hi: f64, t: f64) -> f64 {
    libm::exp(libm::log(lo) + t * (libm::log(hi) - libm::log(lo)))
}

pub fn build_p_grid(spec: &PGridSpec) -> Result<Vec<f64>, ConfigError> {
    let (lo, hi) = (spec.dense_lo, spec.dense_hi);
    if !(lo > 0.0 && lo < hi && hi < 1.0) {
        return Err(ConfigError::InvalidDenseRange { lo, hi });
    }
    let mut grid = Vec::with_capacity(spec.dense_count + spec.coarse_count + spec.extra.len() + 2);
    if spec.include_zero {
        grid.push(0.0);
    }
    match spec.dense_count {
        0 => {}
        1 => grid.push(lo),
        c => grid.extend((0..c).map(|i| log_space(lo, hi, i as f64 / (c - 1) as f64))),
    }
    let c = spec.coarse_count;
    grid.extend((1..=c).map(|i| log_space(hi, 1.0, i as f64 / (c + 1) as f64)));
    if spec.include_one {
        grid.push(1.0);
    }
    for &p in &spec.extra {
        if !(0.0..=1.0).contains(&p) {
            return Err(ConfigError::InvalidExtraP(p));
        }
        grid.push(p);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.is_empty() {
        return Err(ConfigError::EmptyGrid);
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub p_grid: PGridSpec,
    pub runs_per_point: usize,
    pub master_seed: u64,
    pub key_order: KeyOrder,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_values: vec![1_000, 2_000, 4_000, 8_000, 16_000, 32_000, 65_536],
            p_grid: PGridSpec::default(),
            runs_per_point: 50,
            master_seed: 0x5eed_0f_a11,
            key_order: KeyOrder::Random,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_values.is_empty()
            || self.n_values[0] == 0
            || self.n_values.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(ConfigError::InvalidSizes);
        }
        if self.runs_per_point == 0 {
            return Err(ConfigError::NoRuns);
        }
        build_p_grid(&self.p_grid).map(|_| ())
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `run_index` at grid position `p_index` for size `n`.
pub fn run_seed(master_seed: u64, n: usize, p_index: usize, run_index: usize) -> u64 {
    let mut h = mix64(master_seed);
    h = mix64(h ^ n as u64);
    h = mix64(h ^ p_index as u64);
    mix64(h ^ run_index as u64)
}

const KEY_STREAM: u64 = 0x6b65_7973;
const COIN_STREAM: u64 = 0x636f_696e;

/// A permutation of `1..=n` in the requested order.
pub fn generate_keys(n: usize, order: KeyOrder, seed: u64) -> Result<Vec<i64>, ConfigError> {
    if n == 0 {
        return Err(ConfigError::EmptyTree);
    }
    let mut keys: Vec<i64> = (1..=n as i64).collect();
    match order {
        KeyOrder::Sorted => {}
        KeyOrder::Reversed => keys.reverse(),
        KeyOrder::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            keys.shuffle(&mut rng);
        }
    }
    Ok(keys)
}

/// Every metric captured from one `(n, p, seed)` build.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub n: usize,
    pub p: f64,
    pub run_index: usize,
    pub seed: u64,
    pub rotations_total: u64,
    pub single_rotations: u64,
    pub double_rotations: u64,
    pub imbalance_events: u64,
    pub height: i32,
    pub avg_depth: f64,
    pub sigma: f64,
    pub violating_fraction: f64,
    /// Wall-clock build time; informational, zero unless timing is enabled.
    pub elapsed_ms: f64,
}

impl RunRecord {
    pub fn rotations_per_node(&self) -> f64 {
        self.rotations_total as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Builds one tree of `n` keys and captures its counters and metrics.
///
/// The key permutation and the coin stream are two independent streams
/// derived from `seed`. `run_index` of the returned record is 0.
pub fn run_single(n: usize, p: f64, seed: u64, order: KeyOrder) -> Result<RunRecord, RunError> {
    let tree = build_tree(n, p, seed, order)?;
    let m = metrics::measure(&tree)?;
    let c = tree.counters();
    Ok(RunRecord {
        n,
        p,
        run_index: 0,
        seed,
        rotations_total: c.rotations_total,
        single_rotations: c.single_rotations,
        double_rotations: c.double_rotations,
        imbalance_events: c.imbalance_events,
        height: m.height,
        avg_depth: m.avg_depth,
        sigma: m.sigma,
        violating_fraction: m.violating_fraction,
        elapsed_ms: 0.0,
    })
}

/// The tree `run_single` measures, for callers that need the structure too.
pub fn build_tree(n: usize, p: f64, seed: u64, order: KeyOrder) -> Result<PavlTree, RunError> {
    let keys = generate_keys(n, order, mix64(seed ^ KEY_STREAM))?;
    let mut tree = PavlTree::with_capacity(p, mix64(seed ^ COIN_STREAM), n)?;
    for k in keys {
        tree.insert(k)?;
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_exact_endpoints() {
        let grid = build_p_grid(&PGridSpec::default()).unwrap();
        assert_eq!(grid[0], 0.0);
        assert_eq!(*grid.last().unwrap(), 1.0);
        assert_eq!(grid.len(), 16 + 16 + 2);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn dense_section_is_geometric() {
        let spec = PGridSpec {
            dense_count: 24,
            coarse_count: 0,
            include_zero: false,
            include_one: false,
            ..PGridSpec::default()
        };
        let grid = build_p_grid(&spec).unwrap();
        assert_eq!(grid.len(), 24);
        assert!((grid[0] - 1e-6).abs() < 1e-18);
        assert!((grid[23] - 1e-3).abs() < 1e-15);
        let ratio = grid[1] / grid[0];
        for w in grid.windows(2) {
            assert!((w[1] / w[0] - ratio).abs() < 1e-9);
        }
    }

    #[test]
    fn coarse_section_stays_strictly_inside() {
        let spec = PGridSpec {
            dense_count: 0,
            coarse_count: 5,
            include_zero: false,
            include_one: false,
            ..PGridSpec::default()
        };
        let grid = build_p_grid(&spec).unwrap();
        assert_eq!(grid.len(), 5);
        assert!(grid[0] > 1e-3 && grid[4] < 1.0);
    }

    #[test]
    fn extras_are_merged_without_duplicates() {
        let spec = PGridSpec {
            extra: alloc::vec![0.1, 0.01, 1.0, 0.0],
            ..PGridSpec::default()
        };
        let grid = build_p_grid(&spec).unwrap();
        assert_eq!(grid.len(), 34 + 2);
        assert!(grid.contains(&0.1) && grid.contains(&0.01));
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn invalid_grid_bounds() {
        let bad = PGridSpec {
            dense_lo: 1e-3,
            dense_hi: 1e-3,
            ..PGridSpec::default()
        };
        assert!(matches!(build_p_grid(&bad), Err(ConfigError::InvalidDenseRange { .. })));
        let bad = PGridSpec {
            dense_lo: 0.0,
            ..PGridSpec::default()
        };
        assert!(build_p_grid(&bad).is_err());
        let bad = PGridSpec {
            extra: alloc::vec![1.5],
            ..PGridSpec::default()
        };
        assert_eq!(build_p_grid(&bad), Err(ConfigError::InvalidExtraP(1.5)));
    }

    #[test]
    fn key_orders() {
        assert_eq!(generate_keys(5, KeyOrder::Sorted, 0).unwrap(), [1, 2, 3, 4, 5]);
        assert_eq!(generate_keys(5, KeyOrder::Reversed, 0).unwrap(), [5, 4, 3, 2, 1]);
        let a = generate_keys(1000, KeyOrder::Random, 99).unwrap();
        let b = generate_keys(1000, KeyOrder::Random, 99).unwrap();
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (1..=1000).collect::<Vec<i64>>());
        assert_ne!(a, generate_keys(1000, KeyOrder::Random, 100).unwrap());
        assert_eq!(generate_keys(0, KeyOrder::Sorted, 0), Err(ConfigError::EmptyTree));
    }

    #[test]
    fn key_order_parses() {
        assert_eq!("sorted".parse::<KeyOrder>().unwrap(), KeyOrder::Sorted);
        assert_eq!(KeyOrder::Reversed.to_string(), "reversed");
        assert!("zigzag".parse::<KeyOrder>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::default().validate().is_ok());
        let mut c = SweepConfig::default();
        c.n_values = alloc::vec![100, 50];
        assert_eq!(c.validate(), Err(ConfigError::InvalidSizes));
        let mut c = SweepConfig::default();
        c.runs_per_point = 0;
        assert_eq!(c.validate(), Err(ConfigError::NoRuns));
    }

    #[test]
    fn seeds_depend_on_every_index() {
        let base = run_seed(1, 1000, 2, 3);
        assert_ne!(base, run_seed(2, 1000, 2, 3));
        assert_ne!(base, run_seed(1, 1001, 2, 3));
        assert_ne!(base, run_seed(1, 1000, 3, 3));
        assert_ne!(base, run_seed(1, 1000, 2, 4));
        assert_eq!(base, run_seed(1, 1000, 2, 3));
    }

    #[test]
    fn run_single_is_deterministic() {
        let a = run_single(2000, 0.3, 17, KeyOrder::Random).unwrap();
        let b = run_single(2000, 0.3, 17, KeyOrder::Random).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rotations_total, a.single_rotations + 2 * a.double_rotations);
    }

    #[test]
    fn run_single_p_zero_has_no_rotations() {
        let r = run_single(3000, 0.0, 5, KeyOrder::Random).unwrap();
        assert_eq!(r.rotations_total, 0);
        assert!(r.imbalance_events > 0);
    }

    #[test]
    fn run_single_avl_endpoint() {
        let tree = build_tree(10_000, 1.0, 3, KeyOrder::Random).unwrap();
        assert!(tree.validate().max_abs_balance <= 1);
    }

    #[test]
    fn run_single_rejects_bad_probability() {
        assert!(matches!(
            run_single(10, 2.0, 0, KeyOrder::Random),
            Err(RunError::Tree(TreeError::InvalidProbability(_)))
        ));
    }
}
