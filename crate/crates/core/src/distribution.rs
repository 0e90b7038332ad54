//! Aggregation across runs and distributional statistics (ECDF, tails,
//! exponential tail fits, height exceedance).

use alloc::vec::Vec;

use crate::harness::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DistributionError {
    #[error("sample is empty")]
    Empty,
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("quantile band must satisfy 0 <= lo < hi <= 1")]
    InvalidBand,
    #[error("only {0} usable thresholds in the quantile band")]
    DegenerateBand(usize),
}

/// Sample mean and unbiased variance (0 for a single value).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanVar {
    pub mean: f64,
    pub var: f64,
}

impl MeanVar {
    pub fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let (count, sum) = values.clone().fold((0usize, 0.0), |(c, s), v| (c + 1, s + v));
        if count == 0 {
            return MeanVar { mean: f64::NAN, var: f64::NAN };
        }
        let mean = sum / count as f64;
        let var = if count > 1 {
            values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        MeanVar { mean, var }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatePoint {
    pub n: usize,
    pub p: f64,
    pub runs: usize,
    pub rot_per_node: MeanVar,
    pub imbalance: MeanVar,
    pub avg_depth: MeanVar,
    pub height: MeanVar,
    pub sigma: MeanVar,
    pub violating: MeanVar,
}

/// Issues noticed while aggregating; aggregation still proceeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggregateWarning {
    RunCountMismatch { n: usize, p: f64, expected: usize, got: usize },
}

/// Groups records by `(n, p)` in canonical order and summarizes each group.
pub fn aggregate(
    records: &[RunRecord],
    expected_runs: Option<usize>,
) -> (Vec<AggregatePoint>, Vec<AggregateWarning>) {
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.n.cmp(&b.n).then(a.p.total_cmp(&b.p)));
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    for group in sorted.chunk_by(|a, b| a.n == b.n && a.p.to_bits() == b.p.to_bits()) {
        let (n, p) = (group[0].n, group[0].p);
        if let Some(expected) = expected_runs {
            if group.len() != expected {
                warnings.push(AggregateWarning::RunCountMismatch { n, p, expected, got: group.len() });
            }
        }
        let g = group.iter();
        points.push(AggregatePoint {
            n,
            p,
            runs: group.len(),
            rot_per_node: MeanVar::of(g.clone().map(|r| r.rotations_per_node())),
            imbalance: MeanVar::of(g.clone().map(|r| r.imbalance_events as f64)),
            avg_depth: MeanVar::of(g.clone().map(|r| r.avg_depth)),
            height: MeanVar::of(g.clone().map(|r| r.height as f64)),
            sigma: MeanVar::of(g.clone().map(|r| r.sigma)),
            violating: MeanVar::of(g.map(|r| r.violating_fraction)),
        });
    }
    (points, warnings)
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Empirical CDF as `(value, F(value))` steps, one per distinct value.
pub fn ecdf(values: &[f64]) -> Result<Vec<(f64, f64)>, DistributionError> {
    if values.is_empty() {
        return Err(DistributionError::Empty);
    }
    let v = sorted_copy(values);
    let total = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        let f = (i + 1) as f64 / total;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = f,
            _ => out.push((x, f)),
        }
    }
    Ok(out)
}

/// Fraction of `sorted` strictly greater than `t`.
fn survival(sorted: &[f64], t: f64) -> f64 {
    let at_most = sorted.partition_point(|&x| x <= t);
    (sorted.len() - at_most) as f64 / sorted.len() as f64
}

/// `P(X > t)` for each threshold.
pub fn tail_probability(values: &[f64], thresholds: &[f64]) -> Result<Vec<(f64, f64)>, DistributionError> {
    if values.is_empty() {
        return Err(DistributionError::Empty);
    }
    let v = sorted_copy(values);
    Ok(thresholds.iter().map(|&t| (t, survival(&v, t))).collect())
}

/// Smallest sample value `x` with `F(x) >= q`.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = libm::ceil(q * n as f64) as usize;
    sorted[rank.clamp(1, n) - 1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares line through `(t, ln P(X > t))` where `t` runs over the
/// distinct sample values between the `lo` and `hi` empirical quantiles.
/// Thresholds with zero survival are dropped.
pub fn tail_exponential_fit(values: &[f64], band: (f64, f64)) -> Result<TailFit, DistributionError> {
    const MIN_VALUES: usize = 50;
    if values.len() < MIN_VALUES {
        return Err(DistributionError::TooFewValues { needed: MIN_VALUES, got: values.len() });
    }
    let (lo, hi) = band;
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
        return Err(DistributionError::InvalidBand);
    }
    let v = sorted_copy(values);
    let (t_lo, t_hi) = (empirical_quantile(&v, lo), empirical_quantile(&v, hi));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut prev = f64::NAN;
    for &t in v.iter().filter(|&&t| t >= t_lo && t <= t_hi) {
        if t == prev {
            continue;
        }
        prev = t;
        let s = survival(&v, t);
        if s > 0.0 {
            xs.push(t);
            ys.push(libm::log(s));
        }
    }
    if xs.len() < 3 {
        return Err(DistributionError::DegenerateBand(xs.len()));
    }
    let line = crate::linear::simple_regression(&xs, &ys).ok_or(DistributionError::DegenerateBand(xs.len()))?;
    Ok(TailFit {
        slope: line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        points: xs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exceedance {
    pub n: usize,
    pub p: f64,
    pub margin: i64,
    pub probability: f64,
}

/// For each `(n, p)` group: fraction of runs with `height >= mean + margin`.
pub fn height_exceedance(records: &[RunRecord], margins: &[i64]) -> Result<Vec<Exceedance>, DistributionError> {
    if records.is_empty() {
        return Err(DistributionError::Empty);
    }
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.n.cmp(&b.n).then(a.p.total_cmp(&b.p)));
    let mut out = Vec::new();
    for group in sorted.chunk_by(|a, b| a.n == b.n && a.p.to_bits() == b.p.to_bits()) {
        let mean = group.iter().map(|r| r.height as f64).sum::<f64>() / group.len() as f64;
        for &m in margins {
            let bar = mean + m as f64;
            let hits = group.iter().filter(|r| r.height as f64 >= bar).count();
            out.push(Exceedance {
                n: group[0].n,
                p: group[0].p,
                margin: m,
                probability: hits as f64 / group.len() as f64,
            });
        }
    }
    Ok(out)
}
