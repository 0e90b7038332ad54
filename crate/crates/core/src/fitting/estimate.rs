use alloc::vec;
use alloc::vec::Vec;

use super::optimize::{self, Bounds, Options, Residuals};
use super::{
    eval_base, eval_cubic, eval_warp, fit_stats_lenient, BaseParams, FitError, FitStats, InteractionParams,
    ResidualParams, WarpParams,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseFit {
    pub params: BaseParams,
    pub stats: FitStats,
}

struct BaseProblem<'a> {
    points: &'a [(f64, f64)],
}

impl Residuals for BaseProblem<'_> {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        let base = BaseParams { saturation: x[0], rate: x[1] };
        for (o, &(p, y)) in out.iter_mut().zip(self.points) {
            *o = eval_base(p, &base) - y;
        }
    }
}

fn distinct_p(points: &[(f64, f64)]) -> usize {
    let mut ps: Vec<f64> = points.iter().map(|pt| pt.0).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    ps.len()
}

/// Least-squares fit of `A (1 - exp(-b p))` to `(p, rotations per node)`.
pub fn fit_base(points: &[(f64, f64)]) -> Result<BaseFit, FitError> {
    let distinct = distinct_p(points);
    if distinct < 3 {
        return Err(FitError::TooFewPoints { needed: 3, got: distinct });
    }
    let problem = BaseProblem { points };
    let mut starts = vec![vec![BaseParams::REFERENCE.saturation, BaseParams::REFERENCE.rate]];
    for a in [0.3, 0.7, 1.2] {
        for b in [0.5, 5.0, 50.0] {
            starts.push(vec![a, b]);
        }
    }
    let bounds = Bounds {
        lower: vec![0.0, 0.0],
        upper: vec![f64::INFINITY, 1e6],
    };
    let best = optimize::multi_start(&problem, &starts, &bounds, Options::default());
    if !best.converged {
        return Err(FitError::NotConverged { best: best.x, sse: best.sse });
    }
    let params = BaseParams { saturation: best.x[0], rate: best.x[1] };
    let observed: Vec<f64> = points.iter().map(|pt| pt.1).collect();
    let predicted: Vec<f64> = points.iter().map(|pt| eval_base(pt.0, &params)).collect();
    Ok(BaseFit {
        params,
        stats: fit_stats_lenient(&observed, &predicted),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualFit {
    pub warp: WarpParams,
    pub residual: ResidualParams,
    /// Statistics of the combined model `f(p) + R(p)` against `f(p) + y`.
    pub stats: FitStats,
}

struct CubicProblem<'a> {
    /// `(p, f(p), residual)`.
    points: &'a [(f64, f64, f64)],
}

fn unpack(x: &[f64]) -> (WarpParams, ResidualParams) {
    (
        WarpParams { a1: x[0], a2: x[1], a3: x[2], d1: x[3] },
        ResidualParams { k: x[4], a: x[5], b: x[6] },
    )
}

fn pack(warp: &WarpParams, res: &ResidualParams) -> Vec<f64> {
    vec![warp.a1, warp.a2, warp.a3, warp.d1, res.k, res.a, res.b]
}

impl Residuals for CubicProblem<'_> {
    fn len(&self) -> usize {
        self.points.len()
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        let (warp, res) = unpack(x);
        for (o, &(_, f, y)) in out.iter_mut().zip(self.points) {
            *o = match eval_warp(f, &warp) {
                Ok(phi) => eval_cubic(phi, &res) - y,
                Err(_) => f64::NAN,
            };
        }
    }
}

/// Amplitude minimizing the squared error for fixed warp and zeroes.
fn best_amplitude(points: &[(f64, f64, f64)], warp: &WarpParams, res: &ResidualParams) -> Option<f64> {
    let unit = ResidualParams { k: 1.0, ..*res };
    let (mut num, mut den) = (0.0, 0.0);
    for &(_, f, y) in points {
        let g = eval_cubic(eval_warp(f, warp).ok()?, &unit);
        num += g * y;
        den += g * g;
    }
    (den > 0.0).then(|| num / den)
}

/// Joint fit of the warp and cubic parameters to `(p, residual)` points,
/// with the base term held fixed.
///
/// Starts from `warp0`/`res0` as given and from the same point with the
/// least-squares amplitude. `|a2| <= 20` always; `|k| <= k_bound` when given.
/// The returned zeroes are ordered `a <= b`.
pub fn fit_warped_cubic(
    points: &[(f64, f64)],
    base: &BaseParams,
    warp0: &WarpParams,
    res0: &ResidualParams,
    k_bound: Option<f64>,
) -> Result<ResidualFit, FitError> {
    const MIN_POINTS: usize = 10;
    let distinct = distinct_p(points);
    if distinct < MIN_POINTS {
        return Err(FitError::TooFewPoints { needed: MIN_POINTS, got: distinct });
    }
    let lo = points.iter().map(|pt| pt.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|pt| pt.0).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 0.5 {
        return Err(FitError::InsufficientSpan);
    }
    let data: Vec<(f64, f64, f64)> = points.iter().map(|&(p, y)| (p, eval_base(p, base), y)).collect();
    let problem = CubicProblem { points: &data };

    let k_lim = k_bound.unwrap_or(f64::INFINITY);
    let clamp_k = |k: f64| k.clamp(-k_lim, k_lim);
    let mut starts = vec![pack(warp0, &ResidualParams { k: clamp_k(res0.k), ..*res0 })];
    if let Some(k) = best_amplitude(&data, warp0, res0) {
        starts.push(pack(warp0, &ResidualParams { k: clamp_k(k), ..*res0 }));
    }
    let mut bounds = Bounds::unbounded(7);
    bounds.lower[1] = -20.0;
    bounds.upper[1] = 20.0;
    bounds.lower[4] = -k_lim;
    bounds.upper[4] = k_lim;

    let best = optimize::multi_start(&problem, &starts, &bounds, Options::default());
    if !best.converged || !best.sse.is_finite() {
        return Err(FitError::NotConverged { best: best.x, sse: best.sse });
    }
    let (warp, mut residual) = unpack(&best.x);
    if residual.a > residual.b {
        core::mem::swap(&mut residual.a, &mut residual.b);
    }
    let mut observed = Vec::with_capacity(data.len());
    let mut predicted = Vec::with_capacity(data.len());
    for &(_, f, y) in &data {
        observed.push(f + y);
        predicted.push(f + eval_cubic(eval_warp(f, &warp)?, &residual));
    }
    Ok(ResidualFit {
        warp,
        residual,
        stats: fit_stats_lenient(&observed, &predicted),
    })
}

/// Rotation residual fit, started from the published warp and cubic
/// parameters with `|k| <= 100`.
pub fn fit_residual(points: &[(f64, f64)], base: &BaseParams) -> Result<ResidualFit, FitError> {
    fit_warped_cubic(points, base, &WarpParams::REFERENCE, &ResidualParams::REFERENCE, Some(100.0))
}

/// Independent warped-cubic fits of the imbalance-model residual for each
/// tree size. The amplitude `k(N)` is unbounded because it scales with `N`.
pub fn fit_imbalance_residual(
    per_n: &[(usize, Vec<(f64, f64)>)],
    base: &BaseParams,
    warp0: &WarpParams,
    res0: &ResidualParams,
) -> Vec<(usize, Result<ResidualFit, FitError>)> {
    per_n
        .iter()
        .map(|(n, pts)| (*n, fit_warped_cubic(pts, base, warp0, res0, None)))
        .collect()
}

/// One observation for the interaction regression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionRow {
    pub n: f64,
    pub p: f64,
    pub imbalance_events: f64,
    pub rotations: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionFit {
    pub params: InteractionParams,
    /// Ordinary least-squares standard errors of `m` and `lambda`.
    pub std_errors: InteractionParams,
    pub stats: FitStats,
}

/// No-intercept least squares of `imbalance_events * p` on
/// `(rotations, N * p)`.
pub fn fit_interaction(rows: &[InteractionRow]) -> Result<InteractionFit, FitError> {
    if rows.len() < 2 {
        return Err(FitError::TooFewPoints { needed: 2, got: rows.len() });
    }
    let (mut s11, mut s12, mut s22, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in rows {
        let (x1, x2, y) = (r.rotations, r.n * r.p, r.imbalance_events * r.p);
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        s1y += x1 * y;
        s2y += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det > 1e-12 * s11 * s22) || !(s11 > 0.0) || !(s22 > 0.0) {
        return Err(FitError::RankDeficient);
    }
    let m = (s22 * s1y - s12 * s2y) / det;
    let lambda = (s11 * s2y - s12 * s1y) / det;

    let observed: Vec<f64> = rows.iter().map(|r| r.imbalance_events * r.p).collect();
    let predicted: Vec<f64> = rows.iter().map(|r| m * r.rotations + lambda * r.n * r.p).collect();
    let sse: f64 = observed.iter().zip(&predicted).map(|(o, p)| (o - p) * (o - p)).sum();
    let dof = rows.len().saturating_sub(2).max(1) as f64;
    let sigma2 = sse / dof;
    Ok(InteractionFit {
        params: InteractionParams { m, lambda },
        std_errors: InteractionParams {
            m: libm::sqrt(sigma2 * s22 / det),
            lambda: libm::sqrt(sigma2 * s11 / det),
        },
        stats: fit_stats_lenient(&observed, &predicted),
    })
}
