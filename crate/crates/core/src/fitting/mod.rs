//! Empirical models for rotation and imbalance counts, and their estimation.
//!
//! The rotation model is `rot/N = f(p) + R(p)` with
//!
//! * base term `f(p) = A (1 - exp(-b p))`,
//! * warp `phi(f) = (f + d1 f^2) / (1 + a1 f + a2 f^2 + a3 f^3)`,
//! * residual `R(p) = k phi (phi - a) (phi - b)` with `phi = phi(f(p))`.
//!
//! The imbalance model is `imbalances * p = m * rotations + lambda * N * p`,
//! whose residual per tree size has the same warped-cubic form with an
//! amplitude `k(N)`.

mod analysis;
mod estimate;
pub mod optimize;

pub use analysis::{
    cosine_similarity, crossing_points, crossing_points_with_grid, fit_k_scaling, Crossings, KScaling,
};
pub use estimate::{
    fit_base, fit_imbalance_residual, fit_interaction, fit_residual, fit_warped_cubic, BaseFit, InteractionFit,
    InteractionRow, ResidualFit,
};

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("warp denominator vanishes at f = {0}")]
    Singular(f64),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("input sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("points do not span enough of the p range")]
    InsufficientSpan,
    #[error("optimizer did not converge (best sse {sse:e})")]
    NotConverged { best: Vec<f64>, sse: f64 },
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("input has zero norm")]
    ZeroNorm,
    #[error("correlation is undefined for constant input")]
    UndefinedCorrelation,
    #[error("non-positive value {0} cannot be log-transformed")]
    NonPositive(f64),
}

/// `A (1 - exp(-b p))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseParams {
    pub saturation: f64,
    pub rate: f64,
}

impl BaseParams {
    /// Published values A = 0.67, b = 5.72.
    pub const REFERENCE: BaseParams = BaseParams {
        saturation: 0.67,
        rate: 5.72,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub d1: f64,
}

impl WarpParams {
    pub const REFERENCE: WarpParams = WarpParams {
        a1: 2.71747654,
        a2: -10.0,
        a3: 5.69933709,
        d1: -1.45418721,
    };
}

/// Amplitude `k` and the two nonzero roots `a < b` of the cubic in warped
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualParams {
    pub k: f64,
    pub a: f64,
    pub b: f64,
}

impl ResidualParams {
    pub const REFERENCE: ResidualParams = ResidualParams {
        k: 23.0,
        a: 0.21760284,
        b: 0.34390392,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionParams {
    pub m: f64,
    pub lambda: f64,
}

impl InteractionParams {
    pub const REFERENCE: InteractionParams = InteractionParams {
        m: 0.703972,
        lambda: -0.020980,
    };
}

pub fn eval_base(p: f64, base: &BaseParams) -> f64 {
    base.saturation * (1.0 - libm::exp(-base.rate * p))
}

const SINGULAR_EPS: f64 = 1e-12;

pub fn eval_warp(f: f64, warp: &WarpParams) -> Result<f64, FitError> {
    let den = 1.0 + f * (warp.a1 + f * (warp.a2 + f * warp.a3));
    if den.abs() < SINGULAR_EPS {
        return Err(FitError::Singular(f));
    }
    Ok((f + warp.d1 * f * f) / den)
}

/// `k phi (phi - a) (phi - b)` in warped coordinates.
pub fn eval_cubic(phi: f64, res: &ResidualParams) -> f64 {
    res.k * phi * (phi - res.a) * (phi - res.b)
}

pub fn eval_residual(p: f64, base: &BaseParams, warp: &WarpParams, res: &ResidualParams) -> Result<f64, FitError> {
    let phi = eval_warp(eval_base(p, base), warp)?;
    Ok(eval_cubic(phi, res))
}

pub fn eval_rotation_model(
    p: f64,
    base: &BaseParams,
    warp: &WarpParams,
    res: &ResidualParams,
) -> Result<f64, FitError> {
    Ok(eval_base(p, base) + eval_residual(p, base, warp, res)?)
}

/// Goodness-of-fit summary. `rse` is `sqrt(mse)`; `residual_variance` is
/// the population variance of the residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitStats {
    pub mse: f64,
    pub rse: f64,
    pub pearson: f64,
    pub residual_variance: f64,
    pub residual_std: f64,
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return None;
    }
    Some((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Like [`fit_stats`] but reports an undefined correlation as NaN.
pub(crate) fn fit_stats_lenient(observed: &[f64], predicted: &[f64]) -> FitStats {
    let n = observed.len() as f64;
    let resid: Vec<f64> = observed.iter().zip(predicted).map(|(o, p)| o - p).collect();
    let mse = resid.iter().map(|r| r * r).sum::<f64>() / n;
    let mean = resid.iter().sum::<f64>() / n;
    let residual_variance = resid.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    FitStats {
        mse,
        rse: libm::sqrt(mse),
        pearson: pearson(observed, predicted).unwrap_or(f64::NAN),
        residual_variance,
        residual_std: libm::sqrt(residual_variance),
    }
}

pub fn fit_stats(observed: &[f64], predicted: &[f64]) -> Result<FitStats, FitError> {
    if observed.len() != predicted.len() {
        return Err(FitError::LengthMismatch(observed.len(), predicted.len()));
    }
    if observed.len() < 2 {
        return Err(FitError::TooFewPoints { needed: 2, got: observed.len() });
    }
    let stats = fit_stats_lenient(observed, predicted);
    if stats.pearson.is_nan() {
        return Err(FitError::UndefinedCorrelation);
    }
    Ok(stats)
}
