use alloc::vec::Vec;

use super::{eval_base, eval_warp, BaseParams, FitError, ResidualParams, WarpParams};
use crate::linear;

/// Solutions in `p` of `phi(f(p)) = a` and `phi(f(p)) = b`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Crossings {
    /// Smallest root for `a`, `None` when there is no root in `[0, 1]`.
    pub p_star_a: Option<f64>,
    pub p_star_b: Option<f64>,
    /// Every root found, ascending.
    pub roots_a: Vec<f64>,
    pub roots_b: Vec<f64>,
}

const DEFAULT_SCAN: usize = 10_000;
const BISECTION_TOL: f64 = 1e-10;

pub fn crossing_points(base: &BaseParams, warp: &WarpParams, res: &ResidualParams) -> Crossings {
    crossing_points_with_grid(base, warp, res, DEFAULT_SCAN)
}

/// Scans `[0, 1]` with `scan_points` evenly spaced samples for sign changes
/// of `phi(f(p)) - target` and refines each bracket by bisection.
pub fn crossing_points_with_grid(
    base: &BaseParams,
    warp: &WarpParams,
    res: &ResidualParams,
    scan_points: usize,
) -> Crossings {
    let g = |p: f64| eval_warp(eval_base(p, base), warp).ok();
    let samples: Vec<(f64, Option<f64>)> = (0..scan_points.max(2))
        .map(|i| {
            let p = i as f64 / (scan_points.max(2) - 1) as f64;
            (p, g(p))
        })
        .collect();
    let roots = |target: f64| -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for w in samples.windows(2) {
            let ((p0, Some(v0)), (p1, Some(v1))) = (w[0], w[1]) else {
                continue;
            };
            let (d0, d1) = (v0 - target, v1 - target);
            if d0 == 0.0 {
                out.push(p0);
                continue;
            }
            if d0.signum() == d1.signum() || d1 == 0.0 {
                continue;
            }
            out.push(bisect(|p| g(p).map(|v| v - target), p0, p1, d0));
        }
        if let Some(&(p, Some(v))) = samples.last() {
            if v == target {
                out.push(p);
            }
        }
        out
    };
    let roots_a = roots(res.a);
    let roots_b = roots(res.b);
    Crossings {
        p_star_a: roots_a.first().copied(),
        p_star_b: roots_b.first().copied(),
        roots_a,
        roots_b,
    }
}

fn bisect(h: impl Fn(f64) -> Option<f64>, mut lo: f64, mut hi: f64, mut h_lo: f64) -> f64 {
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        match h(mid) {
            Some(v) if v == 0.0 => return mid,
            Some(v) if v.signum() == h_lo.signum() => {
                lo = mid;
                h_lo = v;
            }
            _ => hi = mid,
        }
    }
    0.5 * (lo + hi)
}

pub fn cosine_similarity(x: &[f64], y: &[f64]) -> Result<f64, FitError> {
    if x.len() != y.len() {
        return Err(FitError::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(FitError::TooFewPoints { needed: 1, got: 0 });
    }
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx = libm::sqrt(x.iter().map(|a| a * a).sum());
    let ny = libm::sqrt(y.iter().map(|b| b * b).sum());
    if nx == 0.0 || ny == 0.0 {
        return Err(FitError::ZeroNorm);
    }
    Ok(dot / (nx * ny))
}

/// Power-law probe `k = coefficient * n^exponent`, fitted in log-log space.
/// Exploratory: no functional form for `k(N)` is implied.
#[derive(Debug, Clone, PartialEq)]
pub struct KScaling {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
    /// Input positions dropped because `k <= 0`.
    pub excluded: Vec<usize>,
}

pub fn fit_k_scaling(pairs: &[(f64, f64)]) -> Result<KScaling, FitError> {
    let mut excluded = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &(n, k)) in pairs.iter().enumerate() {
        if !(k > 0.0) || !(n > 0.0) {
            excluded.push(i);
            continue;
        }
        xs.push(libm::log(n));
        ys.push(libm::log(k));
    }
    if xs.len() < 3 {
        return match excluded.first() {
            Some(&i) if pairs.len() >= 3 => Err(FitError::NonPositive(pairs[i].1)),
            _ => Err(FitError::TooFewPoints { needed: 3, got: xs.len() }),
        };
    }
    let line = linear::simple_regression(&xs, &ys).ok_or(FitError::RankDeficient)?;
    Ok(KScaling {
        exponent: line.slope,
        coefficient: libm::exp(line.intercept),
        r_squared: line.r_squared,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_parameters_crossings() {
        // Roots of phi(f(p)) = a, b for the published global parameter list,
        // frozen from an independent scan + Brent solve in double precision.
        let c = crossing_points(&BaseParams::REFERENCE, &WarpParams::REFERENCE, &ResidualParams::REFERENCE);
        assert!((c.p_star_a.unwrap() - 0.196_118_451_808).abs() < 1e-8, "{c:?}");
        assert!((c.p_star_b.unwrap() - 0.688_663_533_964).abs() < 1e-8, "{c:?}");
        assert_eq!(c.roots_a.len(), 1);
        assert_eq!(c.roots_b.len(), 1);
    }

    #[test]
    fn unreachable_target_is_not_found() {
        let res = ResidualParams { a: 0.9, b: 5.0, ..ResidualParams::REFERENCE };
        let c = crossing_points(&BaseParams::REFERENCE, &WarpParams::REFERENCE, &res);
        assert_eq!(c.p_star_a, None);
        assert_eq!(c.p_star_b, None);
    }

    #[test]
    fn crossings_stable_across_scan_resolution() {
        let (b, w, r) = (BaseParams::REFERENCE, WarpParams::REFERENCE, ResidualParams::REFERENCE);
        let fine = crossing_points_with_grid(&b, &w, &r, 10_000);
        for scan in [1_000, 2_500, 50_000] {
            let c = crossing_points_with_grid(&b, &w, &r, scan);
            assert!((c.p_star_a.unwrap() - fine.p_star_a.unwrap()).abs() < 1e-9);
            assert!((c.p_star_b.unwrap() - fine.p_star_b.unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine_similarity(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 4.0]).unwrap(), 0.0);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 1.0]), Err(FitError::ZeroNorm));
        assert_eq!(cosine_similarity(&[1.0], &[1.0, 2.0]), Err(FitError::LengthMismatch(1, 2)));
    }

    #[test]
    fn k_scaling_power_law() {
        let pairs: Vec<(f64, f64)> = [8e3, 16e3, 32e3, 64e3].iter().map(|&n| (n, 2.0 * libm::sqrt(n))).collect();
        let s = fit_k_scaling(&pairs).unwrap();
        assert!((s.exponent - 0.5).abs() < 1e-9);
        assert!((s.coefficient - 2.0).abs() < 1e-9);
        let flat = fit_k_scaling(&[(1e3, 4.0), (2e3, 4.0), (4e3, 4.0)]).unwrap();
        assert!(flat.exponent.abs() < 1e-12);
    }

    #[test]
    fn k_scaling_errors_and_exclusions() {
        assert!(matches!(
            fit_k_scaling(&[(1e3, 1.0), (2e3, 2.0)]),
            Err(FitError::TooFewPoints { .. })
        ));
        let s = fit_k_scaling(&[(1e3, 1.0), (2e3, -2.0), (4e3, 4.0), (8e3, 8.0)]).unwrap();
        assert_eq!(s.excluded, [1]);
        assert!((s.exponent - 1.0).abs() < 1e-12);
        assert_eq!(fit_k_scaling(&[(1e3, 1.0), (2e3, -2.0), (4e3, 4.0)]), Err(FitError::NonPositive(-2.0)));
    }
}
