//! Cost–gain frontier between rotations per node and average depth.
//!
//! Both axes are normalized by their `p = 1` value at the same tree size, so
//! the AVL endpoint sits at `(1, 1)` and the BST endpoint at `(0, depth_bst)`.
//! Two knees are reported: the *efficiency knee*, where the marginal depth
//! gain per unit rotation cost drops for good below a fraction of its peak,
//! and the *raw knee*, the frontier point farthest from the chord joining
//! its endpoints after min-max rescaling.

use alloc::vec::Vec;

use crate::distribution::AggregatePoint;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoPoint {
    pub p: f64,
    pub rot_norm: f64,
    pub depth_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum ParetoError {
    #[error("no p = 1 reference point for n = {0}")]
    MissingReference(usize),
    #[error("p = 1 reference for n = {0} has zero rotation cost or depth")]
    DegenerateReference(usize),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("bin_count must be >= 2 and window odd and >= 1")]
    InvalidSmoothing,
    #[error("frontier is collinear")]
    Degenerate,
}

fn sort_by_p(points: &mut [ParetoPoint]) {
    points.sort_by(|a, b| a.p.total_cmp(&b.p));
}

/// Normalizes one tree size's aggregates against its `p = 1` point.
pub fn normalize_frontier(aggregates: &[AggregatePoint]) -> Result<Vec<ParetoPoint>, ParetoError> {
    let n = aggregates.first().map_or(0, |a| a.n);
    let reference = aggregates
        .iter()
        .find(|a| a.p == 1.0)
        .ok_or(ParetoError::MissingReference(n))?;
    let (rot1, depth1) = (reference.rot_per_node.mean, reference.avg_depth.mean);
    if !(rot1 > 0.0) || !(depth1 > 0.0) {
        return Err(ParetoError::DegenerateReference(n));
    }
    let mut out: Vec<ParetoPoint> = aggregates
        .iter()
        .map(|a| ParetoPoint {
            p: a.p,
            rot_norm: a.rot_per_node.mean / rot1,
            depth_norm: a.avg_depth.mean / depth1,
        })
        .collect();
    sort_by_p(&mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed {
    pub points: Vec<ParetoPoint>,
    /// Empty log-p bins folded away.
    pub merged_bins: usize,
}

/// Averages points into `bin_count` equal-width bins of `log10 p` (a `p = 0`
/// point keeps a bin of its own), then applies a centered moving average of
/// `window` bins to both axes, truncated at the ends of the sequence.
pub fn bin_smooth(points: &[ParetoPoint], bin_count: usize, window: usize) -> Result<Smoothed, ParetoError> {
    if bin_count < 2 || window == 0 || window % 2 == 0 {
        return Err(ParetoError::InvalidSmoothing);
    }
    let mut sorted = points.to_vec();
    sort_by_p(&mut sorted);
    let (zeros, positive): (Vec<ParetoPoint>, Vec<ParetoPoint>) = sorted.into_iter().partition(|pt| pt.p <= 0.0);

    let mut bins: Vec<ParetoPoint> = Vec::new();
    if !zeros.is_empty() {
        bins.push(mean_point(&zeros, 0.0));
    }
    let mut merged_bins = 0;
    if !positive.is_empty() {
        let lo = libm::log10(positive[0].p);
        let hi = libm::log10(positive[positive.len() - 1].p);
        let width = (hi - lo) / bin_count as f64;
        let bin_of = |p: f64| -> usize {
            if width > 0.0 {
                (((libm::log10(p) - lo) / width) as usize).min(bin_count - 1)
            } else {
                0
            }
        };
        let mut start = 0;
        let mut used = 0;
        while start < positive.len() {
            let b = bin_of(positive[start].p);
            let end = start + positive[start..].iter().take_while(|pt| bin_of(pt.p) == b).count();
            let group = &positive[start..end];
            let log_mean = group.iter().map(|pt| libm::log(pt.p)).sum::<f64>() / group.len() as f64;
            bins.push(mean_point(group, libm::exp(log_mean)));
            used += 1;
            start = end;
        }
        merged_bins = bin_count - used;
    }

    let half = window / 2;
    let smoothed = (0..bins.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(bins.len());
            let w = &bins[lo..hi];
            ParetoPoint {
                p: bins[i].p,
                rot_norm: w.iter().map(|pt| pt.rot_norm).sum::<f64>() / w.len() as f64,
                depth_norm: w.iter().map(|pt| pt.depth_norm).sum::<f64>() / w.len() as f64,
            }
        })
        .collect();
    Ok(Smoothed { points: smoothed, merged_bins })
}

fn mean_point(group: &[ParetoPoint], p: f64) -> ParetoPoint {
    let len = group.len() as f64;
    ParetoPoint {
        p,
        rot_norm: group.iter().map(|pt| pt.rot_norm).sum::<f64>() / len,
        depth_norm: group.iter().map(|pt| pt.depth_norm).sum::<f64>() / len,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyPoint {
    pub p: f64,
    pub efficiency: f64,
}

/// `(depth[i-1] - depth[i]) / (rot[i] - rot[i-1])` along increasing `p`;
/// segments with no change in rotation cost are skipped.
pub fn efficiency_curve(points: &[ParetoPoint]) -> Result<Vec<EfficiencyPoint>, ParetoError> {
    efficiency_curve_resolved(points, 0.0)
}

/// Like [`efficiency_curve`], but a step only closes once the rotation cost
/// has grown by at least `min_rot_step` since the previous step; shorter
/// steps are folded into the next one. Each entry is reported at the `p` of
/// the step's right end.
///
/// At very small `p` consecutive points differ by a vanishing rotation cost,
/// and the ratio is dominated by run-to-run noise in depth.
pub fn efficiency_curve_resolved(
    points: &[ParetoPoint],
    min_rot_step: f64,
) -> Result<Vec<EfficiencyPoint>, ParetoError> {
    if points.len() < 2 {
        return Err(ParetoError::TooFewPoints { needed: 2, got: points.len() });
    }
    let mut sorted = points.to_vec();
    sort_by_p(&mut sorted);
    let mut out = Vec::new();
    let mut start = sorted[0];
    for &pt in &sorted[1..] {
        let d_rot = pt.rot_norm - start.rot_norm;
        if d_rot != 0.0 && d_rot.abs() >= min_rot_step {
            out.push(EfficiencyPoint {
                p: pt.p,
                efficiency: (start.depth_norm - pt.depth_norm) / d_rot,
            });
            start = pt;
        }
    }
    Ok(out)
}

pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.05;

/// Default rotation-cost resolution for [`efficiency_curve_resolved`], as a
/// fraction of the `p = 1` cost.
pub const DEFAULT_MIN_ROT_STEP: f64 = 0.002;

/// First `p` from which the efficiency stays below
/// `threshold_fraction * max efficiency` for every larger `p`.
pub fn detect_efficiency_knee(curve: &[EfficiencyPoint], threshold_fraction: f64) -> Option<EfficiencyPoint> {
    let mut sorted = curve.to_vec();
    sorted.sort_by(|a, b| a.p.total_cmp(&b.p));
    let peak = sorted.iter().map(|e| e.efficiency).fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return None;
    }
    let bar = threshold_fraction * peak;
    let last_above = sorted.iter().rposition(|e| e.efficiency >= bar);
    let knee = match last_above {
        Some(i) => i + 1,
        None => 0,
    };
    sorted.get(knee).copied()
}

/// Frontier point of maximum perpendicular distance from the chord between
/// the lowest-`p` and highest-`p` points, on min-max rescaled axes.
pub fn detect_pareto_knee(points: &[ParetoPoint]) -> Result<ParetoPoint, ParetoError> {
    if points.len() < 3 {
        return Err(ParetoError::TooFewPoints { needed: 3, got: points.len() });
    }
    let mut sorted = points.to_vec();
    sort_by_p(&mut sorted);
    let scale = |get: fn(&ParetoPoint) -> f64| {
        let lo = sorted.iter().map(get).fold(f64::INFINITY, f64::min);
        let hi = sorted.iter().map(get).fold(f64::NEG_INFINITY, f64::max);
        (lo, if hi > lo { hi - lo } else { 1.0 })
    };
    let (x0, xs) = scale(|pt| pt.rot_norm);
    let (y0, ys) = scale(|pt| pt.depth_norm);
    let xy: Vec<(f64, f64)> = sorted
        .iter()
        .map(|pt| ((pt.rot_norm - x0) / xs, (pt.depth_norm - y0) / ys))
        .collect();
    let (a, b) = (xy[0], xy[xy.len() - 1]);
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let chord = libm::sqrt(dx * dx + dy * dy);
    if chord == 0.0 {
        return Err(ParetoError::Degenerate);
    }
    let mut best = (0usize, 0.0f64);
    for (i, &(x, y)) in xy.iter().enumerate() {
        let d = (dx * (y - a.1) - dy * (x - a.0)).abs() / chord;
        if d > best.1 {
            best = (i, d);
        }
    }
    if best.1 <= 1e-12 {
        return Err(ParetoError::Degenerate);
    }
    Ok(sorted[best.0])
}

/// Both knees for one tree size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KneeReport {
    pub n: usize,
    pub efficiency: Option<ParetoPoint>,
    pub pareto: Option<ParetoPoint>,
}

/// Knees of an already smoothed frontier. The efficiency knee is reported
/// at the frontier point with the knee's `p`.
pub fn knee_report(n: usize, smoothed: &[ParetoPoint], threshold_fraction: f64, min_rot_step: f64) -> KneeReport {
    let efficiency = efficiency_curve_resolved(smoothed, min_rot_step)
        .ok()
        .and_then(|curve| detect_efficiency_knee(&curve, threshold_fraction))
        .and_then(|knee| smoothed.iter().find(|pt| pt.p == knee.p).copied());
    KneeReport {
        n,
        efficiency,
        pareto: detect_pareto_knee(smoothed).ok(),
    }
}
