use std::collections::BTreeMap;
use std::path::Path;

use pavl_core::distribution::AggregatePoint;
use pavl_core::pareto::{
    bin_smooth, efficiency_curve_resolved, knee_report, normalize_frontier, EfficiencyPoint, KneeReport, ParetoError,
    ParetoPoint, DEFAULT_MIN_ROT_STEP, DEFAULT_THRESHOLD_FRACTION,
};

use crate::csvio::{self, fmt_p, fmt_real, line, PARETO_HEADER};
use crate::error::{Error, Result};
use crate::output::OutDir;

pub const PARETO: &str = "pareto.csv";
pub const KNEES: &str = "knees.csv";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoOptions {
    pub bins: usize,
    pub window: usize,
    pub threshold: f64,
    /// Smallest rotation-cost increment (normalized) per efficiency step.
    pub min_rot_step: f64,
    pub force: bool,
}

impl Default for ParetoOptions {
    fn default() -> Self {
        ParetoOptions {
            bins: 40,
            window: 3,
            threshold: DEFAULT_THRESHOLD_FRACTION,
            min_rot_step: DEFAULT_MIN_ROT_STEP,
            force: false,
        }
    }
}

/// Smoothed frontier for one tree size.
#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    pub n: usize,
    pub points: Vec<ParetoPoint>,
    pub merged_bins: usize,
    pub efficiency: Vec<EfficiencyPoint>,
    pub knees: KneeReport,
}

fn pareto_error(e: ParetoError) -> Error {
    Error::Data(e.to_string())
}

pub fn frontiers(aggregate: &[AggregatePoint], opts: &ParetoOptions) -> Result<Vec<Frontier>> {
    let mut groups: BTreeMap<usize, Vec<AggregatePoint>> = BTreeMap::new();
    for a in aggregate {
        groups.entry(a.n).or_default().push(a.clone());
    }
    groups
        .into_iter()
        .map(|(n, pts)| {
            let raw = normalize_frontier(&pts).map_err(pareto_error)?;
            let smoothed = bin_smooth(&raw, opts.bins, opts.window).map_err(pareto_error)?;
            let knees = knee_report(n, &smoothed.points, opts.threshold, opts.min_rot_step);
            let efficiency = efficiency_curve_resolved(&smoothed.points, opts.min_rot_step).unwrap_or_default();
            Ok(Frontier {
                n,
                efficiency,
                points: smoothed.points,
                merged_bins: smoothed.merged_bins,
                knees,
            })
        })
        .collect()
}

pub fn pareto_csv(frontiers: &[Frontier]) -> String {
    let mut out = String::from(PARETO_HEADER);
    out.push('\n');
    for f in frontiers {
        for pt in &f.points {
            let e = f.efficiency.iter().find(|e| e.p == pt.p).map(|e| fmt_real(e.efficiency));
            out.push_str(&line(&[
                f.n.to_string(),
                fmt_p(pt.p),
                fmt_real(pt.rot_norm),
                fmt_real(pt.depth_norm),
                e.unwrap_or_default(),
            ]));
        }
    }
    out
}

pub fn pareto(aggregate_path: &Path, out: &Path, opts: &ParetoOptions) -> Result<Vec<Frontier>> {
    let aggregate = csvio::read_aggregate(aggregate_path)?;
    if aggregate.is_empty() {
        return Err(Error::Data(format!("{}: no rows", aggregate_path.display())));
    }
    let fronts = frontiers(&aggregate, opts)?;
    let dir = OutDir::new(out, opts.force);
    dir.prepare(&[PARETO, KNEES])?;
    dir.write(PARETO, &pareto_csv(&fronts))?;
    let knees: Vec<KneeReport> = fronts.iter().map(|f| f.knees).collect();
    dir.write(KNEES, &csvio::knees_csv(&knees))?;
    Ok(fronts)
}
