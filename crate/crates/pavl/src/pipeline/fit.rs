//! `fit`: model estimation from the simulate outputs.
//!
//! Every section of the fits document is computed independently; a section
//! that cannot be fitted records its error and the rest still run.

use std::collections::BTreeMap;
use std::path::Path;

use pavl_core::distribution::{height_exceedance, tail_exponential_fit, AggregatePoint};
use pavl_core::fitting::{
    cosine_similarity, crossing_points, eval_base, fit_base, fit_imbalance_residual, fit_interaction,
    fit_k_scaling, fit_residual, BaseParams, Crossings, FitError, FitStats, InteractionRow, ResidualFit,
    ResidualParams, WarpParams,
};
use pavl_core::RunRecord;
use serde::Serialize;

use crate::csvio::{self, fmt_p, fmt_real, line};
use crate::error::{Error, Result};
use crate::output::OutDir;

pub const FITS: &str = "fits.json";
pub const ZEROES: &str = "zeroes.csv";
pub const CROSSINGS: &str = "crossings.csv";
pub const IMBALANCE_PARAMS: &str = "imbalance_params.csv";
pub const DELTA_CROSSINGS: &str = "delta_crossings.csv";
pub const EXCEEDANCE: &str = "exceedance.csv";
pub const SIGMA_TAILS: &str = "sigma_tails.csv";

const OUTPUTS: [&str; 7] = [FITS, ZEROES, CROSSINGS, IMBALANCE_PARAMS, DELTA_CROSSINGS, EXCEEDANCE, SIGMA_TAILS];

/// Starting zeroes for the imbalance residual, the published large-N values.
pub const IMBALANCE_START: ResidualParams = ResidualParams {
    k: 1.0,
    a: 0.1383,
    b: 0.3081,
};

/// Which `f(p)` the residual, warp, crossings and cosine similarity are
/// measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualBase {
    /// The published `0.67 (1 - exp(-5.72 p))`.
    #[default]
    Reference,
    /// The base model fitted to the same aggregate.
    Fitted,
}

impl std::str::FromStr for ResidualBase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "reference" => Ok(ResidualBase::Reference),
            "fitted" => Ok(ResidualBase::Fitted),
            other => Err(format!("unknown residual base `{other}` (expected reference or fitted)")),
        }
    }
}

pub const EXCEEDANCE_MARGINS: [i64; 5] = [0, 1, 2, 3, 4];
pub const TAIL_BAND: (f64, f64) = (0.5, 0.99);

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome<T> {
    Ok(T),
    Error(String),
}

impl<T> Outcome<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Outcome::Ok(v) => Some(v),
            Outcome::Error(_) => None,
        }
    }
}

impl<T, E: ToString> From<std::result::Result<T, E>> for Outcome<T> {
    fn from(r: std::result::Result<T, E>) -> Self {
        match r {
            Ok(v) => Outcome::Ok(v),
            Err(e) => Outcome::Error(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PerN<T> {
    pub n: usize,
    #[serde(flatten)]
    pub fit: Outcome<T>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StatsOut {
    pub mse: f64,
    pub rse: f64,
    pub pearson: f64,
    pub residual_variance: f64,
    pub residual_std: f64,
}

impl From<FitStats> for StatsOut {
    fn from(s: FitStats) -> Self {
        StatsOut {
            mse: s.mse,
            rse: s.rse,
            pearson: s.pearson,
            residual_variance: s.residual_variance,
            residual_std: s.residual_std,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BaseOut {
    #[serde(rename = "A")]
    pub saturation: f64,
    pub b: f64,
    pub points: usize,
    pub stats: StatsOut,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WarpOut {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub d1: f64,
}

impl From<WarpParams> for WarpOut {
    fn from(w: WarpParams) -> Self {
        WarpOut {
            a1: w.a1,
            a2: w.a2,
            a3: w.a3,
            d1: w.d1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualOut {
    pub warp: WarpOut,
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub p_star_a: Option<f64>,
    pub p_star_b: Option<f64>,
    pub roots_a: Vec<f64>,
    pub roots_b: Vec<f64>,
    /// Statistics of the combined model on the same points.
    pub stats: StatsOut,
    /// Statistics of the base model alone, for comparison.
    pub base_stats: StatsOut,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionOut {
    pub m: f64,
    pub lambda: f64,
    pub m_std_error: f64,
    pub lambda_std_error: f64,
    pub rows: usize,
    pub stats: StatsOut,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImbalanceOut {
    /// Which starting point produced the kept fit: `reference` or `rotation`.
    pub start: &'static str,
    pub warp: WarpOut,
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub p_star_a: Option<f64>,
    pub p_star_b: Option<f64>,
    pub stats: StatsOut,
}

/// Rotation-model crossing minus imbalance-model crossing.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaRow {
    pub n: usize,
    pub delta_p_star_a: Option<f64>,
    pub delta_p_star_b: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KScalingOut {
    /// Power-law probe of `|k(N)|` only; no functional form is implied.
    pub exploratory: bool,
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
    pub excluded_n: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitsDocument {
    pub tool: String,
    pub base: Outcome<BaseOut>,
    pub residual_base: ResidualBaseOut,
    pub residual_pooled: Outcome<ResidualOut>,
    pub residual_per_n: Vec<PerN<ResidualOut>>,
    /// Cosine similarity of `rot/N - f(p)` with `f(p)`, pooled, for the
    /// residual base.
    pub cosine_similarity: Outcome<f64>,
    pub interaction: Outcome<InteractionOut>,
    pub imbalance_residual_per_n: Vec<PerN<ImbalanceOut>>,
    pub delta_crossings: Vec<DeltaRow>,
    pub k_scaling: Outcome<KScalingOut>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualBaseOut {
    pub source: ResidualBase,
    #[serde(rename = "A")]
    pub saturation: Option<f64>,
    pub b: Option<f64>,
}

fn by_n(points: &[AggregatePoint]) -> BTreeMap<usize, Vec<AggregatePoint>> {
    let mut map: BTreeMap<usize, Vec<AggregatePoint>> = BTreeMap::new();
    for a in points {
        map.entry(a.n).or_default().push(a.clone());
    }
    map
}

fn missing_base<T>() -> Outcome<T> {
    Outcome::Error("base fit unavailable".into())
}

fn residual_points(points: &[AggregatePoint], base: &BaseParams) -> Vec<(f64, f64)> {
    points
        .iter()
        .map(|a| (a.p, a.rot_per_node.mean - eval_base(a.p, base)))
        .collect()
}

fn base_stats(points: &[AggregatePoint], base: &BaseParams) -> StatsOut {
    let obs: Vec<f64> = points.iter().map(|a| a.rot_per_node.mean).collect();
    let pred: Vec<f64> = points.iter().map(|a| eval_base(a.p, base)).collect();
    match pavl_core::fitting::fit_stats(&obs, &pred) {
        Ok(s) => s.into(),
        Err(_) => StatsOut {
            mse: f64::NAN,
            rse: f64::NAN,
            pearson: f64::NAN,
            residual_variance: f64::NAN,
            residual_std: f64::NAN,
        },
    }
}

fn crossings_for(base: &BaseParams, fit: &ResidualFit) -> Crossings {
    crossing_points(base, &fit.warp, &fit.residual)
}

fn residual_out(points: &[AggregatePoint], base: &BaseParams) -> Result<ResidualOut, FitError> {
    let fit = fit_residual(&residual_points(points, base), base)?;
    let c = crossings_for(base, &fit);
    Ok(ResidualOut {
        warp: fit.warp.into(),
        k: fit.residual.k,
        a: fit.residual.a,
        b: fit.residual.b,
        p_star_a: c.p_star_a,
        p_star_b: c.p_star_b,
        roots_a: c.roots_a,
        roots_b: c.roots_b,
        stats: fit.stats.into(),
        base_stats: base_stats(points, base),
        points: points.len(),
    })
}

fn interaction_rows(runs: &[RunRecord]) -> Vec<InteractionRow> {
    runs.iter()
        .map(|r| InteractionRow {
            n: r.n as f64,
            p: r.p,
            imbalance_events: r.imbalance_events as f64,
            rotations: r.rotations_total as f64,
        })
        .collect()
}

/// Fits every model and returns the document; never fails as a whole.
pub fn fit_all(aggregate: &[AggregatePoint], runs: &[RunRecord], residual_base: ResidualBase) -> FitsDocument {
    let groups = by_n(aggregate);
    let pooled: Vec<(f64, f64)> = aggregate.iter().map(|a| (a.p, a.rot_per_node.mean)).collect();

    let base_fit = fit_base(&pooled);
    let base: Outcome<BaseOut> = base_fit
        .as_ref()
        .map(|f| BaseOut {
            saturation: f.params.saturation,
            b: f.params.rate,
            points: pooled.len(),
            stats: f.stats.into(),
        })
        .map_err(Clone::clone)
        .into();
    let base_params = match residual_base {
        ResidualBase::Reference => Some(BaseParams::REFERENCE),
        ResidualBase::Fitted => base_fit.as_ref().ok().map(|f| f.params),
    };
    let residual_base_out = ResidualBaseOut {
        source: residual_base,
        saturation: base_params.map(|b| b.saturation),
        b: base_params.map(|b| b.rate),
    };

    let residual_pooled = match &base_params {
        Some(bp) => residual_out(aggregate, bp).into(),
        None => missing_base(),
    };
    let residual_per_n: Vec<PerN<ResidualOut>> = groups
        .iter()
        .map(|(&n, pts)| PerN {
            n,
            fit: match &base_params {
                Some(bp) => residual_out(pts, bp).into(),
                None => missing_base(),
            },
        })
        .collect();

    let cosine = match &base_params {
        Some(bp) => {
            let resid: Vec<f64> = residual_points(aggregate, bp).iter().map(|r| r.1).collect();
            let f: Vec<f64> = aggregate.iter().map(|a| eval_base(a.p, bp)).collect();
            cosine_similarity(&resid, &f).into()
        }
        None => missing_base(),
    };

    let inter_fit = fit_interaction(&interaction_rows(runs));
    let interaction: Outcome<InteractionOut> = inter_fit
        .as_ref()
        .map(|f| InteractionOut {
            m: f.params.m,
            lambda: f.params.lambda,
            m_std_error: f.std_errors.m,
            lambda_std_error: f.std_errors.lambda,
            rows: runs.len(),
            stats: f.stats.into(),
        })
        .map_err(Clone::clone)
        .into();

    let imbalance_residual_per_n = match (&base_params, &inter_fit) {
        (Some(bp), Ok(inter)) => imbalance_fits(&groups, bp, inter.params.m, inter.params.lambda, &residual_per_n),
        _ => groups
            .keys()
            .map(|&n| PerN {
                n,
                fit: Outcome::Error("base or interaction fit unavailable".into()),
            })
            .collect(),
    };

    let delta_crossings: Vec<DeltaRow> = residual_per_n
        .iter()
        .zip(&imbalance_residual_per_n)
        .map(|(rot, imb)| {
            let (r, i) = (rot.fit.ok(), imb.fit.ok());
            let diff = |x: Option<f64>, y: Option<f64>| Some(x? - y?);
            DeltaRow {
                n: rot.n,
                delta_p_star_a: diff(r.and_then(|r| r.p_star_a), i.and_then(|i| i.p_star_a)),
                delta_p_star_b: diff(r.and_then(|r| r.p_star_b), i.and_then(|i| i.p_star_b)),
            }
        })
        .collect();

    let k_pairs: Vec<(usize, f64)> = imbalance_residual_per_n
        .iter()
        .filter_map(|row| row.fit.ok().map(|f| (row.n, f.k)))
        .collect();
    // The sign of k follows the residual's orientation; the scaling probe
    // concerns its magnitude.
    let k_scaling = fit_k_scaling(&k_pairs.iter().map(|&(n, k)| (n as f64, k.abs())).collect::<Vec<_>>())
        .map(|s| KScalingOut {
            exploratory: true,
            exponent: s.exponent,
            coefficient: s.coefficient,
            r_squared: s.r_squared,
            excluded_n: s.excluded.iter().map(|&i| k_pairs[i].0).collect(),
        })
        .into();

    FitsDocument {
        tool: format!("pavl {}", env!("CARGO_PKG_VERSION")),
        base,
        residual_base: residual_base_out,
        residual_pooled,
        residual_per_n,
        cosine_similarity: cosine,
        interaction,
        imbalance_residual_per_n,
        delta_crossings,
        k_scaling,
    }
}

/// Imbalance residual `imbalances * p - m * rotations - lambda * N * p` per
/// tree size, fitted from the published zeroes and from the rotation fit of
/// the same size; the lower-MSE result is kept.
fn imbalance_fits(
    groups: &BTreeMap<usize, Vec<AggregatePoint>>,
    base: &BaseParams,
    m: f64,
    lambda: f64,
    rotation: &[PerN<ResidualOut>],
) -> Vec<PerN<ImbalanceOut>> {
    let per_n: Vec<(usize, Vec<(f64, f64)>)> = groups
        .iter()
        .map(|(&n, pts)| {
            let nf = n as f64;
            let data = pts
                .iter()
                .map(|a| {
                    let rot = a.rot_per_node.mean * nf;
                    (a.p, a.imbalance.mean * a.p - m * rot - lambda * nf * a.p)
                })
                .collect();
            (n, data)
        })
        .collect();
    let from_reference = fit_imbalance_residual(&per_n, base, &WarpParams::REFERENCE, &IMBALANCE_START);
    from_reference
        .into_iter()
        .zip(&per_n)
        .map(|((n, reference), one)| {
            let mut best: Option<(&'static str, ResidualFit)> = reference.as_ref().ok().map(|f| ("reference", *f));
            let mut last_err = reference.err();
            if let Some(rot) = rotation.iter().find(|r| r.n == n).and_then(|r| r.fit.ok()) {
                let warp = WarpParams {
                    a1: rot.warp.a1,
                    a2: rot.warp.a2,
                    a3: rot.warp.a3,
                    d1: rot.warp.d1,
                };
                let res = ResidualParams { k: rot.k, a: rot.a, b: rot.b };
                match fit_imbalance_residual(std::slice::from_ref(one), base, &warp, &res).pop() {
                    Some((_, Ok(f))) if best.as_ref().is_none_or(|(_, b)| f.stats.mse < b.stats.mse) => {
                        best = Some(("rotation", f));
                    }
                    Some((_, Err(e))) => last_err = last_err.or(Some(e)),
                    _ => {}
                }
            }
            let fit = match best {
                Some((start, f)) => {
                    let c = crossings_for(base, &f);
                    Outcome::Ok(ImbalanceOut {
                        start,
                        warp: f.warp.into(),
                        k: f.residual.k,
                        a: f.residual.a,
                        b: f.residual.b,
                        p_star_a: c.p_star_a,
                        p_star_b: c.p_star_b,
                        stats: f.stats.into(),
                    })
                }
                None => Outcome::Error(last_err.map_or_else(|| "no fit".into(), |e| e.to_string())),
            };
            PerN { n, fit }
        })
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

fn tables(doc: &FitsDocument, runs: &[RunRecord]) -> Vec<(&'static str, String)> {
    let mut zeroes = String::from("n,k,a,b,d1,mse,base_mse\n");
    let mut crossings = String::from("n,p_star_a,p_star_b\n");
    for row in &doc.residual_per_n {
        if let Some(f) = row.fit.ok() {
            zeroes.push_str(&line(&[
                row.n.to_string(),
                fmt_real(f.k),
                fmt_real(f.a),
                fmt_real(f.b),
                fmt_real(f.warp.d1),
                fmt_real(f.stats.mse),
                fmt_real(f.base_stats.mse),
            ]));
            crossings.push_str(&line(&[row.n.to_string(), opt(f.p_star_a), opt(f.p_star_b)]));
        }
    }
    let mut imbalance = String::from("n,k,a,b,p_star_a,p_star_b,d1\n");
    for row in &doc.imbalance_residual_per_n {
        if let Some(f) = row.fit.ok() {
            imbalance.push_str(&line(&[
                row.n.to_string(),
                fmt_real(f.k),
                fmt_real(f.a),
                fmt_real(f.b),
                opt(f.p_star_a),
                opt(f.p_star_b),
                fmt_real(f.warp.d1),
            ]));
        }
    }
    let mut delta = String::from("n,delta_p_star_a,delta_p_star_b\n");
    for d in &doc.delta_crossings {
        delta.push_str(&line(&[d.n.to_string(), opt(d.delta_p_star_a), opt(d.delta_p_star_b)]));
    }

    let mut exceedance = String::from("n,p,margin,probability\n");
    if let Ok(rows) = height_exceedance(runs, &EXCEEDANCE_MARGINS) {
        for e in rows {
            exceedance.push_str(&line(&[
                e.n.to_string(),
                fmt_p(e.p),
                e.margin.to_string(),
                fmt_real(e.probability),
            ]));
        }
    }

    let mut tails = String::from("n,p,runs,slope,intercept,r_squared,points\n");
    let mut sorted: Vec<&RunRecord> = runs.iter().collect();
    sorted.sort_by(|a, b| a.n.cmp(&b.n).then(a.p.total_cmp(&b.p)));
    for group in sorted.chunk_by(|a, b| a.n == b.n && a.p.to_bits() == b.p.to_bits()) {
        let sigmas: Vec<f64> = group.iter().map(|r| r.sigma).collect();
        if let Ok(t) = tail_exponential_fit(&sigmas, TAIL_BAND) {
            tails.push_str(&line(&[
                group[0].n.to_string(),
                fmt_p(group[0].p),
                group.len().to_string(),
                fmt_real(t.slope),
                fmt_real(t.intercept),
                fmt_real(t.r_squared),
                t.points.to_string(),
            ]));
        }
    }

    vec![
        (ZEROES, zeroes),
        (CROSSINGS, crossings),
        (IMBALANCE_PARAMS, imbalance),
        (DELTA_CROSSINGS, delta),
        (EXCEEDANCE, exceedance),
        (SIGMA_TAILS, tails),
    ]
}

pub fn render_json(doc: &FitsDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).unwrap_or_default();
    s.push('\n');
    s
}

pub fn fit(
    aggregate_path: &Path,
    runs_path: &Path,
    out: &Path,
    residual_base: ResidualBase,
    force: bool,
) -> Result<FitsDocument> {
    let aggregate = csvio::read_aggregate(aggregate_path)?;
    let runs = csvio::read_runs(runs_path)?;
    if aggregate.is_empty() {
        return Err(Error::Data(format!("{}: no rows", aggregate_path.display())));
    }
    let dir = OutDir::new(out, force);
    dir.prepare(&OUTPUTS)?;
    let doc = fit_all(&aggregate, &runs, residual_base);
    dir.write(FITS, &render_json(&doc))?;
    for (name, body) in tables(&doc, &runs) {
        dir.write(name, &body)?;
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pavl_core::distribution::MeanVar;
    use pavl_core::fitting::{eval_rotation_model, ResidualParams};

    fn synthetic(n: usize) -> Vec<AggregatePoint> {
        let (b, w, r) = (BaseParams::REFERENCE, WarpParams::REFERENCE, ResidualParams::REFERENCE);
        let mut ps = vec![0.0];
        ps.extend((0..30).map(|i| 10f64.powf(-4.0 + 4.0 * i as f64 / 29.0)));
        ps.into_iter()
            .map(|p| {
                let rot = eval_rotation_model(p, &b, &w, &r).unwrap();
                let mv = |mean| MeanVar { mean, var: 0.0 };
                AggregatePoint {
                    n,
                    p,
                    runs: 1,
                    rot_per_node: mv(rot),
                    imbalance: mv(if p > 0.0 { (0.7 * rot * n as f64 + 0.01 * n as f64 * p) / p } else { 0.0 }),
                    avg_depth: mv(10.0),
                    height: mv(20.0),
                    sigma: mv(0.0),
                    violating: mv(0.0),
                }
            })
            .collect()
    }

    #[test]
    fn sections_fail_independently() {
        let agg = synthetic(1000);
        // Only p = 0 runs: the interaction regression is rank deficient.
        let runs: Vec<RunRecord> = (0..3)
            .map(|s| pavl_core::harness::run_single(50, 0.0, s, pavl_core::KeyOrder::Random).unwrap())
            .collect();
        let doc = fit_all(&agg, &runs, ResidualBase::Fitted);
        assert!(matches!(doc.interaction, Outcome::Error(_)));
        let base = doc.base.ok().unwrap();
        assert!((base.saturation - 0.67).abs() < 0.05);
        assert!(doc.residual_pooled.ok().is_some());
        assert!(doc.imbalance_residual_per_n.iter().all(|r| matches!(r.fit, Outcome::Error(_))));
        let json = render_json(&doc);
        assert!(json.contains("\"interaction\": {\n    \"error\""), "{json}");
    }

    #[test]
    fn synthetic_crossings_follow_the_model() {
        let agg = synthetic(2000);
        let doc = fit_all(&agg, &[], ResidualBase::Reference);
        let pooled = doc.residual_pooled.ok().unwrap();
        assert!(pooled.stats.mse < pooled.base_stats.mse);
        assert_eq!(doc.residual_per_n.len(), 1);
        assert!(pooled.p_star_a.unwrap() < pooled.p_star_b.unwrap());
    }
}
