//! CSV schemas shared by the pipeline stages.
//!
//! Writers produce LF-terminated UTF-8 with a fixed header. Reals are written
//! in shortest round-trip form, except `p`, which is first rounded to ten
//! significant digits. Readers check the header and report the row and
//! column of the first bad field (lines count from 1 at the header).

use std::fmt::Write as _;
use std::path::Path;

use pavl_core::distribution::{AggregatePoint, MeanVar};
use pavl_core::pareto::KneeReport;
use pavl_core::RunRecord;
use serde::Deserialize;

use crate::error::{Error, Result};

pub const RUNS_HEADER: &str = "n,p,run_index,seed,rotations_total,single_rotations,double_rotations,imbalance_events,height,avg_depth,sigma,violating_fraction,elapsed_ms";
pub const AGGREGATE_HEADER: &str = "n,p,runs,rot_per_node_mean,rot_per_node_var,imbalance_mean,imbalance_var,avg_depth_mean,avg_depth_var,height_mean,height_var,sigma_mean,sigma_var,violating_mean,violating_var";
pub const PARETO_HEADER: &str = "n,p,rot_norm,depth_norm,efficiency";
pub const KNEES_HEADER: &str = "n,knee_p,knee_rot,knee_depth,pareto_p,pareto_rot,pareto_depth";

pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x}")
    }
}

pub fn fmt_p(p: f64) -> String {
    let rounded: f64 = format!("{p:.9e}").parse().unwrap_or(p);
    fmt_real(rounded)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// Joins already formatted fields into one CSV line.
pub fn line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 96);
    out.push_str(RUNS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            fmt_p(r.p),
            r.run_index,
            r.seed,
            r.rotations_total,
            r.single_rotations,
            r.double_rotations,
            r.imbalance_events,
            r.height,
            fmt_real(r.avg_depth),
            fmt_real(r.sigma),
            fmt_real(r.violating_fraction),
            fmt_real(r.elapsed_ms),
        );
    }
    out
}

pub fn aggregate_csv(points: &[AggregatePoint]) -> String {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for a in points {
        let mut fields = vec![a.n.to_string(), fmt_p(a.p), a.runs.to_string()];
        for mv in [a.rot_per_node, a.imbalance, a.avg_depth, a.height, a.sigma, a.violating] {
            fields.push(fmt_real(mv.mean));
            fields.push(fmt_real(mv.var));
        }
        out.push_str(&line(&fields));
    }
    out
}

pub fn knees_csv(reports: &[KneeReport]) -> String {
    let mut out = String::from(KNEES_HEADER);
    out.push('\n');
    for k in reports {
        let e = k.efficiency;
        let r = k.pareto;
        out.push_str(&line(&[
            k.n.to_string(),
            e.map(|pt| fmt_p(pt.p)).unwrap_or_default(),
            fmt_opt(e.map(|pt| pt.rot_norm)),
            fmt_opt(e.map(|pt| pt.depth_norm)),
            r.map(|pt| fmt_p(pt.p)).unwrap_or_default(),
            fmt_opt(r.map(|pt| pt.rot_norm)),
            fmt_opt(r.map(|pt| pt.depth_norm)),
        ]));
    }
    out
}

#[derive(Deserialize)]
struct RunRow {
    n: usize,
    p: f64,
    run_index: usize,
    seed: u64,
    rotations_total: u64,
    single_rotations: u64,
    double_rotations: u64,
    imbalance_events: u64,
    height: i32,
    avg_depth: f64,
    sigma: f64,
    violating_fraction: f64,
    elapsed_ms: f64,
}

#[derive(Deserialize)]
struct AggregateRow {
    n: usize,
    p: f64,
    runs: usize,
    rot_per_node_mean: f64,
    rot_per_node_var: f64,
    imbalance_mean: f64,
    imbalance_var: f64,
    avg_depth_mean: f64,
    avg_depth_var: f64,
    height_mean: f64,
    height_var: f64,
    sigma_mean: f64,
    sigma_var: f64,
    violating_mean: f64,
    violating_var: f64,
}

/// Knee row as read back; empty cells mean "not found".
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct KneeRow {
    pub n: usize,
    pub knee_p: Option<f64>,
    pub knee_rot: Option<f64>,
    pub knee_depth: Option<f64>,
    pub pareto_p: Option<f64>,
    pub pareto_rot: Option<f64>,
    pub pareto_depth: Option<f64>,
}

fn diagnose(path: &Path, header: &[&str], err: csv::Error) -> Error {
    let where_ = match err.position() {
        Some(pos) => format!("line {}", pos.line()),
        None => "unknown line".into(),
    };
    match err.kind() {
        csv::ErrorKind::Deserialize { err: de, .. } => {
            let column = de
                .field()
                .map(|f| {
                    let name = header.get(f as usize).copied().unwrap_or("?");
                    format!("column {} ({name})", f + 1)
                })
                .unwrap_or_else(|| "unknown column".into());
            Error::Data(format!("{}: {where_}, {column}: {}", path.display(), de.kind()))
        }
        csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(err.to_string())),
        _ => Error::Data(format!("{}: {where_}: {err}", path.display())),
    }
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path, expected: &str) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Data(format!("{}: missing input file", path.display())),
        _ => Error::io(path, e),
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<&str> = expected.split(',').collect();
    let found = reader.headers().map_err(|e| diagnose(path, &header, e))?.clone();
    if found.iter().collect::<Vec<_>>() != header {
        return Err(Error::Data(format!(
            "{}: line 1: unexpected header, expected `{expected}`",
            path.display()
        )));
    }
    reader
        .deserialize()
        .map(|row| row.map_err(|e| diagnose(path, &header, e)))
        .collect()
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRecord>> {
    let rows: Vec<RunRow> = read_rows(path, RUNS_HEADER)?;
    Ok(rows
        .into_iter()
        .map(|r| RunRecord {
            n: r.n,
            p: r.p,
            run_index: r.run_index,
            seed: r.seed,
            rotations_total: r.rotations_total,
            single_rotations: r.single_rotations,
            double_rotations: r.double_rotations,
            imbalance_events: r.imbalance_events,
            height: r.height,
            avg_depth: r.avg_depth,
            sigma: r.sigma,
            violating_fraction: r.violating_fraction,
            elapsed_ms: r.elapsed_ms,
        })
        .collect())
}

pub fn read_aggregate(path: &Path) -> Result<Vec<AggregatePoint>> {
    let rows: Vec<AggregateRow> = read_rows(path, AGGREGATE_HEADER)?;
    let mv = |mean, var| MeanVar { mean, var };
    Ok(rows
        .into_iter()
        .map(|r| AggregatePoint {
            n: r.n,
            p: r.p,
            runs: r.runs,
            rot_per_node: mv(r.rot_per_node_mean, r.rot_per_node_var),
            imbalance: mv(r.imbalance_mean, r.imbalance_var),
            avg_depth: mv(r.avg_depth_mean, r.avg_depth_var),
            height: mv(r.height_mean, r.height_var),
            sigma: mv(r.sigma_mean, r.sigma_var),
            violating: mv(r.violating_mean, r.violating_var),
        })
        .collect())
}

pub fn read_knees(path: &Path) -> Result<Vec<KneeRow>> {
    read_rows(path, KNEES_HEADER)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pavl_core::harness::{run_single, KeyOrder};

    #[test]
    fn number_formats() {
        assert_eq!(fmt_real(0.5), "0.5");
        assert_eq!(fmt_real(2.0), "2");
        assert_eq!(fmt_real(f64::NAN), "NaN");
        assert_eq!(fmt_p(1.0), "1");
        assert_eq!(fmt_p(1e-6), "0.000001");
        assert_eq!(fmt_p(0.1 + 0.2), "0.3");
        assert_eq!(fmt_p(0.123_456_789_012_3), "0.123456789");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn runs_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let recs: Vec<RunRecord> = [0.0, 0.3, 1.0]
            .iter()
            .map(|&p| run_single(100, p, 5, KeyOrder::Random).unwrap())
            .collect();
        let path = dir.path().join("runs.csv");
        std::fs::write(&path, runs_csv(&recs)).unwrap();
        assert_eq!(read_runs(&path).unwrap(), recs);
    }

    #[test]
    fn aggregate_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let recs: Vec<RunRecord> = (0..4).map(|s| run_single(64, 0.25, s, KeyOrder::Random).unwrap()).collect();
        let (agg, _) = pavl_core::distribution::aggregate(&recs, None);
        let path = dir.path().join("aggregate.csv");
        std::fs::write(&path, aggregate_csv(&agg)).unwrap();
        assert_eq!(read_aggregate(&path).unwrap(), agg);
    }

    #[test]
    fn malformed_rows_name_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.csv");
        let good = "10,0.5,0,1,2,2,0,3,4,1.5,0,0,0\n";
        std::fs::write(&path, format!("{RUNS_HEADER}\n{good}10,0.5,1,1,x,2,0,3,4,1.5,0,0,0\n")).unwrap();
        let msg = read_runs(&path).unwrap_err().to_string();
        assert!(msg.contains("line 3") && msg.contains("column 5 (rotations_total)"), "{msg}");

        std::fs::write(&path, "n,p\n1,2\n").unwrap();
        assert!(read_runs(&path).unwrap_err().to_string().contains("header"));

        std::fs::write(&path, format!("{RUNS_HEADER}\n10,0.5\n")).unwrap();
        let err = read_runs(&path).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }
}
