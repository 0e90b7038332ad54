use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::csvio::{self, KneeRow};
use crate::error::{Error, Result};
use crate::output::OutDir;
use crate::pipeline::{fit::FITS, pareto::KNEES};

pub const SUMMARY: &str = "summary.txt";

/// Published knee rows: `(n, knee_p, knee_rot, knee_depth, pareto_p, pareto_rot, pareto_depth)`.
const REFERENCE_KNEES: [(usize, [f64; 6]); 7] = [
    (8_000, [0.0058, 0.081, 1.141, 0.0298, 0.228, 1.086]),
    (16_000, [0.0047, 0.072, 1.139, 0.0280, 0.214, 1.072]),
    (32_000, [0.0033, 0.055, 1.161, 0.0196, 0.172, 1.076]),
    (64_000, [0.0025, 0.043, 1.158, 0.0184, 0.171, 1.075]),
    (128_000, [0.0017, 0.031, 1.168, 0.0184, 0.175, 1.072]),
    (256_000, [0.0017, 0.031, 1.159, 0.0184, 0.176, 1.068]),
    (512_000, [0.0011, 0.022, 1.156, 0.0131, 0.140, 1.077]),
];

/// Published rotation crossings per tree size.
const REFERENCE_CROSSINGS: [(usize, f64, f64); 6] = [
    (8_000, 0.190746, 0.697421),
    (16_000, 0.194355, 0.692111),
    (32_000, 0.193882, 0.691976),
    (64_000, 0.195223, 0.686445),
    (128_000, 0.196438, 0.686519),
    (256_000, 0.196561, 0.686103),
];

fn num(v: &Value, pointer: &str) -> Option<f64> {
    v.pointer(pointer).and_then(Value::as_f64)
}

fn cell(x: Option<f64>) -> String {
    match x {
        Some(x) => format!("{x:.6}"),
        None => "-".into(),
    }
}

fn row(out: &mut String, label: &str, measured: Option<f64>, reference: Option<f64>) {
    let _ = writeln!(out, "  {label:<28} {:>14} {:>14}", cell(measured), cell(reference));
}

fn section_error(v: &Value, key: &str) -> Option<String> {
    v.get(key)?.get("error")?.as_str().map(str::to_owned)
}

/// Closest published row for a measured tree size, if any lies within 5%.
fn nearest<T: Copy>(n: usize, table: &[(usize, T)]) -> Option<(usize, T)> {
    table
        .iter()
        .copied()
        .min_by_key(|(m, _)| m.abs_diff(n))
        .filter(|(m, _)| (*m as f64 - n as f64).abs() <= 0.05 * *m as f64)
}

pub fn render(fits: &Value, knees: &[KneeRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "p-AVL summary: measured vs reference");
    let _ = writeln!(s);
    let _ = writeln!(s, "  {:<28} {:>14} {:>14}", "quantity", "measured", "reference");

    let _ = writeln!(s, "\nbase model rot/N = A (1 - exp(-b p))");
    if let Some(e) = section_error(fits, "base") {
        let _ = writeln!(s, "  error: {e}");
    }
    row(&mut s, "A", num(fits, "/base/ok/A"), Some(0.67));
    row(&mut s, "b", num(fits, "/base/ok/b"), Some(5.72));
    row(&mut s, "pearson", num(fits, "/base/ok/stats/pearson"), Some(0.993523));
    row(&mut s, "mse", num(fits, "/base/ok/stats/mse"), Some(3.553e-4));

    let _ = writeln!(s, "\ncombined model (pooled residual fit)");
    if let Some(e) = section_error(fits, "residual_pooled") {
        let _ = writeln!(s, "  error: {e}");
    }
    let r = "/residual_pooled/ok";
    row(&mut s, "a", num(fits, &format!("{r}/a")), Some(0.21760284));
    row(&mut s, "b", num(fits, &format!("{r}/b")), Some(0.34390392));
    row(&mut s, "d1", num(fits, &format!("{r}/warp/d1")), Some(-1.45418721));
    row(&mut s, "k", num(fits, &format!("{r}/k")), Some(23.0));
    row(&mut s, "mse", num(fits, &format!("{r}/stats/mse")), Some(3.396e-6));
    row(&mut s, "p*_a", num(fits, &format!("{r}/p_star_a")), None);
    row(&mut s, "p*_b", num(fits, &format!("{r}/p_star_b")), None);
    row(&mut s, "cosine(residual, f)", num(fits, "/cosine_similarity/ok"), Some(0.182));

    let _ = writeln!(s, "\nrotation crossings per n");
    for entry in fits.get("residual_per_n").and_then(Value::as_array).into_iter().flatten() {
        let n = entry.get("n").and_then(Value::as_u64).unwrap_or(0) as usize;
        let reference = nearest(n, &REFERENCE_CROSSINGS.map(|(m, a, b)| (m, (a, b))));
        row(&mut s, &format!("n={n} p*_a"), num(entry, "/ok/p_star_a"), reference.map(|r| r.1 .0));
        row(&mut s, &format!("n={n} p*_b"), num(entry, "/ok/p_star_b"), reference.map(|r| r.1 .1));
    }

    let _ = writeln!(s, "\ninteraction model imbalances*p = m rot + lambda N p");
    if let Some(e) = section_error(fits, "interaction") {
        let _ = writeln!(s, "  error: {e}");
    }
    row(&mut s, "m", num(fits, "/interaction/ok/m"), Some(0.703972));
    row(&mut s, "lambda", num(fits, "/interaction/ok/lambda"), Some(-0.020980));
    row(&mut s, "pearson", num(fits, "/interaction/ok/stats/pearson"), Some(0.999979));

    let _ = writeln!(s, "\nimbalance residual k(N) power law (exploratory)");
    row(&mut s, "exponent", num(fits, "/k_scaling/ok/exponent"), None);
    row(&mut s, "r_squared", num(fits, "/k_scaling/ok/r_squared"), None);

    let _ = writeln!(s, "\nknees (efficiency, raw pareto)");
    for k in knees {
        let reference = nearest(k.n, &REFERENCE_KNEES);
        let refv = |i: usize| reference.map(|r| r.1[i]);
        let measured = [k.knee_p, k.knee_rot, k.knee_depth, k.pareto_p, k.pareto_rot, k.pareto_depth];
        let names = ["knee_p", "knee_rot", "knee_depth", "pareto_p", "pareto_rot", "pareto_depth"];
        for (i, name) in names.iter().enumerate() {
            row(&mut s, &format!("n={} {name}", k.n), measured[i], refv(i));
        }
    }
    s
}

/// Reads the fit and pareto outputs under `input` and writes a summary
/// into `out`.
pub fn report(input: &Path, out: &Path, force: bool) -> Result<String> {
    let fits_path = input.join(FITS);
    let text = std::fs::read_to_string(&fits_path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Data(format!("{}: missing input file", fits_path.display())),
        _ => Error::io(&fits_path, e),
    })?;
    let fits: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Data(format!("{}: line {}, column {}: {e}", fits_path.display(), e.line(), e.column())))?;
    let knees = csvio::read_knees(&input.join(KNEES))?;
    let summary = render(&fits, &knees);
    let dir = OutDir::new(out, force);
    dir.prepare(&[SUMMARY])?;
    dir.write(SUMMARY, &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_reference_row() {
        assert_eq!(nearest(8_000, &REFERENCE_KNEES).unwrap().0, 8_000);
        assert_eq!(nearest(65_536, &REFERENCE_KNEES).unwrap().0, 64_000);
        assert!(nearest(1_000, &REFERENCE_KNEES).is_none());
    }

    #[test]
    fn renders_errors_and_missing_values() {
        let fits: Value = serde_json::json!({
            "base": {"ok": {"A": 0.66, "b": 5.9, "stats": {"pearson": 0.995, "mse": 1e-4}}},
            "interaction": {"error": "design matrix is rank deficient"},
        });
        let s = render(&fits, &[]);
        assert!(s.contains("0.660000"));
        assert!(s.contains("error: design matrix is rank deficient"));
        assert_eq!(s, render(&fits, &[]));
    }
}
