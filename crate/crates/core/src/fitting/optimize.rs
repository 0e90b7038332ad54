//! Bounded least-squares minimizers: Nelder–Mead simplex and
//! Levenberg–Marquardt with a central-difference Jacobian.
//!
//! Bounds are enforced by projection. Non-finite residuals are treated as an
//! infinite objective so that the search backs away from model singularities.

use alloc::vec;
use alloc::vec::Vec;

use crate::linear;

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn unbounded(dim: usize) -> Self {
        Bounds {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub max_iterations: usize,
    /// Converged once an accepted step changes the parameters by less than
    /// this, relative to their norm.
    pub relative_tolerance: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            max_iterations: 10_000,
            relative_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Residual vector of a least-squares problem: writes `m` residuals for the
/// parameters `x` into `out`.
pub trait Residuals {
    fn len(&self) -> usize;
    fn eval(&self, x: &[f64], out: &mut [f64]);

    fn sse(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        self.eval(x, scratch);
        let s: f64 = scratch.iter().map(|r| r * r).sum();
        if s.is_finite() {
            s
        } else {
            f64::INFINITY
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

fn jacobian<R: Residuals>(problem: &R, x: &[f64], jac: &mut [f64], plus: &mut [f64], minus: &mut [f64]) -> bool {
    let m = problem.len();
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let h = 6e-6 * x[j].abs().max(1e-3);
        xp[j] = x[j] + h;
        problem.eval(&xp, plus);
        xp[j] = x[j] - h;
        problem.eval(&xp, minus);
        xp[j] = x[j];
        for i in 0..m {
            let d = (plus[i] - minus[i]) / (2.0 * h);
            if !d.is_finite() {
                return false;
            }
            jac[i * x.len() + j] = d;
        }
    }
    true
}

pub fn levenberg_marquardt<R: Residuals>(problem: &R, x0: &[f64], bounds: &Bounds, opts: Options) -> Minimum {
    let (m, n) = (problem.len(), x0.len());
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let mut r = vec![0.0; m];
    let mut scratch = vec![0.0; m];
    let mut plus = vec![0.0; m];
    let mut minus = vec![0.0; m];
    let mut jac = vec![0.0; m * n];
    let mut sse = problem.sse(&x, &mut r);
    let mut mu = 1e-3;
    let mut out = Minimum {
        x: x.clone(),
        sse,
        iterations: 0,
        converged: false,
    };
    if !sse.is_finite() {
        return out;
    }

    for iter in 1..=opts.max_iterations {
        out.iterations = iter;
        if sse == 0.0 {
            out.converged = true;
            break;
        }
        problem.eval(&x, &mut r);
        if !jacobian(problem, &x, &mut jac, &mut plus, &mut minus) {
            break;
        }
        let mut jtj = vec![0.0; n * n];
        let mut jtr = vec![0.0; n];
        for i in 0..m {
            let row = &jac[i * n..(i + 1) * n];
            for a in 0..n {
                jtr[a] += row[a] * r[i];
                for b in a..n {
                    jtj[a * n + b] += row[a] * row[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                jtj[a * n + b] = jtj[b * n + a];
            }
        }
        let max_diag = (0..n).map(|a| jtj[a * n + a]).fold(0.0, f64::max);
        if jtr.iter().all(|g| g.abs() <= 1e-300) {
            out.converged = true;
            break;
        }

        let mut accepted = false;
        while mu < 1e20 {
            let mut lhs = jtj.clone();
            for a in 0..n {
                let d = jtj[a * n + a].max(1e-12 * max_diag).max(1e-300);
                lhs[a * n + a] += mu * d;
            }
            let rhs: Vec<f64> = jtr.iter().map(|g| -g).collect();
            let Some(step) = linear::solve(lhs, rhs) else {
                mu *= 4.0;
                continue;
            };
            let mut trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
            bounds.project(&mut trial);
            let trial_sse = problem.sse(&trial, &mut scratch);
            if trial_sse < sse {
                let moved: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                let rel = norm(&moved) / (norm(&x) + 1e-12);
                x = trial;
                sse = trial_sse;
                mu = (mu / 3.0).max(1e-15);
                accepted = true;
                if rel < opts.relative_tolerance {
                    out.converged = true;
                }
                break;
            }
            mu *= 2.0;
        }
        if !accepted {
            // No descent direction left at working precision.
            out.converged = true;
        }
        if out.converged {
            break;
        }
    }
    out.x = x;
    out.sse = sse;
    out
}

/// Nelder–Mead on the sum of squared residuals.
pub fn nelder_mead<R: Residuals>(problem: &R, x0: &[f64], bounds: &Bounds, max_iterations: usize) -> Minimum {
    let n = x0.len();
    let mut scratch = vec![0.0; problem.len()];
    let mut eval = |x: &mut Vec<f64>| -> f64 {
        bounds.project(x);
        problem.sse(x, &mut scratch)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut start = x0.to_vec();
    let f0 = eval(&mut start);
    simplex.push((start.clone(), f0));
    for i in 0..n {
        let mut v = start.clone();
        v[i] += if v[i] != 0.0 { 0.05 * v[i] } else { 2.5e-4 };
        let f = eval(&mut v);
        simplex.push((v, f));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        let spread = simplex
            .iter()
            .skip(1)
            .map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let scale = simplex[0].0.iter().map(|v| v.abs()).fold(1e-12, f64::max);
        if (worst - best).abs() <= 1e-16 * best.abs().max(1e-300) && spread <= 1e-10 * scale {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let mut reflected = along(-1.0);
        let fr = eval(&mut reflected);
        if fr < simplex[0].1 {
            let mut expanded = along(-2.0);
            let fe = eval(&mut expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (mut contracted, fc) = if fr < simplex[n].1 {
            let mut c = along(-0.5);
            let f = eval(&mut c);
            (c, f)
        } else {
            let mut c = along(0.5);
            let f = eval(&mut c);
            (c, f)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (core::mem::take(&mut contracted), fc);
            continue;
        }
        let best_point = simplex[0].0.clone();
        for (v, f) in simplex.iter_mut().skip(1) {
            for (x, b) in v.iter_mut().zip(&best_point) {
                *x = b + 0.5 * (*x - b);
            }
            *f = eval(v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, sse) = simplex.swap_remove(0);
    Minimum {
        x,
        sse,
        iterations,
        converged,
    }
}

/// Runs the simplex from every start, polishes each result with
/// Levenberg–Marquardt and keeps the lowest objective. Ties keep the earlier
/// start, so the outcome is deterministic in the start order.
pub fn multi_start<R: Residuals>(problem: &R, starts: &[Vec<f64>], bounds: &Bounds, opts: Options) -> Minimum {
    let mut best: Option<Minimum> = None;
    for start in starts {
        let direct = levenberg_marquardt(problem, start, bounds, opts);
        let simplex = nelder_mead(problem, start, bounds, 4_000);
        let polished = levenberg_marquardt(problem, &simplex.x, bounds, opts);
        for candidate in [direct, polished] {
            let better = match &best {
                None => true,
                Some(b) => candidate.sse < b.sse || (candidate.sse == b.sse && candidate.converged && !b.converged),
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    best.expect("multi_start needs at least one start")
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl Residuals for Rosenbrock {
        fn len(&self) -> usize {
            2
        }
        fn eval(&self, x: &[f64], out: &mut [f64]) {
            out[0] = 10.0 * (x[1] - x[0] * x[0]);
            out[1] = 1.0 - x[0];
        }
    }

    struct Decay {
        t: Vec<f64>,
        y: Vec<f64>,
    }

    impl Residuals for Decay {
        fn len(&self) -> usize {
            self.t.len()
        }
        fn eval(&self, x: &[f64], out: &mut [f64]) {
            for (i, (t, y)) in self.t.iter().zip(&self.y).enumerate() {
                out[i] = x[0] * libm::exp(-x[1] * t) - y;
            }
        }
    }

    #[test]
    fn lm_solves_rosenbrock() {
        let m = levenberg_marquardt(&Rosenbrock, &[-1.2, 1.0], &Bounds::unbounded(2), Options::default());
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-8 && (m.x[1] - 1.0).abs() < 1e-8, "{:?}", m.x);
    }

    #[test]
    fn simplex_approaches_rosenbrock_minimum() {
        let m = nelder_mead(&Rosenbrock, &[-1.2, 1.0], &Bounds::unbounded(2), 5_000);
        assert!((m.x[0] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn bounds_are_respected() {
        let bounds = Bounds {
            lower: vec![f64::NEG_INFINITY, f64::NEG_INFINITY],
            upper: vec![0.5, f64::INFINITY],
        };
        let m = levenberg_marquardt(&Rosenbrock, &[-1.2, 1.0], &bounds, Options::default());
        assert!(m.x[0] <= 0.5);
        assert!((m.x[0] - 0.5).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn multi_start_recovers_exponential_decay() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let y = t.iter().map(|t| 3.0 * libm::exp(-0.7 * t)).collect();
        let problem = Decay { t, y };
        let m = multi_start(&problem, &[vec![1.0, 1.0], vec![10.0, 0.01]], &Bounds::unbounded(2), Options::default());
        assert!((m.x[0] - 3.0).abs() < 1e-9 && (m.x[1] - 0.7).abs() < 1e-9, "{:?}", m.x);
    }
}
