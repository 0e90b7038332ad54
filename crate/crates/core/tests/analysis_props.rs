use pavl_core::distribution::{ecdf, tail_probability};
use pavl_core::pareto::{bin_smooth, detect_pareto_knee, ParetoPoint};
use proptest::prelude::*;

fn samples() -> impl Strategy<Value = Vec<f64>> {
    // Small integer grid so ties are common.
    proptest::collection::vec((0i32..40).prop_map(|v| v as f64 * 0.25), 1..1_000)
}

proptest! {
    #[test]
    fn ecdf_matches_counting(values in samples()) {
        let steps = ecdf(&values).unwrap();
        let n = values.len() as f64;
        for &(x, f) in &steps {
            let count = values.iter().filter(|&&v| v <= x).count() as f64;
            prop_assert!((f - count / n).abs() < 1e-12);
        }
        let mut distinct = values.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        prop_assert_eq!(steps.len(), distinct.len());
        prop_assert_eq!(steps.last().unwrap().1, 1.0);
    }

    #[test]
    fn tail_matches_counting(values in samples(), thresholds in proptest::collection::vec(-1.0f64..11.0, 1..20)) {
        let n = values.len() as f64;
        for (t, s) in tail_probability(&values, &thresholds).unwrap() {
            let count = values.iter().filter(|&&v| v > t).count() as f64;
            prop_assert!((s - count / n).abs() < 1e-12);
        }
    }

    #[test]
    fn smoothing_keeps_monotone_frontiers(
        steps in proptest::collection::vec((0.0f64..0.1, 0.0f64..0.1), 3..60),
        bins in 2usize..50,
        window in prop::sample::select(vec![1usize, 3, 5]),
    ) {
        // rot rises and depth falls with p.
        let mut rot = 0.0;
        let mut depth = 2.0;
        let pts: Vec<ParetoPoint> = steps
            .iter()
            .enumerate()
            .map(|(i, &(dr, dd))| {
                rot += dr;
                depth -= dd;
                ParetoPoint { p: 10f64.powf(-6.0 + 6.0 * i as f64 / steps.len() as f64), rot_norm: rot, depth_norm: depth }
            })
            .collect();
        let s = bin_smooth(&pts, bins, window).unwrap();
        for w in s.points.windows(2) {
            prop_assert!(w[0].p < w[1].p);
            prop_assert!(w[1].rot_norm >= w[0].rot_norm - 1e-12);
            prop_assert!(w[1].depth_norm <= w[0].depth_norm + 1e-12);
        }
    }

    #[test]
    fn pareto_knee_ignores_order_and_affine_scale(
        raw in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..40),
        perm_seed: u64,
        sx in 0.1f64..10.0, bx in -5.0f64..5.0,
        sy in 0.1f64..10.0, by in -5.0f64..5.0,
    ) {
        let pts: Vec<ParetoPoint> = raw
            .iter()
            .enumerate()
            .map(|(i, &(r, d))| ParetoPoint { p: i as f64, rot_norm: r, depth_norm: d })
            .collect();
        let Ok(knee) = detect_pareto_knee(&pts) else { return Ok(()) };

        let mut shuffled = pts.clone();
        let mut state = perm_seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(detect_pareto_knee(&shuffled).unwrap().p, knee.p);

        let scaled: Vec<ParetoPoint> = pts
            .iter()
            .map(|pt| ParetoPoint { p: pt.p, rot_norm: sx * pt.rot_norm + bx, depth_norm: sy * pt.depth_norm + by })
            .collect();
        let k2 = detect_pareto_knee(&scaled).unwrap();
        // Exact ties in distance can flip under rounding; accept an equally
        // distant point in that case.
        if k2.p != knee.p {
            let dist = |q: &[ParetoPoint], i: usize| {
                let lo_x = q.iter().map(|p| p.rot_norm).fold(f64::INFINITY, f64::min);
                let hi_x = q.iter().map(|p| p.rot_norm).fold(f64::NEG_INFINITY, f64::max);
                let lo_y = q.iter().map(|p| p.depth_norm).fold(f64::INFINITY, f64::min);
                let hi_y = q.iter().map(|p| p.depth_norm).fold(f64::NEG_INFINITY, f64::max);
                let n = |p: &ParetoPoint| ((p.rot_norm - lo_x) / (hi_x - lo_x), (p.depth_norm - lo_y) / (hi_y - lo_y));
                let (a, b, c) = (n(&q[0]), n(&q[q.len() - 1]), n(&q[i]));
                let (dx, dy) = (b.0 - a.0, b.1 - a.1);
                (dx * (c.1 - a.1) - dy * (c.0 - a.0)).abs() / (dx * dx + dy * dy).sqrt()
            };
            let i1 = knee.p as usize;
            let i2 = k2.p as usize;
            prop_assert!((dist(&pts, i1) - dist(&pts, i2)).abs() < 1e-9);
        }
    }
}
