use super::*;
use crate::robust::ProbabilityPolytope;

fn quad(center: &[f64]) -> ScenarioFunction {
    ScenarioFunction::isotropic(center.to_vec(), 1.0).unwrap()
}

fn problem(lower: &[f64], upper: &[f64], fs: Vec<ScenarioFunction>, kind: RegretKind) -> ContinuousProblem {
    let labels: Vec<String> = (1..=fs.len()).map(|i| i.to_string()).collect();
    ContinuousProblem::new(lower.to_vec(), upper.to_vec(), labels, fs, kind).unwrap()
}

/// Envelope minimum by bisection on the sign of `f1 - f2`, for one crossing.
fn bisect_crossing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let s = f(lo).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Coarse grid then a step-1e-4 grid in a window around the coarse minimizer.
fn grid_oracle_2d(fs: &[ScenarioFunction], lower: &[f64], upper: &[f64]) -> (Vec<f64>, f64) {
    let env = |x: &[f64]| fs.iter().map(|f| f.value(x)).fold(f64::NEG_INFINITY, f64::max);
    let mut best = (vec![lower[0], lower[1]], f64::INFINITY);
    let search = |lo: [f64; 2], hi: [f64; 2], step: f64, best: &mut (Vec<f64>, f64)| {
        let nx = ((hi[0] - lo[0]) / step).round() as usize;
        let ny = ((hi[1] - lo[1]) / step).round() as usize;
        for i in 0..=nx {
            for j in 0..=ny {
                let x = [lo[0] + i as f64 * step, lo[1] + j as f64 * step];
                let v = env(&x);
                if v < best.1 {
                    *best = (x.to_vec(), v);
                }
            }
        }
    };
    search([lower[0], lower[1]], [upper[0], upper[1]], 1e-2, &mut best);
    let c = best.0.clone();
    let w = 2e-2;
    search(
        [(c[0] - w).max(lower[0]), (c[1] - w).max(lower[1])],
        [(c[0] + w).min(upper[0]), (c[1] + w).min(upper[1])],
        1e-4,
        &mut best,
    );
    best
}

#[test]
fn regret_of_nonnegative_quadratic_is_itself() {
    let p = problem(&[-2.0], &[2.0], vec![quad(&[1.0])], RegretKind::RegretMin);
    let r = regret_functions(&p).unwrap();
    for x in [-2.0, -0.5, 1.0, 2.0] {
        assert_eq!(r[0].value(&[x]), p.functions()[0].value(&[x]));
    }
}

#[test]
fn regret_of_exp_linear_vanishes_at_stationary_point() {
    let (b, rate, a, k) = (5.0, 0.8, 2.0, 1.5);
    let f = ScenarioFunction::exp_linear(b, rate, a, k).unwrap();
    let p = problem(&[-5.0], &[10.0], vec![f], RegretKind::RegretMin);
    let r = regret_functions(&p).unwrap();
    let s = a + (rate * b / k).ln() / rate;
    assert!(r[0].value(&[s]).abs() < 1e-12);
    // Independent check: sampled minimum of the raw function.
    let raw = |x: f64| b * (-rate * (x - a)).exp() + k * x;
    let sampled = (0..=150_000).map(|i| raw(-5.0 + i as f64 * 1e-4)).fold(f64::INFINITY, f64::min);
    assert!((raw(s) - sampled).abs() < 1e-7);
}

#[test]
fn regret_of_constant_is_zero() {
    let p = problem(&[0.0], &[1.0], vec![ScenarioFunction::constant(1, 7.5)], RegretKind::RegretMin);
    let r = regret_functions(&p).unwrap();
    assert_eq!(r[0].value(&[0.3]), 0.0);
}

#[test]
fn unsupported_kinds_are_rejected() {
    let err = ContinuousProblem::new(vec![0.0], vec![1.0], ["a"], vec![quad(&[0.0])], RegretKind::RegretMean);
    assert_eq!(err.unwrap_err(), Error::UnsupportedKind(RegretKind::RegretMean));
    let err = ContinuousProblem::new(vec![1.0], vec![1.0], ["a"], vec![quad(&[0.0])], RegretKind::Cost);
    assert!(matches!(err, Err(Error::InvalidInput(_))));
}

#[test]
fn symmetric_pair_in_one_dimension() {
    let p = problem(&[-2.0], &[2.0], vec![quad(&[1.0]), quad(&[-1.0])], RegretKind::Cost);
    let s = solve_1d(&p).unwrap();
    assert!(s.x_star[0].abs() < 1e-8);
    assert!((s.value - 1.0).abs() < 1e-12);
    assert_eq!(s.active, ["1", "2"]);
    assert_eq!(s.determining_set, ["1", "2"]);
    assert!(s.warnings.is_empty());
}

#[test]
fn dominated_third_scenario_is_inactive() {
    let p = problem(&[-2.0], &[2.0], vec![quad(&[1.0]), quad(&[-1.0]), quad(&[0.0])], RegretKind::Cost);
    let s = solve_1d(&p).unwrap();
    assert!(s.x_star[0].abs() < 1e-8);
    assert!((s.value - 1.0).abs() < 1e-12);
    assert_eq!(s.active, ["1", "2"]);
}

#[test]
fn exponential_meets_identity() {
    // e^{-(x-1)} = x crosses at x = 1 exactly.
    let f1 = ScenarioFunction::exp_linear(1.0, 1.0, 1.0, 0.0).unwrap();
    let f2 = ScenarioFunction::piecewise_linear(vec![(0.0, vec![1.0])]).unwrap();
    let p = problem(&[0.0], &[5.0], vec![f1, f2], RegretKind::Cost);
    let s = solve_1d(&p).unwrap();
    let oracle = bisect_crossing(|x| (-(x - 1.0)).exp() - x, 0.0, 5.0);
    assert!((oracle - 1.0).abs() < 1e-12);
    assert!((s.x_star[0] - oracle).abs() < 1e-8);
    assert!((s.value - oracle).abs() < 1e-8);
}

#[test]
fn unit_vector_pair_in_two_dimensions() {
    let p = problem(&[-2.0, -2.0], &[2.0, 2.0], vec![quad(&[1.0, 0.0]), quad(&[0.0, 1.0])], RegretKind::Cost);
    let s = solve_nd(&p).unwrap();
    assert!((s.x_star[0] - 0.5).abs() < 1e-9 && (s.x_star[1] - 0.5).abs() < 1e-9);
    assert!((s.value - 0.5).abs() < 1e-9);
    assert_eq!(s.determining_set.len(), 2);
}

#[test]
fn triangle_of_quadratics_matches_grid() {
    let fs = vec![quad(&[0.0, 0.0]), quad(&[1.0, 0.0]), quad(&[0.0, 1.0])];
    let (lo, hi) = ([-2.0, -2.0], [2.0, 2.0]);
    let p = problem(&lo, &hi, fs.clone(), RegretKind::Cost);
    let s = solve_nd(&p).unwrap();
    let (gx, gv) = grid_oracle_2d(&fs, &lo, &hi);
    assert!((s.x_star[0] - gx[0]).abs() <= 1e-4 && (s.x_star[1] - gx[1]).abs() <= 1e-4, "{:?} vs {gx:?}", s.x_star);
    assert!(s.value <= gv + 1e-12);
    assert!(gv - s.value <= 1e-6);
}

#[test]
fn single_scenario_returns_its_minimizer() {
    let f = ScenarioFunction::quadratic(vec![vec![2.0, 0.5], vec![0.5, 1.0]], vec![0.3, -0.4], vec![0.0, 0.0]).unwrap();
    let p = problem(&[-1.0, -1.0], &[1.0, 1.0], vec![f], RegretKind::Cost);
    let s = solve_nd(&p).unwrap();
    assert!((s.x_star[0] - 0.3).abs() < 1e-9 && (s.x_star[1] + 0.4).abs() < 1e-9);
    assert_eq!(s.determining_set, ["1"]);

    let p1 = problem(&[-3.0], &[3.0], vec![quad(&[2.5])], RegretKind::RegretMin);
    let s1 = solve(&p1).unwrap();
    assert!((s1.x_star[0] - 2.5).abs() < 1e-8);
    assert!(s1.value.abs() < 1e-12);
}

#[test]
fn boundary_optimum_in_two_dimensions() {
    // Both minimizers lie outside the box on the right; the optimum sits on x0 = 1.
    let fs = vec![quad(&[3.0, 0.5]), quad(&[3.0, -0.5])];
    let (lo, hi) = ([-1.0, -1.0], [1.0, 1.0]);
    let p = problem(&lo, &hi, fs.clone(), RegretKind::Cost);
    let s = solve_nd(&p).unwrap();
    assert!((s.x_star[0] - 1.0).abs() < 1e-9 && s.x_star[1].abs() < 1e-9, "{:?}", s.x_star);
    assert!((s.value - 4.25).abs() < 1e-9);
}

#[test]
fn piecewise_linear_in_two_dimensions() {
    // max(|x|, |y|) shifted: minimum 0 at (0.25, -0.5).
    let pl = ScenarioFunction::piecewise_linear(vec![
        (-0.25, vec![1.0, 0.0]),
        (0.25, vec![-1.0, 0.0]),
        (0.5, vec![0.0, 1.0]),
        (-0.5, vec![0.0, -1.0]),
    ])
    .unwrap();
    let p = problem(&[-1.0, -1.0], &[1.0, 1.0], vec![pl], RegretKind::Cost);
    let s = solve_nd(&p).unwrap();
    assert!(s.value.abs() < 1e-7);
    assert!((s.x_star[0] - 0.25).abs() < 1e-6 && (s.x_star[1] + 0.5).abs() < 1e-6);
}

#[test]
fn determining_set_of_dominating_scenario_is_singleton() {
    let big = ScenarioFunction::isotropic(vec![0.0], 1.0).unwrap().with_offset(10.0);
    let p = problem(&[-2.0], &[2.0], vec![quad(&[1.0]), big, quad(&[-1.0])], RegretKind::Cost);
    let s = solve(&p).unwrap();
    assert_eq!(s.determining_set, ["2"]);
    assert_eq!(determining_set(&p, &s).unwrap(), ["2"]);
}

#[test]
fn regret_kind_changes_the_optimum() {
    // Cost: (x-1)² vs (x+1)² + 3; regret removes the offset.
    let f2 = quad(&[-1.0]).with_offset(3.0);
    let cost = problem(&[-2.0], &[2.0], vec![quad(&[1.0]), f2.clone()], RegretKind::Cost);
    let regret = problem(&[-2.0], &[2.0], vec![quad(&[1.0]), f2], RegretKind::RegretMin);
    let sc = solve(&cost).unwrap();
    let sr = solve(&regret).unwrap();
    assert!((sc.x_star[0] + 0.75).abs() < 1e-8);
    assert!(sr.x_star[0].abs() < 1e-8);
}

#[test]
fn flat_envelope_warns() {
    let flat = ScenarioFunction::constant(1, 1.0);
    let p = problem(&[0.0], &[1.0], vec![flat], RegretKind::Cost);
    let s = solve(&p).unwrap();
    assert!(s.warnings.iter().any(|w| w.contains("flat")));
}

#[test]
fn block_solve_without_rows_equals_plain_solve() {
    for (lo, hi, fs) in [
        (vec![-2.0], vec![2.0], vec![quad(&[1.0]), quad(&[-1.0]), quad(&[0.3])]),
        (vec![-2.0, -2.0], vec![2.0, 2.0], vec![quad(&[0.0, 0.0]), quad(&[1.0, 0.0]), quad(&[0.0, 1.0])]),
    ] {
        let p = problem(&lo, &hi, fs, RegretKind::Cost);
        let plain = solve(&p).unwrap();
        let poly = ProbabilityPolytope::unconstrained(p.scenarios().clone());
        let block = robust_block_solve(&p, &poly).unwrap();
        assert_eq!(block.solution.x_star, plain.x_star);
        assert_eq!(block.solution.value, plain.value);
        assert_eq!(block.solution.active, plain.active);
        assert_eq!(block.solution.determining_set, plain.determining_set);
    }
}

#[test]
fn block_solve_two_singletons_is_plain_minimax() {
    let p = problem(&[-2.0], &[2.0], vec![quad(&[1.0]), quad(&[-1.0])], RegretKind::Cost);
    let poly = ProbabilityPolytope::unconstrained(p.scenarios().clone());
    let b = robust_block_solve(&p, &poly).unwrap();
    assert_eq!(b.components.len(), 2);
    assert!(b.solution.x_star[0].abs() < 1e-8);
}

#[test]
fn block_solve_with_ordering_rows() {
    // Component {1,2} with p_2 ≤ p_1 gives g = max(f1, (f1+f2)/2).
    let fs = vec![quad(&[1.0]), quad(&[-1.0]), quad(&[2.0])];
    let p = problem(&[-3.0], &[3.0], fs.clone(), RegretKind::Cost);
    let mut poly = ProbabilityPolytope::unconstrained(p.scenarios().clone());
    poly.order("2", "1").unwrap();
    let b = robust_block_solve(&p, &poly).unwrap();
    assert_eq!(b.components, vec![vec!["1".to_string(), "2".to_string()], vec!["3".to_string()]]);
    let env = |x: f64| {
        let (a, c, d) = (fs[0].value(&[x]), fs[1].value(&[x]), fs[2].value(&[x]));
        a.max(0.5 * (a + c)).max(d)
    };
    let grid_best = (0..=600_000).map(|i| -3.0 + i as f64 * 1e-5).map(env).fold(f64::INFINITY, f64::min);
    assert!((b.solution.value - grid_best).abs() < 1e-8);
    assert!(b.determining_components.len() <= 2);
}

#[test]
fn polytope_scenarios_must_match() {
    let p = problem(&[-2.0], &[2.0], vec![quad(&[1.0]), quad(&[-1.0])], RegretKind::Cost);
    let other = ProbabilityPolytope::unconstrained(crate::model::ScenarioSet::new(["x", "y"], "scenario").unwrap());
    assert!(matches!(robust_block_solve(&p, &other), Err(Error::DimensionMismatch(_))));
}
