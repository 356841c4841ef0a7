#![allow(dead_code)]

use lwr_core::continuous::{AnchoredFamily, ContinuousProblem, ScenarioFunction};
use lwr_core::RegretKind;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const BOX: f64 = 2.0;

/// Strictly convex quadratic or exponential-plus-linear function on `R^n`.
pub fn random_strict(rng: &mut ChaCha8Rng, n: usize) -> ScenarioFunction {
    let offset = rng.random_range(-1.0..1.0);
    if rng.random_bool(0.6) {
        // Q = B Bᵀ + 0.2 I
        let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let q: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| b[i][k] * b[j][k]).sum::<f64>() + if i == j { 0.2 } else { 0.0 })
                    .collect()
            })
            .collect();
        let center = (0..n).map(|_| rng.random_range(-BOX..BOX)).collect();
        let linear = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        ScenarioFunction::quadratic(q, center, linear).unwrap().with_offset(offset)
    } else {
        ScenarioFunction::exp_linear_nd(
            (0..n).map(|_| rng.random_range(0.2..2.0)).collect(),
            (0..n).map(|_| rng.random_range(0.5..2.0)).collect(),
            (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            (0..n).map(|_| rng.random_range(0.1..1.0)).collect(),
        )
        .unwrap()
        .with_offset(offset)
    }
}

pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, scenarios: usize, kind: RegretKind) -> ContinuousProblem {
    let fs = (0..scenarios).map(|_| random_strict(rng, n)).collect();
    ContinuousProblem::new(
        vec![-BOX; n],
        vec![BOX; n],
        (0..scenarios).map(|i| format!("s{i}")),
        fs,
        kind,
    )
    .unwrap()
}

/// Anchored family with quadratic shape `h(y) = yᵀQy` and the given cost vector.
pub fn random_family(rng: &mut ChaCha8Rng, n: usize, count: usize, linear: Vec<f64>) -> AnchoredFamily {
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { rng.random_range(0.5..2.0) } else { 0.0 }).collect())
        .collect();
    let mut q = q;
    if n == 2 {
        let c = rng.random_range(-0.3..0.3);
        q[0][1] = c;
        q[1][0] = c;
    }
    let shape = ScenarioFunction::quadratic(q, vec![0.0; n], vec![0.0; n]).unwrap();
    let anchors = (0..count).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    AnchoredFamily::new((0..count).map(|i| format!("a{i}")), anchors, shape, linear).unwrap()
}

/// Envelope value at `x` of the transformed functions.
pub fn envelope(fs: &[ScenarioFunction], x: &[f64]) -> f64 {
    fs.iter().map(|f| f.value(x)).fold(f64::NEG_INFINITY, f64::max)
}

/// Grid oracle for `n ≤ 2`: step `coarse` over the box, then step `fine`
/// within two coarse steps of the best coarse point.
pub fn grid_min(fs: &[ScenarioFunction], lower: &[f64], upper: &[f64], coarse: f64, fine: f64) -> (Vec<f64>, f64) {
    let n = lower.len();
    let mut best = (lower.to_vec(), f64::INFINITY);
    let scan = |lo: &[f64], hi: &[f64], step: f64, best: &mut (Vec<f64>, f64)| {
        let counts: Vec<usize> = (0..n).map(|j| ((hi[j] - lo[j]) / step).round() as usize).collect();
        let total: usize = counts.iter().map(|c| c + 1).product();
        for flat in 0..total {
            let mut rem = flat;
            let x: Vec<f64> = (0..n)
                .map(|j| {
                    let k = rem % (counts[j] + 1);
                    rem /= counts[j] + 1;
                    (lo[j] + k as f64 * step).min(hi[j])
                })
                .collect();
            let v = envelope(fs, &x);
            if v < best.1 {
                *best = (x, v);
            }
        }
    };
    scan(lower, upper, coarse, &mut best);
    let c = best.0.clone();
    let lo: Vec<f64> = (0..n).map(|j| (c[j] - 2.0 * coarse).max(lower[j])).collect();
    let hi: Vec<f64> = (0..n).map(|j| (c[j] + 2.0 * coarse).min(upper[j])).collect();
    scan(&lo, &hi, fine, &mut best);
    best
}
