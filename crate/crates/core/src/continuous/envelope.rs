//! Minimization of the upper envelope `F(x) = max_p φ_p(x)` of convex pieces
//! over a box.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::simplex::{solve_lp, Constraint, LinearProgram, LpStatus, Relation, Sense};

use super::functions::ScenarioFunction;

/// Relative width at which golden-section search stops.
pub const GOLDEN_TOLERANCE: f64 = 1e-9;
/// Relative upper-minus-lower gap at which the cutting-plane loop stops.
pub const GAP_TOLERANCE: f64 = 1e-7;
/// Default cap on the number of cuts in the cutting-plane master.
pub const DEFAULT_CUT_LIMIT: usize = 10_000;

/// A convex function the envelope solver can query.
pub(crate) trait Piece: Sync {
    fn eval(&self, x: &[f64]) -> Result<f64>;
    fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn hessian(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
    /// Size of the terms summed to form the value, for rounding estimates.
    fn magnitude(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.abs())
    }
}

impl Piece for ScenarioFunction {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        let v = self.value(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NumericFailure(format!("scenario function is not finite at {x:?}")))
        }
    }

    fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(ScenarioFunction::subgradient(self, x))
    }

    fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        ScenarioFunction::hessian(self, x)
    }

    fn magnitude(&self, x: &[f64]) -> Result<f64> {
        Ok(self.offset.abs() + (self.value(x) - self.offset).abs())
    }
}

/// Rounding noise expected in envelope values near `x`.
pub(crate) fn noise(pieces: &[&dyn Piece], x: &[f64]) -> Result<f64> {
    let mut m = 0.0f64;
    for p in pieces {
        m = m.max(p.magnitude(x)?);
    }
    Ok(1e-12 * (1.0 + m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GoldenSection,
    CuttingPlane,
}

/// Solver bookkeeping reported alongside a solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub method: Method,
    pub iterations: usize,
    pub cuts: usize,
    /// Best certified lower bound on the envelope minimum.
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Largest primal-dual objective gap over all master LPs.
    pub max_duality_gap: f64,
    /// Whether the Newton refinement of the cutting-plane point was accepted.
    pub polished: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct EnvelopeOptimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub values: Vec<f64>,
    pub diagnostics: Diagnostics,
}

/// `intercept + slope·x`, generated by piece `owner`.
#[derive(Debug, Clone)]
pub(crate) struct AffineCut {
    pub intercept: f64,
    pub slope: Vec<f64>,
    pub owner: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct MasterSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Convex weights on the cuts at the master optimum.
    pub weights: Vec<f64>,
    pub duality_gap: f64,
}

/// Minimizes `max_c (intercept_c + slope_c·x)` over the box.
///
/// The LP is posed in dual form: maximize `Σ μ_c a_c + lo·u - hi·v` subject to
/// `Σ μ_c g_c - u + v = 0`, `Σ μ = 1`, `μ, u, v ≥ 0`. The minimizer is read off
/// the row shadow prices.
pub(crate) fn minimize_max_affine(cuts: &[AffineCut], lower: &[f64], upper: &[f64]) -> Result<MasterSolution> {
    let n = lower.len();
    let k = cuts.len();
    if k == 0 {
        return Err(Error::EmptySet("cuts"));
    }
    let mut objective: Vec<f64> = cuts.iter().map(|c| c.intercept).collect();
    objective.extend_from_slice(lower);
    objective.extend(upper.iter().map(|u| -u));
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    for j in 0..n {
        let mut coeffs: Vec<(usize, f64)> =
            cuts.iter().enumerate().filter(|(_, c)| c.slope[j] != 0.0).map(|(i, c)| (i, c.slope[j])).collect();
        coeffs.push((k + j, -1.0));
        coeffs.push((k + n + j, 1.0));
        lp.push(Constraint::new(coeffs, Relation::Eq, 0.0));
    }
    lp.push(Constraint::new((0..k).map(|i| (i, 1.0)).collect(), Relation::Eq, 1.0));
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::NumericFailure("cutting-plane master reported infeasible".into())),
        LpStatus::Unbounded => return Err(Error::NumericFailure("cutting-plane master reported unbounded".into())),
    }
    let x: Vec<f64> = (0..n).map(|j| (-sol.duals[j]).clamp(lower[j], upper[j])).collect();
    let value = cuts
        .iter()
        .map(|c| c.intercept + c.slope.iter().zip(&x).map(|(g, xi)| g * xi).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let dual_value = sol.duals[n];
    Ok(MasterSolution {
        x,
        value,
        weights: sol.primal[..k].to_vec(),
        duality_gap: (sol.objective - dual_value).abs(),
    })
}

fn envelope_at(pieces: &[&dyn Piece], x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let values = pieces.iter().map(|p| p.eval(x)).collect::<Result<Vec<f64>>>()?;
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((top, values))
}

/// Golden-section search on `[lo, hi]` for a convex envelope of one variable.
pub(crate) fn golden_section(pieces: &[&dyn Piece], lo: f64, hi: f64) -> Result<EnvelopeOptimum> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |x: f64| envelope_at(pieces, &[x]).map(|(v, _)| v);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut iterations = 0;
    while b - a > GOLDEN_TOLERANCE * (1.0 + (0.5 * (a + b)).abs()) {
        iterations += 1;
        if iterations > 10_000 {
            return Err(Error::IterationLimit(iterations));
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    // The bracket endpoints matter when the minimum sits on the boundary.
    let mut best = (c, fc);
    for x in [a, d, b, 0.5 * (a + b)] {
        let v = f(x)?;
        if v < best.1 {
            best = (x, v);
        }
    }
    let mut polished = false;
    if let Some(px) = polish(pieces, &[lo], &[hi], &[best.0], best.1, &vec![0.0; pieces.len()])? {
        if envelope_at(pieces, &px)?.0 <= best.1 + noise(pieces, &px)? {
            best.0 = px[0];
            polished = true;
        }
    }
    let (value, values) = envelope_at(pieces, &[best.0])?;
    let lower_bound = pieces_lower_bound_1d(pieces, best.0, value, lo, hi)?;
    Ok(EnvelopeOptimum {
        x: vec![best.0],
        value,
        values,
        diagnostics: Diagnostics {
            method: Method::GoldenSection,
            iterations,
            cuts: 0,
            lower_bound,
            upper_bound: value,
            max_duality_gap: 0.0,
            polished,
        },
    })
}

/// Lower bound from the linearizations of the active pieces at `x`.
fn pieces_lower_bound_1d(pieces: &[&dyn Piece], x: f64, value: f64, lo: f64, hi: f64) -> Result<f64> {
    let mut cuts = Vec::new();
    for (p, piece) in pieces.iter().enumerate() {
        let v = piece.eval(&[x])?;
        if v >= value - 1e-6 * (1.0 + value.abs()) {
            let g = piece.subgradient(&[x])?[0];
            cuts.push(AffineCut { intercept: v - g * x, slope: vec![g], owner: p });
        }
    }
    Ok(minimize_max_affine(&cuts, &[lo], &[hi])?.value.min(value))
}

/// Kelley's cutting-plane method followed by a Newton refinement on the
/// optimality conditions of the active pieces.
pub(crate) fn cutting_plane(
    pieces: &[&dyn Piece],
    lower: &[f64],
    upper: &[f64],
    cut_limit: usize,
) -> Result<EnvelopeOptimum> {
    let mut x: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect();
    let mut cuts: Vec<AffineCut> = Vec::new();
    let mut best_x = x.clone();
    let mut best = f64::INFINITY;
    let mut lower_bound = f64::NEG_INFINITY;
    let mut max_gap = 0.0f64;
    let mut iterations = 0;
    let mut weights;
    loop {
        iterations += 1;
        let (value, values) = envelope_at(pieces, &x)?;
        if value < best {
            best = value;
            best_x = x.clone();
        }
        for (p, piece) in pieces.iter().enumerate() {
            let g = piece.subgradient(&x)?;
            let intercept = values[p] - g.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
            cuts.push(AffineCut { intercept, slope: g, owner: p });
        }
        if cuts.len() > cut_limit {
            return Err(Error::IterationLimit(cut_limit));
        }
        let master = minimize_max_affine(&cuts, lower, upper)?;
        max_gap = max_gap.max(master.duality_gap);
        lower_bound = lower_bound.max(master.value);
        weights = master.weights;
        if best - lower_bound <= GAP_TOLERANCE * (1.0 + best.abs()) {
            break;
        }
        if master.x == x {
            // No progress possible from this point; the gap is a numerical floor.
            break;
        }
        x = master.x;
    }
    let mut piece_weight = vec![0.0; pieces.len()];
    for (cut, w) in cuts.iter().zip(&weights) {
        piece_weight[cut.owner] += w;
    }
    let mut polished = false;
    if let Some(px) = polish(pieces, lower, upper, &best_x, best, &piece_weight)? {
        let (pv, _) = envelope_at(pieces, &px)?;
        if pv <= best + 1e-9 * (1.0 + best.abs()) + noise(pieces, &px)? {
            best_x = px;
            polished = true;
        }
    }
    let (value, values) = envelope_at(pieces, &best_x)?;
    Ok(EnvelopeOptimum {
        x: best_x,
        value,
        values,
        diagnostics: Diagnostics {
            method: Method::CuttingPlane,
            iterations,
            cuts: cuts.len(),
            lower_bound: lower_bound.min(value),
            upper_bound: value,
            max_duality_gap: max_gap,
            polished,
        },
    })
}

/// Newton's method on the KKT system of `min t s.t. φ_p(x) ≤ t (p ∈ A)` with
/// the coordinates in `fixed` held at their bounds. Returns a verified point or
/// `None`.
fn polish(
    pieces: &[&dyn Piece],
    lower: &[f64],
    upper: &[f64],
    x0: &[f64],
    f0: f64,
    piece_weight: &[f64],
) -> Result<Option<Vec<f64>>> {
    let n = lower.len();
    let values: Vec<f64> = pieces.iter().map(|p| p.eval(x0)).collect::<Result<_>>()?;
    if pieces.iter().any(|p| p.hessian(x0).is_none()) {
        return Ok(None);
    }
    let by_weight: Vec<usize> = {
        let mut v: Vec<usize> = (0..pieces.len()).filter(|&p| piece_weight[p] > 1e-7).collect();
        v.sort_by(|&a, &b| piece_weight[b].total_cmp(&piece_weight[a]));
        v
    };
    let by_value: Vec<usize> =
        (0..pieces.len()).filter(|&p| values[p] >= f0 - 1e-5 * (1.0 + f0.abs())).collect();
    let near_bound: Vec<usize> = (0..n)
        .filter(|&j| {
            let w = upper[j] - lower[j];
            x0[j] - lower[j] <= 1e-6 * w || upper[j] - x0[j] <= 1e-6 * w
        })
        .collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for active in [&by_weight, &by_value] {
        for fixed in [&near_bound, &Vec::new()] {
            if active.is_empty() || active.len() > n - fixed.len() + 1 {
                continue;
            }
            if let Some(x) = newton_kkt(pieces, lower, upper, x0, f0, active, fixed, piece_weight)? {
                let (v, _) = envelope_at(pieces, &x)?;
                if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
                    best = Some((x, v));
                }
            }
        }
    }
    Ok(best.map(|(x, _)| x))
}

#[allow(clippy::too_many_arguments)]
fn newton_kkt(
    pieces: &[&dyn Piece],
    lower: &[f64],
    upper: &[f64],
    x0: &[f64],
    f0: f64,
    active: &[usize],
    fixed: &[usize],
    piece_weight: &[f64],
) -> Result<Option<Vec<f64>>> {
    let n = lower.len();
    let free: Vec<usize> = (0..n).filter(|j| !fixed.contains(j)).collect();
    let nf = free.len();
    let na = active.len();
    let dim = nf + 1 + na;
    let mut x = x0.to_vec();
    for &j in fixed {
        x[j] = if x0[j] - lower[j] <= upper[j] - x0[j] { lower[j] } else { upper[j] };
    }
    let mut t = f0;
    let total: f64 = active.iter().map(|&p| piece_weight[p]).sum();
    let mut lambda: Vec<f64> = if total > 0.0 {
        active.iter().map(|&p| piece_weight[p] / total).collect()
    } else {
        vec![1.0 / na as f64; na]
    };
    let mut converged = false;
    for _ in 0..60 {
        let vals: Vec<f64> = active.iter().map(|&p| pieces[p].eval(&x)).collect::<Result<_>>()?;
        let grads: Vec<Vec<f64>> = active.iter().map(|&p| pieces[p].subgradient(&x)).collect::<Result<_>>()?;
        let hess: Vec<DMatrix<f64>> = match active.iter().map(|&p| pieces[p].hessian(&x)).collect::<Option<Vec<_>>>() {
            Some(h) => h,
            None => return Ok(None),
        };
        let mut r = DVector::zeros(dim);
        let mut jac = DMatrix::zeros(dim, dim);
        for (row, &j) in free.iter().enumerate() {
            r[row] = (0..na).map(|a| lambda[a] * grads[a][j]).sum();
            for (col, &k) in free.iter().enumerate() {
                jac[(row, col)] = (0..na).map(|a| lambda[a] * hess[a][(j, k)]).sum();
            }
            for a in 0..na {
                jac[(row, nf + 1 + a)] = grads[a][j];
            }
        }
        for a in 0..na {
            let row = nf + a;
            r[row] = vals[a] - t;
            for (col, &k) in free.iter().enumerate() {
                jac[(row, col)] = grads[a][k];
            }
            jac[(row, nf)] = -1.0;
        }
        r[dim - 1] = lambda.iter().sum::<f64>() - 1.0;
        for a in 0..na {
            jac[(dim - 1, nf + 1 + a)] = 1.0;
        }
        let scale = 1.0 + t.abs() + 1e12 * noise(pieces, &x)?;
        let residual = r.amax();
        let Some(step) = jac.lu().solve(&(-&r)) else {
            return Ok(None);
        };
        if !step.iter().all(|s| s.is_finite()) {
            return Ok(None);
        }
        for (i, &j) in free.iter().enumerate() {
            x[j] += step[i];
        }
        t += step[nf];
        for a in 0..na {
            lambda[a] += step[nf + 1 + a];
        }
        let xs = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if residual <= 1e-13 * scale && step.amax() <= 1e-12 * xs {
            converged = true;
            break;
        }
        if step.amax() <= 1e-15 * xs {
            converged = residual <= 1e-10 * scale;
            break;
        }
    }
    if !converged {
        return Ok(None);
    }
    // Feasibility and KKT sign checks.
    for j in 0..n {
        let w = upper[j] - lower[j];
        if x[j] < lower[j] - 1e-12 * w || x[j] > upper[j] + 1e-12 * w {
            return Ok(None);
        }
        x[j] = x[j].clamp(lower[j], upper[j]);
    }
    if lambda.iter().any(|l| *l < -1e-10) {
        return Ok(None);
    }
    let (top, _) = envelope_at(pieces, &x)?;
    if top > t + 1e-9 * (1.0 + t.abs()) + noise(pieces, &x)? {
        return Ok(None);
    }
    let grads: Vec<Vec<f64>> = active.iter().map(|&p| pieces[p].subgradient(&x)).collect::<Result<_>>()?;
    let g: Vec<f64> = (0..n).map(|j| (0..na).map(|a| lambda[a] * grads[a][j]).sum()).collect();
    let gscale = 1.0 + grads.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for &j in fixed {
        let at_lower = x[j] == lower[j];
        if (at_lower && g[j] < -1e-8 * gscale) || (!at_lower && g[j] > 1e-8 * gscale) {
            return Ok(None);
        }
    }
    Ok(Some(x))
}
