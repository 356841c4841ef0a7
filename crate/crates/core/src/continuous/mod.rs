//! Minimax over a box in `R^n` with convex scenario costs.
//!
//! The upper envelope of the (cost or regret) functions is minimized by
//! golden-section search in one dimension and by a cutting-plane method with
//! LP master problems otherwise. A greedy deletion pass then finds a small set
//! of scenarios that alone reproduce the optimum.

mod block;
mod envelope;
mod functions;
mod hull;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{RegretKind, ScenarioSet};

pub use block::{robust_block_solve, BlockSolution};
pub use envelope::{Diagnostics, Method, DEFAULT_CUT_LIMIT, GAP_TOLERANCE, GOLDEN_TOLERANCE};
pub use functions::{ScenarioFunction, Shape};
pub use hull::{hull_reduce, AnchoredFamily, HullReduction};

use envelope::{cutting_plane, golden_section, EnvelopeOptimum, Piece};

/// Scenario `i` is active when `f_i(x*) ≥ value - ACTIVE_TOLERANCE·(1 + |value|)`.
pub const ACTIVE_TOLERANCE: f64 = 1e-6;
/// Largest move of the optimum, relative to `1 + ‖x*‖∞`, tolerated when a
/// scenario is dropped from the determining set.
pub const RESOLVE_TOLERANCE: f64 = 1e-6;
/// Largest supported dimension.
pub const MAX_DIMENSION: usize = 10;

/// Scenario costs over the box `lower ≤ x ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousProblem {
    lower: Vec<f64>,
    upper: Vec<f64>,
    scenarios: ScenarioSet,
    functions: Vec<ScenarioFunction>,
    kind: RegretKind,
}

impl ContinuousProblem {
    pub fn new<S: Into<String>>(
        lower: Vec<f64>,
        upper: Vec<f64>,
        scenarios: impl IntoIterator<Item = S>,
        functions: Vec<ScenarioFunction>,
        kind: RegretKind,
    ) -> Result<Self> {
        let scenarios = ScenarioSet::new(scenarios, "scenario")?;
        let n = lower.len();
        if n == 0 {
            return Err(Error::InvalidInput("decision dimension must be at least 1".into()));
        }
        if upper.len() != n {
            return Err(Error::DimensionMismatch(format!("{} lower bounds, {} upper bounds", n, upper.len())));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !l.is_finite() || !u.is_finite() || l >= u {
                return Err(Error::InvalidInput(format!("invalid bound pair [{l}, {u}]")));
            }
        }
        if functions.len() != scenarios.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} scenarios, {} functions",
                scenarios.len(),
                functions.len()
            )));
        }
        for f in &functions {
            f.validate()?;
            if f.dimension() != n {
                return Err(Error::DimensionMismatch(format!(
                    "function of dimension {} on a {}-dimensional box",
                    f.dimension(),
                    n
                )));
            }
        }
        match kind {
            RegretKind::Cost | RegretKind::RegretMin => {}
            other => return Err(Error::UnsupportedKind(other)),
        }
        Ok(Self { lower, upper, scenarios, functions, kind })
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn scenarios(&self) -> &ScenarioSet {
        &self.scenarios
    }

    pub fn functions(&self) -> &[ScenarioFunction] {
        &self.functions
    }

    pub fn kind(&self) -> RegretKind {
        self.kind
    }

    pub fn with_kind(&self, kind: RegretKind) -> Result<Self> {
        Self::new(
            self.lower.clone(),
            self.upper.clone(),
            self.scenarios.iter().map(str::to_string),
            self.functions.clone(),
            kind,
        )
    }

    /// The problem restricted to the scenarios at `keep` (in that order).
    pub fn subset(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyScenarioSet);
        }
        Self::new(
            self.lower.clone(),
            self.upper.clone(),
            keep.iter().map(|&i| self.scenarios.get(i).to_string()),
            keep.iter().map(|&i| self.functions[i].clone()).collect(),
            self.kind,
        )
    }

    pub fn all_strictly_convex(&self) -> bool {
        self.functions.iter().all(ScenarioFunction::is_strictly_convex)
    }
}

/// Result of a continuous minimax solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousSolution {
    pub kind: RegretKind,
    pub x_star: Vec<f64>,
    pub value: f64,
    /// Transformed scenario values at `x_star`, in scenario order.
    pub scenario_values: Vec<f64>,
    pub active: Vec<String>,
    pub determining_set: Vec<String>,
    pub warnings: Vec<String>,
    pub diagnostics: Diagnostics,
}

/// Cost functions for `Cost`, or `f_i - inf_box f_i` for `RegretMin`.
pub fn regret_functions(problem: &ContinuousProblem) -> Result<Vec<ScenarioFunction>> {
    match problem.kind {
        RegretKind::Cost => Ok(problem.functions.clone()),
        RegretKind::RegretMin => problem
            .functions
            .iter()
            .map(|f| {
                let (_, inf) = f.box_minimum(&problem.lower, &problem.upper)?;
                Ok(f.clone().with_offset(f.offset - inf))
            })
            .collect(),
        other => Err(Error::UnsupportedKind(other)),
    }
}

fn is_active(v: f64, value: f64) -> bool {
    v >= value - ACTIVE_TOLERANCE * (1.0 + value.abs())
}

pub(crate) fn minimize_pieces(
    pieces: &[&dyn Piece],
    lower: &[f64],
    upper: &[f64],
    method: Method,
) -> Result<EnvelopeOptimum> {
    match method {
        Method::GoldenSection => golden_section(pieces, lower[0], upper[0]),
        Method::CuttingPlane => cutting_plane(pieces, lower, upper, DEFAULT_CUT_LIMIT),
    }
}

pub(crate) fn within_resolve_tolerance(a: &[f64], b: &[f64]) -> bool {
    let scale = 1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= RESOLVE_TOLERANCE * scale)
}

/// Greedy deletion: starting from `start`, repeatedly drop the first member
/// whose removal leaves the re-solved optimum within tolerance of `x_star`.
pub(crate) fn greedy_reduce<F>(start: Vec<usize>, x_star: &[f64], resolve: F) -> Result<Vec<usize>>
where
    F: Fn(&[usize]) -> Result<Vec<f64>> + Sync,
{
    let mut current = start;
    loop {
        if current.len() <= 1 {
            return Ok(current);
        }
        let trials: Vec<Result<bool>> = (0..current.len())
            .into_par_iter()
            .map(|drop| {
                let trial: Vec<usize> = current.iter().enumerate().filter(|(k, _)| *k != drop).map(|(_, &i)| i).collect();
                Ok(within_resolve_tolerance(&resolve(&trial)?, x_star))
            })
            .collect();
        let mut dropped = None;
        for (k, t) in trials.into_iter().enumerate() {
            if t? {
                dropped = Some(k);
                break;
            }
        }
        match dropped {
            Some(k) => {
                current.remove(k);
            }
            None => return Ok(current),
        }
    }
}

/// Flat envelope check: probes each coordinate direction.
pub(crate) fn flatness_warning(
    pieces: &[&dyn Piece],
    lower: &[f64],
    upper: &[f64],
    x: &[f64],
    value: f64,
) -> Result<Option<String>> {
    for j in 0..x.len() {
        let delta = 1e-4 * (upper[j] - lower[j]);
        for dir in [-1.0, 1.0] {
            let mut y = x.to_vec();
            y[j] = (x[j] + dir * delta).clamp(lower[j], upper[j]);
            if y[j] == x[j] {
                continue;
            }
            let v = pieces.iter().map(|p| p.eval(&y)).collect::<Result<Vec<f64>>>()?;
            let top = v.into_iter().fold(f64::NEG_INFINITY, f64::max);
            if top <= value + 1e-12 * (1.0 + value.abs()) {
                return Ok(Some(format!(
                    "envelope is flat near the optimum along coordinate {j}; the minimizer may not be unique"
                )));
            }
        }
    }
    Ok(None)
}

fn method_for(problem: &ContinuousProblem) -> Method {
    if problem.dimension() == 1 {
        Method::GoldenSection
    } else {
        Method::CuttingPlane
    }
}

fn solve_with(problem: &ContinuousProblem, method: Method) -> Result<ContinuousSolution> {
    let transformed = regret_functions(problem)?;
    let pieces: Vec<&dyn Piece> = transformed.iter().map(|f| f as &dyn Piece).collect();
    let opt = minimize_pieces(&pieces, &problem.lower, &problem.upper, method)?;
    let active_idx: Vec<usize> = (0..pieces.len()).filter(|&i| is_active(opt.values[i], opt.value)).collect();
    let mut warnings = Vec::new();
    if let Some(w) = flatness_warning(&pieces, &problem.lower, &problem.upper, &opt.x, opt.value)? {
        warnings.push(w);
    }
    let determining = greedy_reduce(active_idx.clone(), &opt.x, |keep| {
        let sub: Vec<&dyn Piece> = keep.iter().map(|&i| pieces[i]).collect();
        Ok(minimize_pieces(&sub, &problem.lower, &problem.upper, method)?.x)
    })?;
    if problem.all_strictly_convex() && determining.len() > problem.dimension() + 1 {
        warnings.push(format!(
            "determining set has {} scenarios, more than dimension + 1 = {}",
            determining.len(),
            problem.dimension() + 1
        ));
    }
    let labels = |idx: &[usize]| idx.iter().map(|&i| problem.scenarios.get(i).to_string()).collect();
    Ok(ContinuousSolution {
        kind: problem.kind,
        x_star: opt.x,
        value: opt.value,
        scenario_values: opt.values,
        active: labels(&active_idx),
        determining_set: labels(&determining),
        warnings,
        diagnostics: opt.diagnostics,
    })
}

/// Golden-section solve of a one-dimensional problem.
pub fn solve_1d(problem: &ContinuousProblem) -> Result<ContinuousSolution> {
    if problem.dimension() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "one-dimensional solver given dimension {}",
            problem.dimension()
        )));
    }
    solve_with(problem, Method::GoldenSection)
}

/// Cutting-plane solve for dimension up to [`MAX_DIMENSION`].
pub fn solve_nd(problem: &ContinuousProblem) -> Result<ContinuousSolution> {
    if problem.dimension() > MAX_DIMENSION {
        return Err(Error::InvalidInput(format!(
            "dimension {} exceeds the supported maximum {MAX_DIMENSION}",
            problem.dimension()
        )));
    }
    solve_with(problem, Method::CuttingPlane)
}

/// Dispatches to [`solve_1d`] or [`solve_nd`] by dimension.
pub fn solve(problem: &ContinuousProblem) -> Result<ContinuousSolution> {
    match method_for(problem) {
        Method::GoldenSection => solve_1d(problem),
        Method::CuttingPlane => solve_nd(problem),
    }
}

/// Recomputes the determining set of an existing solution by greedy deletion
/// from its active scenarios.
pub fn determining_set(problem: &ContinuousProblem, solution: &ContinuousSolution) -> Result<Vec<String>> {
    let method = solution.diagnostics.method;
    let transformed = regret_functions(problem)?;
    let pieces: Vec<&dyn Piece> = transformed.iter().map(|f| f as &dyn Piece).collect();
    let start = solution
        .active
        .iter()
        .map(|l| problem.scenarios.position(l).ok_or_else(|| Error::UnknownScenario(l.clone())))
        .collect::<Result<Vec<usize>>>()?;
    let keep = greedy_reduce(start, &solution.x_star, |keep| {
        let sub: Vec<&dyn Piece> = keep.iter().map(|&i| pieces[i]).collect();
        Ok(minimize_pieces(&sub, &problem.lower, &problem.upper, method)?.x)
    })?;
    Ok(keep.iter().map(|&i| problem.scenarios.get(i).to_string()).collect())
}

#[cfg(test)]
mod tests;
