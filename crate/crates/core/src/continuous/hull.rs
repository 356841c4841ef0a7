//! Scenario families that differ only by a shift of the decision variable,
//! and removal of scenarios whose anchor lies inside the hull of the others.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{RegretKind, ScenarioSet};
use crate::simplex::{solve_lp, Constraint, LinearProgram, LpStatus, Relation, Sense};

use super::{regret_functions, ContinuousProblem, ScenarioFunction};

/// `f_i(x) = h(x - a_i) + k·x` for a shared convex shape `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchoredFamily {
    scenarios: ScenarioSet,
    anchors: Vec<Vec<f64>>,
    shape: ScenarioFunction,
    linear: Vec<f64>,
}

impl AnchoredFamily {
    pub fn new<S: Into<String>>(
        scenarios: impl IntoIterator<Item = S>,
        anchors: Vec<Vec<f64>>,
        shape: ScenarioFunction,
        linear: Vec<f64>,
    ) -> Result<Self> {
        let scenarios = ScenarioSet::new(scenarios, "scenario")?;
        shape.validate()?;
        let n = shape.dimension();
        if anchors.len() != scenarios.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} scenarios, {} anchors",
                scenarios.len(),
                anchors.len()
            )));
        }
        if linear.len() != n || anchors.iter().any(|a| a.len() != n) {
            return Err(Error::DimensionMismatch("anchor or cost vector length differs from the shape dimension".into()));
        }
        if anchors.iter().flatten().chain(&linear).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite anchor or cost coefficient".into()));
        }
        Ok(Self { scenarios, anchors, shape, linear })
    }

    pub fn scenarios(&self) -> &ScenarioSet {
        &self.scenarios
    }

    pub fn anchors(&self) -> &[Vec<f64>] {
        &self.anchors
    }

    pub fn dimension(&self) -> usize {
        self.shape.dimension()
    }

    /// The scenario cost functions, realized in the shape's own family.
    pub fn functions(&self) -> Vec<ScenarioFunction> {
        self.anchors.iter().map(|a| self.shape.anchored(a, &self.linear)).collect()
    }

    pub fn problem(&self, lower: Vec<f64>, upper: Vec<f64>, kind: RegretKind) -> Result<ContinuousProblem> {
        ContinuousProblem::new(lower, upper, self.scenarios.iter().map(str::to_string), self.functions(), kind)
    }

    /// The family restricted to the scenarios at `keep`.
    pub fn subset(&self, keep: &[usize]) -> Result<Self> {
        Self::new(
            keep.iter().map(|&i| self.scenarios.get(i).to_string()),
            keep.iter().map(|&i| self.anchors[i].clone()).collect(),
            self.shape.clone(),
            self.linear.clone(),
        )
    }

    /// `h̃(y) = h(y) + k·y - min_y (h(y) + k·y)`, when that minimum has a
    /// closed form. Returns the shape and its minimizer `y0`.
    pub fn shared_regret_shape(&self) -> Option<(ScenarioFunction, Vec<f64>)> {
        let zero = vec![0.0; self.dimension()];
        let tilted = self.shape.anchored(&zero, &self.linear);
        let (y0, m0) = tilted.unconstrained_minimum()?;
        let offset = tilted.offset - m0;
        Some((tilted.with_offset(offset), y0))
    }

    /// Regret functions `R_i(x) = h̃(x - a_i)`, using the shared shape when every
    /// scenario minimizer `y0 + a_i` lies in the box, else per-scenario box minima.
    pub fn regret_functions(&self, lower: &[f64], upper: &[f64]) -> Result<Vec<ScenarioFunction>> {
        let zero = vec![0.0; self.dimension()];
        if let Some((shared, y0)) = self.shared_regret_shape() {
            let inside = self.anchors.iter().all(|a| {
                (0..a.len()).all(|j| {
                    let m = y0[j] + a[j];
                    m >= lower[j] && m <= upper[j]
                })
            });
            if inside {
                return Ok(self.anchors.iter().map(|a| shared.anchored(a, &zero)).collect());
            }
        }
        regret_functions(&self.problem(lower.to_vec(), upper.to_vec(), RegretKind::RegretMin)?)
    }
}

/// Outcome of [`hull_reduce`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullReduction {
    /// Indices of retained scenarios, in declared order.
    pub retained: Vec<usize>,
    pub retained_labels: Vec<String>,
    pub removed_labels: Vec<String>,
}

/// Whether `target` is a convex combination of `points`, by LP feasibility.
fn in_convex_hull(points: &[&[f64]], target: &[f64]) -> Result<bool> {
    if points.is_empty() {
        return Ok(false);
    }
    let n = target.len();
    let mut lp = LinearProgram::new(Sense::Maximize, vec![0.0; points.len()]);
    lp.push(Constraint::new((0..points.len()).map(|i| (i, 1.0)).collect(), Relation::Eq, 1.0));
    for j in 0..n {
        lp.push(Constraint::new(
            points.iter().enumerate().map(|(i, p)| (i, p[j])).collect(),
            Relation::Eq,
            target[j],
        ));
    }
    Ok(solve_lp(&lp)?.status == LpStatus::Optimal)
}

/// Removes, one at a time in declared order, every scenario whose anchor is a
/// convex combination of the anchors still retained. All hull vertices survive.
pub fn hull_reduce(family: &AnchoredFamily) -> Result<HullReduction> {
    let n = family.dimension();
    // Center and scale anchors to unit magnitude so LP tolerances are meaningful.
    let m = family.anchors.len() as f64;
    let centroid: Vec<f64> = (0..n).map(|j| family.anchors.iter().map(|a| a[j]).sum::<f64>() / m).collect();
    let scale = family
        .anchors
        .iter()
        .flat_map(|a| a.iter().zip(&centroid).map(|(v, c)| (v - c).abs()))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let scaled: Vec<Vec<f64>> =
        family.anchors.iter().map(|a| a.iter().zip(&centroid).map(|(v, c)| (v - c) / scale).collect()).collect();
    let mut retained: Vec<usize> = (0..scaled.len()).collect();
    for j in 0..scaled.len() {
        let others: Vec<&[f64]> = retained.iter().filter(|&&i| i != j).map(|&i| scaled[i].as_slice()).collect();
        if in_convex_hull(&others, &scaled[j])? {
            retained.retain(|&i| i != j);
        }
    }
    let label = |i: &usize| family.scenarios.get(*i).to_string();
    Ok(HullReduction {
        retained_labels: retained.iter().map(label).collect(),
        removed_labels: (0..scaled.len()).filter(|i| !retained.contains(i)).map(|i| label(&i)).collect(),
        retained,
    })
}
