//! Robust decisions over a polytope of scenario probabilities.
//!
//! The ambiguity set is `{p : A p ≤ 0, p ≥ 0, Σ p = 1}`; each row of `A` is
//! stored sparsely by scenario. For a fixed decision the worst-case expected
//! transformed cost is the linear program
//!
//! ```text
//! maximize  Σ_i p_i f_i   subject to  A p ≤ 0,  Σ p_i = 1,  p ≥ 0
//! ```
//!
//! whose dual is `minimize w` subject to `w + (Aᵀq)_i ≥ f_i`, `q ≥ 0`. When
//! no row couples two groups of scenarios the polytope is block diagonal and
//! the inner value is the largest of the per-block values.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite::{selection_from_scores, tied, Selection};
use crate::model::{regret_transform, CostMatrix, RegretKind, ScenarioSet};
use crate::simplex::{solve_lp, Constraint, LinearProgram, LpStatus, Relation, Sense};

/// Relative tolerance for treating two LP values as tied.
pub const LP_TIE_TOLERANCE: f64 = 1e-9;

fn lp_tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= LP_TIE_TOLERANCE * (1.0 + a.abs().max(b.abs()))
}

/// `{p : A p ≤ 0, p ≥ 0, Σ p = 1}` over a fixed scenario order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityPolytope {
    scenarios: ScenarioSet,
    /// Each row is a list of `(scenario index, coefficient)` meaning `Σ coeff·p ≤ 0`.
    rows: Vec<Vec<(usize, f64)>>,
}

impl ProbabilityPolytope {
    /// The whole probability simplex.
    pub fn unconstrained(scenarios: ScenarioSet) -> Self {
        Self { scenarios, rows: Vec::new() }
    }

    /// Rows given as `(scenario label, coefficient)` lists.
    pub fn from_labeled_rows<S: AsRef<str>>(
        scenarios: ScenarioSet,
        rows: impl IntoIterator<Item = Vec<(S, f64)>>,
    ) -> Result<Self> {
        let mut poly = Self::unconstrained(scenarios);
        for row in rows {
            poly.push_row(row)?;
        }
        Ok(poly)
    }

    /// Appends one row `Σ coeff·p ≤ 0`. Repeated scenarios are summed.
    pub fn push_row<S: AsRef<str>>(&mut self, row: Vec<(S, f64)>) -> Result<()> {
        let mut sparse: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (label, coeff) in row {
            let label = label.as_ref();
            let i = self
                .scenarios
                .position(label)
                .ok_or_else(|| Error::UnknownScenario(label.to_string()))?;
            if !coeff.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient for `{label}`")));
            }
            match sparse.iter_mut().find(|(j, _)| *j == i) {
                Some((_, c)) => *c += coeff,
                None => sparse.push((i, coeff)),
            }
        }
        sparse.sort_by_key(|(i, _)| *i);
        self.rows.push(sparse);
        Ok(())
    }

    /// Pins `p_a = ratio · p_b` with the pair `p_a - ratio·p_b ≤ 0`, `ratio·p_b - p_a ≤ 0`.
    pub fn pin_ratio(&mut self, a: &str, b: &str, ratio: f64) -> Result<()> {
        self.push_row(vec![(a, 1.0), (b, -ratio)])?;
        self.push_row(vec![(b, ratio), (a, -1.0)])
    }

    /// Requires `p_low ≤ p_high`.
    pub fn order(&mut self, low: &str, high: &str) -> Result<()> {
        self.push_row(vec![(low, 1.0), (high, -1.0)])
    }

    pub fn scenarios(&self) -> &ScenarioSet {
        &self.scenarios
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Scenario indices with a non-zero coefficient in `row`.
    fn support(row: &[(usize, f64)]) -> impl Iterator<Item = usize> + '_ {
        row.iter().filter(|(_, c)| *c != 0.0).map(|(i, _)| *i)
    }

    /// The polytope over a subset of scenarios, keeping rows whose support lies
    /// inside it. Rows straddling the subset boundary are rejected.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let scenarios = ScenarioSet::new(keep.iter().map(|&i| self.scenarios.get(i).to_string()), "scenario")?;
        let local = |i: usize| keep.iter().position(|&k| k == i);
        let mut rows = Vec::new();
        for row in &self.rows {
            let inside = Self::support(row).filter(|&i| local(i).is_some()).count();
            let total = Self::support(row).count();
            if inside == 0 {
                continue;
            }
            if inside != total {
                return Err(Error::InvalidInput(
                    "constraint row couples scenarios across the requested subset".into(),
                ));
            }
            rows.push(
                row.iter()
                    .filter(|(_, c)| *c != 0.0)
                    .map(|&(i, c)| (local(i).expect("inside"), c))
                    .collect(),
            );
        }
        Ok(Self { scenarios, rows })
    }
}

/// Dual variables of the inner problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualCertificate {
    /// Multiplier of `Σ p = 1`; equals the optimal value.
    pub w: f64,
    /// Non-negative multipliers of the rows of `A`.
    pub q: Vec<f64>,
}

impl DualCertificate {
    /// Largest violation of `w + (Aᵀq)_i ≥ f_i`.
    pub fn max_violation(&self, values: &[f64], polytope: &ProbabilityPolytope) -> f64 {
        let mut lhs = vec![self.w; values.len()];
        for (row, q) in polytope.rows.iter().zip(&self.q) {
            for &(i, c) in row {
                lhs[i] += c * q;
            }
        }
        let neg_q = self.q.iter().map(|q| (-q).max(0.0)).fold(0.0, f64::max);
        lhs.iter()
            .zip(values)
            .map(|(l, f)| f - l)
            .fold(neg_q, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnerMax {
    pub status: LpStatus,
    pub objective: f64,
    /// Worst-case probabilities; for an unconstrained polytope a unit mass on
    /// the first maximizing scenario.
    pub probabilities: Vec<f64>,
    pub certificate: Option<DualCertificate>,
    /// `|primal − dual|` objective gap.
    pub duality_gap: f64,
}

fn inner_program(values: &[f64], polytope: &ProbabilityPolytope) -> LinearProgram {
    let mut lp = LinearProgram::new(Sense::Maximize, values.to_vec());
    for row in &polytope.rows {
        lp.push(Constraint::new(row.clone(), Relation::Le, 0.0));
    }
    lp.push(Constraint::dense(&vec![1.0; values.len()], Relation::Eq, 1.0));
    lp
}

/// Worst-case expectation of `values` over the polytope.
pub fn inner_max(values: &[f64], polytope: &ProbabilityPolytope) -> Result<InnerMax> {
    if values.len() != polytope.scenarios.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for {} scenarios",
            values.len(),
            polytope.scenarios.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite scenario value".into()));
    }
    let lp = inner_program(values, polytope);
    let sol = solve_lp(&lp)?;
    if !sol.is_optimal() {
        return Ok(InnerMax {
            status: sol.status,
            objective: f64::NAN,
            probabilities: sol.primal,
            certificate: None,
            duality_gap: f64::NAN,
        });
    }
    let m = polytope.rows.len();
    let certificate = DualCertificate { w: sol.duals[m], q: sol.duals[..m].iter().map(|q| q.max(0.0)).collect() };
    let duality_gap = (sol.objective - lp.dual_objective(&sol.duals)).abs();
    Ok(InnerMax {
        status: sol.status,
        objective: sol.objective,
        probabilities: sol.primal,
        certificate: Some(certificate),
        duality_gap,
    })
}

/// The dual solution `(w, q)` of the inner problem.
pub fn dual_certificate(values: &[f64], polytope: &ProbabilityPolytope) -> Result<DualCertificate> {
    let inner = inner_max(values, polytope)?;
    match inner.status {
        LpStatus::Optimal => Ok(inner.certificate.expect("optimal solutions carry duals")),
        LpStatus::Infeasible => Err(Error::Infeasible),
        LpStatus::Unbounded => Err(Error::Unbounded),
    }
}

/// Solves `min_x max_{p∈P} Σ p_i f_i(x)` over the decision columns.
///
/// With an unconstrained polytope this coincides with the plain minimax rule.
/// Active scenarios are the support of the chosen decision's worst-case `p`.
pub fn robust_select_finite(
    costs: &CostMatrix,
    kind: RegretKind,
    polytope: &ProbabilityPolytope,
) -> Result<Selection> {
    if costs.scenarios() != polytope.scenarios() {
        return Err(Error::DimensionMismatch(
            "polytope scenarios differ from the cost matrix scenarios".into(),
        ));
    }
    let regrets = regret_transform(costs, kind);
    let mut scores = Vec::with_capacity(costs.n_decisions());
    let mut worst_p = Vec::with_capacity(costs.n_decisions());
    for j in 0..costs.n_decisions() {
        let inner = inner_max(&regrets.column(j), polytope)?;
        match inner.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::Infeasible),
            LpStatus::Unbounded => return Err(Error::Unbounded),
        }
        scores.push(inner.objective);
        worst_p.push(inner.probabilities);
    }
    let tie: fn(f64, f64) -> bool = if polytope.n_rows() == 0 { tied } else { lp_tied };
    Ok(selection_from_scores(
        &regrets,
        &scores,
        |j| (0..costs.n_scenarios()).filter(|&i| worst_p[j][i] > 1e-12).collect(),
        tie,
    ))
}

/// Connected components of scenarios linked by shared constraint rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockStructure {
    /// Scenario indices per component, each sorted; components ordered by first scenario.
    pub components: Vec<Vec<usize>>,
    pub labels: Vec<Vec<String>>,
}

impl BlockStructure {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller index as root so roots identify first scenarios.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

pub fn block_structure(polytope: &ProbabilityPolytope) -> BlockStructure {
    let n = polytope.scenarios.len();
    let mut sets = DisjointSets::new(n);
    for row in &polytope.rows {
        let mut support = ProbabilityPolytope::support(row);
        if let Some(first) = support.next() {
            for other in support {
                sets.union(first, other);
            }
        }
    }
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = sets.find(i);
        if slot[root] == usize::MAX {
            slot[root] = components.len();
            components.push(Vec::new());
        }
        components[slot[root]].push(i);
    }
    let labels = components
        .iter()
        .map(|c| c.iter().map(|&i| polytope.scenarios.get(i).to_string()).collect())
        .collect();
    BlockStructure { components, labels }
}

/// Optimal value `g_j` of the inner problem restricted to one block, with
/// `values` and `polytope` already restricted to that block.
pub fn component_value(values: &[f64], polytope: &ProbabilityPolytope) -> Result<f64> {
    let inner = inner_max(values, polytope)?;
    match inner.status {
        LpStatus::Optimal => Ok(inner.objective),
        LpStatus::Infeasible => Err(Error::Infeasible),
        LpStatus::Unbounded => Err(Error::Unbounded),
    }
}

/// `max_j g_j` over the blocks of `polytope`.
pub fn block_inner_max(values: &[f64], polytope: &ProbabilityPolytope) -> Result<f64> {
    let blocks = block_structure(polytope);
    let mut best = f64::NEG_INFINITY;
    for comp in &blocks.components {
        let local: Vec<f64> = comp.iter().map(|&i| values[i]).collect();
        best = best.max(component_value(&local, &polytope.restrict(comp)?)?);
    }
    Ok(best)
}
