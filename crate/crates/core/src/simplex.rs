//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Sized for desk-scale problems (a few hundred rows and columns). All
//! variables are non-negative; callers shift or split anything else. The
//! pivot order is fully deterministic: the entering column is the lowest
//! index with an improving reduced cost, and ratio-test ties go to the
//! basic variable with the lowest index.
//!
//! Row duals are reported as shadow prices, i.e. the derivative of the
//! optimal objective with respect to each right-hand side, in the sense of
//! the caller's [`Sense`].

use serde::Serialize;

use crate::error::{Error, Result};

/// Reduced-cost and feasibility tolerance.
pub const TOLERANCE: f64 = 1e-9;
/// Pivots smaller than this in magnitude are never taken.
const PIVOT_TOLERANCE: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// One linear row `Σ coeff·x  (≤ | = | ≥)  rhs`, stored sparsely.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Self { coeffs, relation, rhs }
    }

    pub fn dense(coeffs: &[f64], relation: Relation, rhs: f64) -> Self {
        let coeffs = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, &c)| (j, c))
            .collect();
        Self { coeffs, relation, rhs }
    }

    fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, c)| c * x[j]).sum()
    }
}

/// A linear program over non-negative variables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        Self { sense, objective, constraints: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push(&mut self, constraint: Constraint) {
        self.constraints.push(constraint);
    }

    pub fn with(mut self, constraint: Constraint) -> Self {
        self.push(constraint);
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite objective coefficient".into()));
        }
        for (r, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite right-hand side in row {r}")));
            }
            for &(j, c) in &row.coeffs {
                if j >= n {
                    return Err(Error::InvalidInput(format!("row {r} references variable {j} of {n}")));
                }
                if !c.is_finite() {
                    return Err(Error::InvalidInput(format!("non-finite coefficient in row {r}")));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of any row or sign bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
        for row in &self.constraints {
            let lhs = row.activity(x);
            let v = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    /// `rhs · duals`, the dual objective for a given set of row duals.
    pub fn dual_objective(&self, duals: &[f64]) -> f64 {
        self.constraints.iter().zip(duals).map(|(r, y)| r.rhs * y).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective at `primal`; meaningful only when optimal.
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Shadow price of every row; empty unless optimal.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn without_optimum(status: LpStatus, n: usize, pivots: usize) -> Self {
        Self {
            status,
            objective: f64::NAN,
            primal: vec![0.0; n],
            duals: Vec::new(),
            pivots,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Structural,
    Slack,
    Artificial,
}

/// Dense tableau `T x = b` with an explicit basis.
struct Tableau {
    m: usize,
    width: usize,
    t: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColumnKind>,
    pivots: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn pivot(&mut self, row: usize, col: usize) -> Result<()> {
        let w = self.width;
        let p = self.t[row * w + col];
        if p.abs() < PIVOT_TOLERANCE {
            return Err(Error::NumericFailure(format!("pivot {p:e} below tolerance")));
        }
        self.pivots += 1;
        if self.pivots > MAX_PIVOTS {
            return Err(Error::NumericFailure(format!("no convergence after {MAX_PIVOTS} pivots")));
        }
        for j in 0..w {
            self.t[row * w + j] /= p;
        }
        self.b[row] /= p;
        self.t[row * w + col] = 1.0;
        let (pivot_row, pivot_b) = (self.t[row * w..(row + 1) * w].to_vec(), self.b[row]);
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let factor = self.t[i * w + col];
            if factor == 0.0 {
                continue;
            }
            let dst = &mut self.t[i * w..(i + 1) * w];
            for (d, s) in dst.iter_mut().zip(&pivot_row) {
                *d -= factor * s;
            }
            dst[col] = 0.0;
            self.b[i] -= factor * pivot_b;
            if self.b[i].abs() < 1e-14 {
                self.b[i] = 0.0;
            }
        }
        self.basis[row] = col;
        Ok(())
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, &bcol) in self.basis.iter().enumerate() {
            let cb = cost[bcol];
            if cb == 0.0 {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                *dj -= cb * self.at(i, j);
            }
        }
        d
    }

    /// Maximizes `cost · x` from the current feasible basis.
    fn optimize(&mut self, cost: &[f64], allow_artificial: bool) -> Result<PhaseOutcome> {
        loop {
            let d = self.reduced_costs(cost);
            let entering = (0..self.width).find(|&j| {
                d[j] > TOLERANCE
                    && (allow_artificial || self.kinds[j] != ColumnKind::Artificial)
                    && !self.basis.contains(&j)
            });
            let Some(col) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, col);
                if a <= TOLERANCE {
                    continue;
                }
                let ratio = self.b[i] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if ratio < best && !tie || tie && self.basis[i] < self.basis[r] {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            match leave {
                None => return Ok(PhaseOutcome::Unbounded),
                Some((row, _)) => self.pivot(row, col)?,
            }
        }
    }
}

/// Solves `lp` with the two-phase method.
///
/// Infeasibility and unboundedness are reported through [`LpStatus`]; only
/// invalid input and numerical breakdown are errors.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.n_vars();
    let m = lp.constraints.len();

    // Normalize to non-negative right-hand sides.
    let mut sign = vec![1.0; m];
    let mut relations = Vec::with_capacity(m);
    for (i, row) in lp.constraints.iter().enumerate() {
        let flip = row.rhs < 0.0;
        sign[i] = if flip { -1.0 } else { 1.0 };
        relations.push(match (row.relation, flip) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => r,
        });
    }

    // Column layout: structural | one slack or surplus per inequality | artificials.
    let n_slack = relations.iter().filter(|r| **r != Relation::Eq).count();
    let n_art = relations.iter().filter(|r| **r != Relation::Le).count();
    let width = n + n_slack + n_art;
    let mut kinds = vec![ColumnKind::Structural; n];
    kinds.extend(std::iter::repeat_n(ColumnKind::Slack, n_slack));
    kinds.extend(std::iter::repeat_n(ColumnKind::Artificial, n_art));

    let mut t = vec![0.0; m * width];
    let mut b = vec![0.0; m];
    let mut basis = vec![0; m];
    // Column that held the identity for each row initially; its final image is B^{-1} e_i.
    let mut identity_col = vec![0; m];
    let (mut next_slack, mut next_art) = (n, n + n_slack);
    for (i, row) in lp.constraints.iter().enumerate() {
        for &(j, c) in &row.coeffs {
            t[i * width + j] += sign[i] * c;
        }
        b[i] = sign[i] * row.rhs;
        match relations[i] {
            Relation::Le => {
                t[i * width + next_slack] = 1.0;
                basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                t[i * width + next_slack] = -1.0;
                next_slack += 1;
                t[i * width + next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                t[i * width + next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
        identity_col[i] = basis[i];
    }

    let mut tab = Tableau { m, width, t, b, basis, kinds, pivots: 0 };

    if n_art > 0 {
        let phase1: Vec<f64> = tab
            .kinds
            .iter()
            .map(|k| if *k == ColumnKind::Artificial { -1.0 } else { 0.0 })
            .collect();
        tab.optimize(&phase1, true)?;
        let infeasibility: f64 = (0..m)
            .filter(|&i| tab.kinds[tab.basis[i]] == ColumnKind::Artificial)
            .map(|i| tab.b[i])
            .sum();
        let scale = 1.0 + lp.constraints.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if infeasibility > TOLERANCE * scale {
            return Ok(LpSolution::without_optimum(LpStatus::Infeasible, n, tab.pivots));
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if tab.kinds[tab.basis[i]] != ColumnKind::Artificial {
                continue;
            }
            let replacement = (0..width).find(|&j| {
                tab.kinds[j] != ColumnKind::Artificial
                    && !tab.basis.contains(&j)
                    && tab.at(i, j).abs() > TOLERANCE
            });
            if let Some(j) = replacement {
                tab.pivot(i, j)?;
            }
            // Otherwise the row is redundant and the artificial stays basic at zero.
        }
    }

    let direction = match lp.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut cost = vec![0.0; width];
    for (j, &c) in lp.objective.iter().enumerate() {
        cost[j] = direction * c;
    }
    if let PhaseOutcome::Unbounded = tab.optimize(&cost, false)? {
        return Ok(LpSolution::without_optimum(LpStatus::Unbounded, n, tab.pivots));
    }

    let mut primal = vec![0.0; n];
    for (i, &col) in tab.basis.iter().enumerate() {
        if col < n {
            primal[col] = tab.b[i].max(0.0);
        }
    }
    let objective = lp.objective.iter().zip(&primal).map(|(c, x)| c * x).sum();
    let duals = (0..m)
        .map(|r| {
            let y: f64 = (0..m).map(|i| cost[tab.basis[i]] * tab.at(i, identity_col[r])).sum();
            direction * sign[r] * y
        })
        .collect();

    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective,
        primal,
        duals,
        pivots: tab.pivots,
    })
}
