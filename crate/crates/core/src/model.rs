//! Scenario and decision universes, cost matrices and the regret transforms.
//!
//! A [`CostMatrix`] holds `C_i(x)` for every scenario `i` (row) and decision
//! `x` (column). Every finite-decision rule in the crate starts from one, after
//! mapping it through [`regret_transform`] with a [`RegretKind`]:
//!
//! ```text
//! COST           f_i(x) = C_i(x)
//! REGRET_MIN     f_i(x) = C_i(x) - min_z C_i(z)
//! REGRET_MEAN    f_i(x) = C_i(x) - mean_z C_i(z)
//! REGRET_MEDIAN  f_i(x) = C_i(x) - median_z C_i(z)
//! ```
//!
//! The median of an even number of values is the mean of the two central
//! order statistics.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered sequence of distinct, non-empty labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelSet(Vec<String>);

impl LabelSet {
    /// Validates uniqueness and non-emptiness. `what` names the set in errors.
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>, what: &'static str) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptySet(what));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self(labels))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }

    fn subset(&self, keep: &[usize]) -> Self {
        Self(keep.iter().map(|&i| self.0[i].clone()).collect())
    }
}

/// Scenario labels; their order fixes row indexing.
pub type ScenarioSet = LabelSet;
/// Decision labels; their order fixes column indexing and tie-breaking.
pub type DecisionSet = LabelSet;

/// The transform applied to each scenario row before a minimax rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegretKind {
    Cost,
    RegretMin,
    RegretMean,
    RegretMedian,
}

impl RegretKind {
    pub const ALL: [RegretKind; 4] = [
        RegretKind::Cost,
        RegretKind::RegretMin,
        RegretKind::RegretMean,
        RegretKind::RegretMedian,
    ];

    /// The reference level subtracted from a scenario's costs, or `None` for [`RegretKind::Cost`].
    pub fn reference(self, row: &[f64]) -> Option<f64> {
        match self {
            RegretKind::Cost => None,
            RegretKind::RegretMin => Some(row.iter().copied().fold(f64::INFINITY, f64::min)),
            RegretKind::RegretMean => Some(row.iter().sum::<f64>() / row.len() as f64),
            RegretKind::RegretMedian => Some(median(row)),
        }
    }
}

impl fmt::Display for RegretKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegretKind::Cost => "COST",
            RegretKind::RegretMin => "REGRET_MIN",
            RegretKind::RegretMean => "REGRET_MEAN",
            RegretKind::RegretMedian => "REGRET_MEDIAN",
        })
    }
}

/// Median with the even-length convention of averaging the two central values.
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// A scenarios × decisions table of finite costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    scenarios: ScenarioSet,
    decisions: DecisionSet,
    /// Row-major, one row per scenario.
    costs: Vec<Vec<f64>>,
}

impl CostMatrix {
    pub fn new(scenarios: ScenarioSet, decisions: DecisionSet, costs: Vec<Vec<f64>>) -> Result<Self> {
        if costs.len() != scenarios.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} scenario labels but {} rows",
                scenarios.len(),
                costs.len()
            )));
        }
        for (r, row) in costs.iter().enumerate() {
            if row.len() != decisions.len() {
                return Err(Error::DimensionMismatch(format!(
                    "row `{}` has {} entries, expected {}",
                    scenarios.get(r),
                    row.len(),
                    decisions.len()
                )));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteEntry { row: r, col: c });
            }
        }
        Ok(Self { scenarios, decisions, costs })
    }

    pub fn scenarios(&self) -> &ScenarioSet {
        &self.scenarios
    }

    pub fn decisions(&self) -> &DecisionSet {
        &self.decisions
    }

    pub fn n_scenarios(&self) -> usize {
        self.scenarios.len()
    }

    pub fn n_decisions(&self) -> usize {
        self.decisions.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.costs
    }

    pub fn row(&self, scenario: usize) -> &[f64] {
        &self.costs[scenario]
    }

    pub fn get(&self, scenario: usize, decision: usize) -> f64 {
        self.costs[scenario][decision]
    }

    pub fn column(&self, decision: usize) -> Vec<f64> {
        self.costs.iter().map(|row| row[decision]).collect()
    }

    /// Cost by labels.
    pub fn cost(&self, scenario: &str, decision: &str) -> Result<f64> {
        let i = self.scenario_index(scenario)?;
        let j = self.decision_index(decision)?;
        Ok(self.costs[i][j])
    }

    pub fn scenario_index(&self, label: &str) -> Result<usize> {
        self.scenarios
            .position(label)
            .ok_or_else(|| Error::UnknownScenario(label.to_string()))
    }

    pub fn decision_index(&self, label: &str) -> Result<usize> {
        self.decisions
            .position(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Keeps the given decision columns, in the given order.
    pub fn select_decisions(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptySet("decision"));
        }
        let decisions = self.decisions.subset(keep);
        let costs = self
            .costs
            .iter()
            .map(|row| keep.iter().map(|&j| row[j]).collect())
            .collect();
        Ok(Self { scenarios: self.scenarios.clone(), decisions, costs })
    }

    /// Keeps the given scenario rows, in the given order.
    pub fn select_scenarios(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyScenarioSet);
        }
        let scenarios = self.scenarios.subset(keep);
        let costs = keep.iter().map(|&i| self.costs[i].clone()).collect();
        Ok(Self { scenarios, decisions: self.decisions.clone(), costs })
    }

    pub fn without_decision(&self, label: &str) -> Result<Self> {
        let drop = self.decision_index(label)?;
        let keep: Vec<usize> = (0..self.n_decisions()).filter(|&j| j != drop).collect();
        self.select_decisions(&keep)
    }

    pub fn without_scenario(&self, label: &str) -> Result<Self> {
        let drop = self.scenario_index(label)?;
        let keep: Vec<usize> = (0..self.n_scenarios()).filter(|&i| i != drop).collect();
        self.select_scenarios(&keep)
    }

    /// Appends a decision column.
    pub fn with_decision(&self, label: &str, column: &[f64]) -> Result<Self> {
        if column.len() != self.n_scenarios() {
            return Err(Error::DimensionMismatch(format!(
                "new column has {} entries, expected {}",
                column.len(),
                self.n_scenarios()
            )));
        }
        let mut labels = self.decisions.as_slice().to_vec();
        labels.push(label.to_string());
        let decisions = LabelSet::new(labels, "decision")?;
        let costs = self
            .costs
            .iter()
            .zip(column)
            .map(|(row, &c)| {
                let mut row = row.clone();
                row.push(c);
                row
            })
            .collect();
        Self::new(self.scenarios.clone(), decisions, costs)
    }

    /// Applies `f` to every entry; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let costs = self
            .costs
            .iter()
            .map(|row| row.iter().map(|&v| f(v)).collect())
            .collect();
        Self::new(self.scenarios.clone(), self.decisions.clone(), costs)
    }
}

/// Builds and validates a cost matrix from raw labels and rows.
pub fn build_cost_matrix<S, D>(
    scenario_names: impl IntoIterator<Item = S>,
    decision_names: impl IntoIterator<Item = D>,
    rows: Vec<Vec<f64>>,
) -> Result<CostMatrix>
where
    S: Into<String>,
    D: Into<String>,
{
    let scenarios = LabelSet::new(scenario_names, "scenario")?;
    let decisions = LabelSet::new(decision_names, "decision")?;
    CostMatrix::new(scenarios, decisions, rows)
}

/// The transformed values `f_i(x)` for one [`RegretKind`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretMatrix {
    kind: RegretKind,
    scenarios: ScenarioSet,
    decisions: DecisionSet,
    values: Vec<Vec<f64>>,
}

impl RegretMatrix {
    pub fn kind(&self) -> RegretKind {
        self.kind
    }

    pub fn scenarios(&self) -> &ScenarioSet {
        &self.scenarios
    }

    pub fn decisions(&self) -> &DecisionSet {
        &self.decisions
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn row(&self, scenario: usize) -> &[f64] {
        &self.values[scenario]
    }

    pub fn get(&self, scenario: usize, decision: usize) -> f64 {
        self.values[scenario][decision]
    }

    pub fn column(&self, decision: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[decision]).collect()
    }

    /// Worst case over scenarios for every decision.
    pub fn column_maxima(&self) -> Vec<f64> {
        (0..self.decisions.len())
            .map(|j| {
                self.values
                    .iter()
                    .map(|row| row[j])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }
}

/// Subtracts the kind's per-scenario reference level from every row.
pub fn regret_transform(costs: &CostMatrix, kind: RegretKind) -> RegretMatrix {
    let values = costs
        .rows()
        .iter()
        .map(|row| match kind.reference(row) {
            None => row.clone(),
            Some(r) => row.iter().map(|&c| c - r).collect(),
        })
        .collect();
    RegretMatrix {
        kind,
        scenarios: costs.scenarios().clone(),
        decisions: costs.decisions().clone(),
        values,
    }
}
