//! Project portfolios: decisions over `{0,1}^n` with additive costs.
//!
//! Selecting the subset `T` of projects in scenario `i` costs
//! `C_i(T) = Σ_{k∈T} c_i(k) + W_i`. Subsets are enumerated in rank order
//! (cardinality first, then lexicographic by project order), which is also
//! the tie-break order: when indifferent, do less.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite::{minimax_select, Selection};
use crate::model::{build_cost_matrix, CostMatrix, LabelSet, RegretKind, ScenarioSet};

/// Enumeration bound: at most `2^20` subsets.
pub const MAX_PROJECTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditiveProjectInstance {
    projects: Vec<String>,
    scenarios: ScenarioSet,
    /// `incremental[i][k]`: cost of project `k` in scenario `i`.
    incremental: Vec<Vec<f64>>,
    base: Vec<f64>,
}

impl AdditiveProjectInstance {
    /// `base` defaults to zero in every scenario.
    pub fn new<P: Into<String>, S: Into<String>>(
        projects: impl IntoIterator<Item = P>,
        scenarios: impl IntoIterator<Item = S>,
        incremental: Vec<Vec<f64>>,
        base: Option<Vec<f64>>,
    ) -> Result<Self> {
        let projects: Vec<String> = projects.into_iter().map(Into::into).collect();
        if projects.len() > MAX_PROJECTS {
            return Err(Error::TooManyProjects(projects.len()));
        }
        if !projects.is_empty() {
            LabelSet::new(projects.clone(), "project")?;
        }
        let scenarios = LabelSet::new(scenarios, "scenario")?;
        if incremental.len() != scenarios.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} scenarios but {} cost rows",
                scenarios.len(),
                incremental.len()
            )));
        }
        for (i, row) in incremental.iter().enumerate() {
            if row.len() != projects.len() {
                return Err(Error::DimensionMismatch(format!(
                    "scenario `{}` has {} project costs, expected {}",
                    scenarios.get(i),
                    row.len(),
                    projects.len()
                )));
            }
            if let Some(k) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteEntry { row: i, col: k });
            }
        }
        let base = base.unwrap_or_else(|| vec![0.0; scenarios.len()]);
        if base.len() != scenarios.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} base costs for {} scenarios",
                base.len(),
                scenarios.len()
            )));
        }
        if let Some(i) = base.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry { row: i, col: projects.len() });
        }
        Ok(Self { projects, scenarios, incremental, base })
    }

    pub fn projects(&self) -> &[String] {
        &self.projects
    }

    pub fn scenarios(&self) -> &ScenarioSet {
        &self.scenarios
    }

    pub fn incremental(&self) -> &[Vec<f64>] {
        &self.incremental
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn with_base(&self, base: Vec<f64>) -> Result<Self> {
        Self::new(
            self.projects.clone(),
            self.scenarios.as_slice().to_vec(),
            self.incremental.clone(),
            Some(base),
        )
    }

    pub fn without_project(&self, label: &str) -> Result<Self> {
        let k = self
            .projects
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        let mut projects = self.projects.clone();
        projects.remove(k);
        let incremental = self
            .incremental
            .iter()
            .map(|row| {
                let mut row = row.clone();
                row.remove(k);
                row
            })
            .collect();
        Self::new(projects, self.scenarios.as_slice().to_vec(), incremental, Some(self.base.clone()))
    }

    pub fn without_scenario(&self, label: &str) -> Result<Self> {
        let i = self
            .scenarios
            .position(label)
            .ok_or_else(|| Error::UnknownScenario(label.to_string()))?;
        if self.scenarios.len() == 1 {
            return Err(Error::EmptyScenarioSet);
        }
        let keep = |v: &[Vec<f64>]| -> Vec<Vec<f64>> {
            v.iter().enumerate().filter(|(r, _)| *r != i).map(|(_, row)| row.clone()).collect()
        };
        let scenarios: Vec<String> = self.scenarios.iter().filter(|s| *s != label).map(String::from).collect();
        let base = self.base.iter().enumerate().filter(|(r, _)| *r != i).map(|(_, b)| *b).collect();
        Self::new(self.projects.clone(), scenarios, keep(&self.incremental), Some(base))
    }

    /// Cost of the subset encoded by `mask` (bit `k` set ⇔ project `k` selected).
    pub fn subset_cost(&self, scenario: usize, mask: u32) -> f64 {
        let row = &self.incremental[scenario];
        let mut total = 0.0;
        for (k, c) in row.iter().enumerate() {
            if mask >> k & 1 == 1 {
                total += c;
            }
        }
        total + self.base[scenario]
    }

    pub fn subset_label(&self, mask: u32) -> String {
        subset_label(&self.projects, mask)
    }

    pub fn subset_members(&self, mask: u32) -> Vec<String> {
        (0..self.projects.len())
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| self.projects[k].clone())
            .collect()
    }
}

/// `{}` for the empty subset, otherwise `{X,Y}` in project order.
pub fn subset_label(projects: &[String], mask: u32) -> String {
    let members: Vec<&str> = (0..projects.len())
        .filter(|k| mask >> k & 1 == 1)
        .map(|k| projects[k].as_str())
        .collect();
    format!("{{{}}}", members.join(","))
}

/// All subset masks of `n` projects in rank order.
pub fn subsets_in_rank_order(n: usize) -> Vec<u32> {
    let mut masks: Vec<u32> = (0..1u32 << n).collect();
    masks.sort_by_key(|&m| (m.count_ones(), std::cmp::Reverse(reversed_bits(m, n))));
    masks
}

/// Among equal-size subsets, the one containing the lowest differing project
/// sorts first, so ordering by descending bit-reversed mask yields
/// `{X,Y} < {X,Z} < {Y,Z}`.
fn reversed_bits(mask: u32, n: usize) -> u32 {
    if n == 0 {
        0
    } else {
        mask.reverse_bits() >> (32 - n)
    }
}

/// The `|S| × 2^n` cost matrix over all subsets, columns in rank order.
pub fn induced_cost_matrix(instance: &AdditiveProjectInstance) -> Result<CostMatrix> {
    let n = instance.projects.len();
    if n > MAX_PROJECTS {
        return Err(Error::TooManyProjects(n));
    }
    let masks = subsets_in_rank_order(n);
    let labels: Vec<String> = masks.iter().map(|&m| instance.subset_label(m)).collect();
    let rows = (0..instance.scenarios.len())
        .map(|i| masks.par_iter().map(|&m| instance.subset_cost(i, m)).collect())
        .collect();
    build_cost_matrix(instance.scenarios.as_slice().to_vec(), labels, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetSelection {
    /// Selected projects in project order.
    pub chosen: Vec<String>,
    pub chosen_label: String,
    pub value: f64,
    pub argmin: Vec<String>,
    pub active_scenarios: Vec<String>,
    pub tie_break: String,
}

impl SubsetSelection {
    fn from_selection(instance: &AdditiveProjectInstance, masks: &[u32], sel: Selection) -> Self {
        let mask = masks[sel.chosen_index];
        Self {
            chosen: instance.subset_members(mask),
            chosen_label: sel.chosen,
            value: sel.value,
            argmin: sel.argmin_set,
            active_scenarios: sel.active_scenarios,
            tie_break: sel.tie_break,
        }
    }
}

/// Minimax rule over every subset of projects.
pub fn select_projects(instance: &AdditiveProjectInstance, kind: RegretKind) -> Result<SubsetSelection> {
    let matrix = induced_cost_matrix(instance)?;
    let masks = subsets_in_rank_order(instance.projects.len());
    Ok(SubsetSelection::from_selection(instance, &masks, minimax_select(&matrix, kind)))
}

/// Worst-case mean regret of `subset` from the closed form
/// `Σ_{k∈T} c_i(k) - ½ Σ_k c_i(k)`.
///
/// Costs over subsets are symmetric about the half-sum, so this is also the
/// median regret.
pub fn mean_regret_additive(instance: &AdditiveProjectInstance, subset: &[&str]) -> Result<f64> {
    let mask = subset_mask(instance, subset)?;
    Ok((0..instance.scenarios.len())
        .map(|i| {
            let row = &instance.incremental[i];
            let half: f64 = row.iter().sum::<f64>() / 2.0;
            let chosen: f64 = (0..row.len()).filter(|k| mask >> k & 1 == 1).map(|k| row[k]).sum();
            chosen - half
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Per-scenario closed-form mean regrets of `subset`.
pub fn mean_regret_profile(instance: &AdditiveProjectInstance, subset: &[&str]) -> Result<Vec<f64>> {
    let mask = subset_mask(instance, subset)?;
    Ok(instance
        .incremental
        .iter()
        .map(|row| {
            let half: f64 = row.iter().sum::<f64>() / 2.0;
            (0..row.len()).filter(|k| mask >> k & 1 == 1).map(|k| row[k]).sum::<f64>() - half
        })
        .collect())
}

pub fn subset_mask(instance: &AdditiveProjectInstance, subset: &[&str]) -> Result<u32> {
    let mut mask = 0u32;
    for name in subset {
        let k = instance
            .projects
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))?;
        mask |= 1 << k;
    }
    Ok(mask)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectIiaFinding {
    pub dropped: String,
    pub old_subset: Vec<String>,
    pub new_subset: Vec<String>,
    pub old_value: f64,
    pub new_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectIiaReport {
    pub baseline: SubsetSelection,
    pub findings: Vec<ProjectIiaFinding>,
}

/// Drops each unselected project in turn and records changed selections.
pub fn project_iia_probe(instance: &AdditiveProjectInstance, kind: RegretKind) -> Result<ProjectIiaReport> {
    let baseline = select_projects(instance, kind)?;
    let mut findings = Vec::new();
    for project in &instance.projects {
        if baseline.chosen.contains(project) {
            continue;
        }
        let reduced = select_projects(&instance.without_project(project)?, kind)?;
        if reduced.chosen != baseline.chosen {
            findings.push(ProjectIiaFinding {
                dropped: project.clone(),
                old_subset: baseline.chosen.clone(),
                new_subset: reduced.chosen,
                old_value: baseline.value,
                new_value: reduced.value,
            });
        }
    }
    Ok(ProjectIiaReport { baseline, findings })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioDropOutcome {
    pub dropped: String,
    pub new_subset: Vec<String>,
    pub value: f64,
    pub essential: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssentialScenarios {
    pub baseline: SubsetSelection,
    pub outcomes: Vec<ScenarioDropOutcome>,
    pub essential_count: usize,
}

/// Re-selects with each scenario removed; a scenario is essential when its
/// removal changes the chosen subset.
pub fn essential_scenarios(instance: &AdditiveProjectInstance, kind: RegretKind) -> Result<EssentialScenarios> {
    if instance.scenarios.len() == 1 {
        return Err(Error::EmptyScenarioSet);
    }
    let baseline = select_projects(instance, kind)?;
    let outcomes: Vec<ScenarioDropOutcome> = instance
        .scenarios
        .iter()
        .map(|s| {
            let sel = select_projects(&instance.without_scenario(s)?, kind)?;
            Ok(ScenarioDropOutcome {
                dropped: s.to_string(),
                essential: sel.chosen != baseline.chosen,
                new_subset: sel.chosen,
                value: sel.value,
            })
        })
        .collect::<Result<_>>()?;
    let essential_count = outcomes.iter().filter(|o| o.essential).count();
    Ok(EssentialScenarios { baseline, outcomes, essential_count })
}
