//! Decision rules and diagnostic probes over a finite decision set.
//!
//! Every rule here reduces to "minimize the worst transformed cost over the
//! scenarios". Ties are broken by declared decision order, but the full
//! argmin set and a short trace are always reported so that callers can see
//! when the choice was arbitrary.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{regret_transform, CostMatrix, RegretKind, RegretMatrix};
use crate::simplex::{solve_lp, Constraint, LinearProgram, LpStatus, Relation, Sense};

/// Relative tolerance under which two worst-case values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub(crate) fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * (1.0 + a.abs().max(b.abs()))
}

/// Outcome of a minimax rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub kind: RegretKind,
    pub chosen: String,
    pub chosen_index: usize,
    pub argmin_set: Vec<String>,
    /// Worst-case transformed cost of the chosen decision.
    pub value: f64,
    /// Scenarios attaining `value` at the chosen decision.
    pub active_scenarios: Vec<String>,
    pub tie_break: String,
}

/// Indices of all decisions tied for the smallest score, in declared order.
pub(crate) fn argmin_indices(scores: &[f64], tolerance: impl Fn(f64, f64) -> bool) -> Vec<usize> {
    let best = scores.iter().copied().fold(f64::INFINITY, f64::min);
    scores
        .iter()
        .enumerate()
        .filter(|(_, &v)| tolerance(v, best))
        .map(|(j, _)| j)
        .collect()
}

pub(crate) fn tie_trace(labels: &[&str], chosen: &str) -> String {
    if labels.len() == 1 {
        format!("unique minimizer {chosen}")
    } else {
        format!(
            "{}-way tie among {{{}}}; chose {chosen} by declared order",
            labels.len(),
            labels.join(", ")
        )
    }
}

/// Builds a selection from per-decision worst-case scores and the transformed table.
pub(crate) fn selection_from_scores(
    regrets: &RegretMatrix,
    scores: &[f64],
    active: impl Fn(usize) -> Vec<usize>,
    tolerance: impl Fn(f64, f64) -> bool,
) -> Selection {
    let argmin = argmin_indices(scores, tolerance);
    let chosen_index = argmin[0];
    let labels: Vec<&str> = argmin.iter().map(|&j| regrets.decisions().get(j)).collect();
    let chosen = labels[0].to_string();
    Selection {
        kind: regrets.kind(),
        tie_break: tie_trace(&labels, &chosen),
        chosen,
        chosen_index,
        argmin_set: labels.iter().map(|s| s.to_string()).collect(),
        value: scores[chosen_index],
        active_scenarios: active(chosen_index)
            .into_iter()
            .map(|i| regrets.scenarios().get(i).to_string())
            .collect(),
    }
}

/// Chooses the decision minimizing the worst transformed cost.
pub fn minimax_select(costs: &CostMatrix, kind: RegretKind) -> Selection {
    let regrets = regret_transform(costs, kind);
    let worst = regrets.column_maxima();
    selection_from_scores(
        &regrets,
        &worst,
        |j| {
            (0..regrets.scenarios().len())
                .filter(|&i| tied(regrets.get(i, j), worst[j]))
                .collect()
        },
        tied,
    )
}

/// Result of comparing two decisions in isolation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Preference {
    /// The first decision is strictly preferred.
    First,
    /// The second decision is strictly preferred.
    Second,
    Tie,
}

/// Applies the rule to the two-column restriction `{d1, d2}`.
pub fn pairwise_preference(costs: &CostMatrix, kind: RegretKind, d1: &str, d2: &str) -> Result<Preference> {
    let a = costs.decision_index(d1)?;
    let b = costs.decision_index(d2)?;
    if a == b {
        return Err(Error::InvalidInput(format!("cannot compare `{d1}` with itself")));
    }
    let worst = regret_transform(&costs.select_decisions(&[a, b])?, kind).column_maxima();
    Ok(if tied(worst[0], worst[1]) {
        Preference::Tie
    } else if worst[0] < worst[1] {
        Preference::First
    } else {
        Preference::Second
    })
}

/// A directed three-cycle of strict pairwise preferences.
///
/// Each `(winner, loser)` edge's winner is the next edge's loser, and the
/// first edge's loser is the lowest-indexed decision of the three.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreferenceCycle {
    pub edges: [(String, String); 3],
}

/// Enumerates every intransitive triple of decisions.
pub fn find_preference_cycles(costs: &CostMatrix, kind: RegretKind) -> Vec<PreferenceCycle> {
    let n = costs.n_decisions();
    let labels = costs.decisions();
    // beats[a][b] is true when a is strictly preferred to b.
    let mut beats = vec![vec![false; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            match pairwise_preference(costs, kind, labels.get(a), labels.get(b)) {
                Ok(Preference::First) => beats[a][b] = true,
                Ok(Preference::Second) => beats[b][a] = true,
                _ => {}
            }
        }
    }
    let edge = |w: usize, l: usize| (labels.get(w).to_string(), labels.get(l).to_string());
    let mut cycles = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                // b beats a, c beats b, a beats c
                if beats[b][a] && beats[c][b] && beats[a][c] {
                    cycles.push(PreferenceCycle { edges: [edge(b, a), edge(c, b), edge(a, c)] });
                }
                // c beats a, b beats c, a beats b
                if beats[c][a] && beats[b][c] && beats[a][b] {
                    cycles.push(PreferenceCycle { edges: [edge(c, a), edge(b, c), edge(a, b)] });
                }
            }
        }
    }
    cycles
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IiaFinding {
    pub removed: String,
    pub old_choice: String,
    pub new_choice: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IiaReport {
    pub baseline: Selection,
    pub findings: Vec<IiaFinding>,
}

/// Removes each non-chosen decision in turn and records changed selections.
pub fn iia_probe(costs: &CostMatrix, kind: RegretKind) -> Result<IiaReport> {
    if costs.n_decisions() < 2 {
        return Err(Error::InvalidInput("IIA probe needs at least two decisions".into()));
    }
    let baseline = minimax_select(costs, kind);
    let mut findings = Vec::new();
    for removed in costs.decisions().iter() {
        if removed == baseline.chosen {
            continue;
        }
        let reduced = minimax_select(&costs.without_decision(removed)?, kind);
        if reduced.chosen != baseline.chosen {
            findings.push(IiaFinding {
                removed: removed.to_string(),
                old_choice: baseline.chosen.clone(),
                new_choice: reduced.chosen,
            });
        }
    }
    Ok(IiaReport { baseline, findings })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalizabilityResult {
    pub target: String,
    pub feasible: bool,
    /// Scenario probabilities under which `target` minimizes expected cost.
    pub probabilities: Option<Vec<f64>>,
}

/// Decides whether some probability vector makes `target` an expected-cost minimizer.
///
/// Feasibility of `p ≥ 0, Σp = 1, Σ_i p_i C_i(target) ≤ Σ_i p_i C_i(d)` for all
/// rivals `d`, checked with phase one of the simplex method.
pub fn rationalizability(costs: &CostMatrix, target: &str) -> Result<RationalizabilityResult> {
    let t = costs.decision_index(target)?;
    let s = costs.n_scenarios();
    let mut lp = LinearProgram::new(Sense::Maximize, vec![0.0; s]);
    lp.push(Constraint::dense(&vec![1.0; s], Relation::Eq, 1.0));
    for d in (0..costs.n_decisions()).filter(|&d| d != t) {
        let diff: Vec<f64> = costs.rows().iter().map(|row| row[t] - row[d]).collect();
        lp.push(Constraint::dense(&diff, Relation::Le, 0.0));
    }
    let sol = solve_lp(&lp)?;
    let feasible = sol.status == LpStatus::Optimal;
    Ok(RationalizabilityResult {
        target: target.to_string(),
        feasible,
        probabilities: feasible.then_some(sol.primal),
    })
}

/// A synthetic decision injected to steer the minimax-regret choice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GamingConstruction {
    pub injected_label: String,
    /// Cost of the injected decision in each scenario.
    pub injected_costs: Vec<f64>,
    /// Cost assigned outside the pivot scenario.
    pub m: f64,
    /// Largest scenario minimum cost.
    pub l: f64,
    /// Largest cost anywhere in the original matrix.
    pub global_max: f64,
    pub target: String,
    pub pivot_scenario: String,
}

/// Builds a decision whose presence puts `target` in the minimax-regret argmin set.
///
/// `target` must be the strict unique minimizer of scenario `pivot`. The
/// injected decision costs `M` in every other scenario and
/// `C_pivot(target) - M + L` in the pivot, where `L` is the largest scenario
/// minimum and `M` is the global maximum cost raised by the spread
/// `L - min_i min_x C_i(x)` of the scenario minima. The raise is zero when all
/// scenario minima coincide; without it the target's regret in a scenario with
/// a low minimum can exceed `M - L`.
pub fn gaming_construct(
    costs: &CostMatrix,
    target: &str,
    pivot: &str,
) -> Result<(GamingConstruction, CostMatrix)> {
    let t = costs.decision_index(target)?;
    let k = costs.scenario_index(pivot)?;
    if costs.n_scenarios() < 2 {
        return Err(Error::TooFewScenarios);
    }
    let pivot_row = costs.row(k);
    if pivot_row.iter().enumerate().any(|(d, &c)| d != t && c <= pivot_row[t]) {
        return Err(Error::NotUniqueMinimizer { target: target.into(), pivot: pivot.into() });
    }
    let minima: Vec<f64> = costs
        .rows()
        .iter()
        .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let global_max = costs.rows().iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let l = minima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lowest_min = minima.iter().copied().fold(f64::INFINITY, f64::min);
    let m = global_max + (l - lowest_min);
    let injected_costs: Vec<f64> = (0..costs.n_scenarios())
        .map(|i| if i == k { pivot_row[t] - m + l } else { m })
        .collect();

    let mut injected_label = String::from("injected");
    while costs.decisions().position(&injected_label).is_some() {
        injected_label.push('\'');
    }
    let augmented = costs.with_decision(&injected_label, &injected_costs)?;
    Ok((
        GamingConstruction {
            injected_label,
            injected_costs,
            m,
            l,
            global_max,
            target: target.into(),
            pivot_scenario: pivot.into(),
        },
        augmented,
    ))
}

/// Minimizer of the exponential disutility `Σ_i p_i exp(k·C_i(x))`.
///
/// Costs are rescaled to unit maximum magnitude first, and the sum is
/// compared in log space, so large `k` cannot overflow. As `k` grows the
/// choice approaches the minimax-cost decision for any full-support `p`.
pub fn risk_aversion_limit(costs: &CostMatrix, p: &[f64], k: f64) -> Result<String> {
    validate_probabilities(p, costs.n_scenarios())?;
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidInput(format!("risk-aversion coefficient must be positive, got {k}")));
    }
    let scale = costs.rows().iter().flatten().fold(0.0f64, |a, &c| a.max(c.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let scores: Vec<f64> = (0..costs.n_decisions())
        .map(|j| {
            let terms: Vec<f64> = p
                .iter()
                .enumerate()
                .filter(|(_, &pi)| pi > 0.0)
                .map(|(i, &pi)| pi.ln() + k * costs.get(i, j) / scale)
                .collect();
            let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
        })
        .collect();
    let best = argmin_indices(&scores, tied)[0];
    Ok(costs.decisions().get(best).to_string())
}

pub(crate) fn validate_probabilities(p: &[f64], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::InvalidProbability(format!("{} entries for {n} scenarios", p.len())));
    }
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidProbability("entries must be finite and non-negative".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbability(format!("entries sum to {total}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example1, example3};
    use crate::model::build_cost_matrix;

    #[test]
    fn example1_minimax_regret_picks_x() {
        let sel = minimax_select(&example1(), RegretKind::RegretMin);
        assert_eq!(sel.chosen, "x");
        assert_eq!(sel.value, 4.0);
        assert_eq!(sel.argmin_set, ["x"]);
        assert_eq!(sel.active_scenarios, ["A"]);
    }

    #[test]
    fn example3_minimax_regret_picks_x() {
        // Regret columns: x (4,4,0), y (0,6,0), z (2,0,5); maxima 4, 6, 5.
        let sel = minimax_select(&example3(), RegretKind::RegretMin);
        assert_eq!(sel.chosen, "x");
        assert_eq!(sel.value, 4.0);
        assert_eq!(sel.active_scenarios, ["A", "B"]);
    }

    #[test]
    fn total_tie_reports_every_decision() {
        let m = build_cost_matrix(["A", "B"], ["p", "q", "r"], vec![vec![2.0; 3], vec![2.0; 3]]).unwrap();
        let sel = minimax_select(&m, RegretKind::Cost);
        assert_eq!(sel.argmin_set, ["p", "q", "r"]);
        assert_eq!(sel.chosen, "p");
        assert!(sel.tie_break.contains("3-way tie"));
    }

    #[test]
    fn example3_pairwise_preferences() {
        let m = example3();
        let k = RegretKind::RegretMin;
        assert_eq!(pairwise_preference(&m, k, "x", "y").unwrap(), Preference::Second);
        assert_eq!(pairwise_preference(&m, k, "y", "z").unwrap(), Preference::Second);
        assert_eq!(pairwise_preference(&m, k, "z", "x").unwrap(), Preference::Second);
        assert!(matches!(pairwise_preference(&m, k, "x", "w"), Err(Error::UnknownLabel(_))));
        assert!(pairwise_preference(&m, k, "x", "x").is_err());
    }

    #[test]
    fn identical_columns_tie() {
        let m = build_cost_matrix(["A", "B"], ["p", "q"], vec![vec![1.0, 1.0], vec![5.0, 5.0]]).unwrap();
        for kind in RegretKind::ALL {
            assert_eq!(pairwise_preference(&m, kind, "p", "q").unwrap(), Preference::Tie);
        }
    }

    #[test]
    fn example3_has_one_cycle() {
        let cycles = find_preference_cycles(&example3(), RegretKind::RegretMin);
        assert_eq!(cycles.len(), 1);
        let e = &cycles[0].edges;
        assert_eq!(e[0], ("y".into(), "x".into()));
        assert_eq!(e[1], ("z".into(), "y".into()));
        assert_eq!(e[2], ("x".into(), "z".into()));
    }

    #[test]
    fn two_decisions_have_no_cycles() {
        let m = build_cost_matrix(["A", "B"], ["p", "q"], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(find_preference_cycles(&m, RegretKind::RegretMin).is_empty());
    }

    #[test]
    fn example3_iia_violation() {
        let report = iia_probe(&example3(), RegretKind::RegretMin).unwrap();
        assert_eq!(report.baseline.chosen, "x");
        assert_eq!(
            report.findings,
            [IiaFinding { removed: "z".into(), old_choice: "x".into(), new_choice: "y".into() }]
        );
        assert!(iia_probe(&example3(), RegretKind::Cost).unwrap().findings.is_empty());
    }

    #[test]
    fn example1_rationalizability() {
        let m = example1();
        let x = rationalizability(&m, "x").unwrap();
        assert!(!x.feasible);
        assert!(x.probabilities.is_none());

        let z = rationalizability(&m, "z").unwrap();
        assert!(z.feasible);
        let p = z.probabilities.unwrap();
        let expected = |j: usize| (0..3).map(|i| p[i] * m.get(i, j)).sum::<f64>();
        assert!(expected(2) <= expected(0) + 1e-9);
        assert!(expected(2) <= expected(1) + 1e-9);

        let single = build_cost_matrix(["A"], ["p", "q"], vec![vec![3.0, 1.0]]).unwrap();
        let q = rationalizability(&single, "q").unwrap();
        assert_eq!(q.probabilities, Some(vec![1.0]));
        assert!(matches!(rationalizability(&m, "w"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn gaming_example1_target_y() {
        let (g, aug) = gaming_construct(&example1(), "y", "A").unwrap();
        assert_eq!((g.m, g.l), (5.0, 0.0));
        assert_eq!(g.injected_costs, [-5.0, 5.0, 5.0]);
        let worst = regret_transform(&aug, RegretKind::RegretMin).column_maxima();
        assert_eq!(worst, [9.0, 5.0, 10.0, 5.0]);
        let sel = minimax_select(&aug, RegretKind::RegretMin);
        assert_eq!(sel.chosen, "y");
        assert_eq!(sel.argmin_set, ["y", "injected"]);
        assert!(sel.tie_break.contains("2-way tie"));
    }

    #[test]
    fn gaming_example3_target_y() {
        let (g, aug) = gaming_construct(&example3(), "y", "A").unwrap();
        assert_eq!((g.m, g.l), (6.0, 0.0));
        assert_eq!(g.injected_costs, [-6.0, 6.0, 6.0]);
        let worst = regret_transform(&aug, RegretKind::RegretMin).column_maxima();
        assert_eq!(worst, [10.0, 6.0, 8.0, 6.0]);
        assert!(minimax_select(&aug, RegretKind::RegretMin).argmin_set.contains(&"y".to_string()));
    }

    #[test]
    fn gaming_rejects_non_minimizer() {
        let err = gaming_construct(&example1(), "x", "A").unwrap_err();
        assert!(matches!(err, Error::NotUniqueMinimizer { .. }));
    }

    #[test]
    fn gaming_handles_unequal_scenario_minima() {
        // With M = global max the target y would lose to x here.
        let m = build_cost_matrix(["A", "B"], ["y", "x"], vec![vec![0.0, 1.0], vec![10.0, -10.0]]).unwrap();
        let (g, aug) = gaming_construct(&m, "y", "A").unwrap();
        assert_eq!(g.global_max, 10.0);
        assert_eq!(g.m, 20.0);
        let sel = minimax_select(&aug, RegretKind::RegretMin);
        assert!(sel.argmin_set.contains(&"y".to_string()), "{sel:?}");
    }

    #[test]
    fn risk_aversion_examples() {
        let m = example1();
        let third = [1.0 / 3.0; 3];
        assert_eq!(risk_aversion_limit(&m, &third, 50.0).unwrap(), "x");
        assert_eq!(risk_aversion_limit(&m, &[1.0, 0.0, 0.0], 50.0).unwrap(), "y");
        // No overflow for very large k.
        assert_eq!(risk_aversion_limit(&m, &third, 1e6).unwrap(), "x");

        let single = build_cost_matrix(["A"], ["p", "q", "r"], vec![vec![3.0, -1.0, 2.0]]).unwrap();
        for k in [0.01, 1.0, 500.0] {
            assert_eq!(risk_aversion_limit(&single, &[1.0], k).unwrap(), "q");
        }

        assert!(matches!(
            risk_aversion_limit(&m, &[0.5, 0.5, 0.5], 1.0),
            Err(Error::InvalidProbability(_))
        ));
        assert!(matches!(
            risk_aversion_limit(&m, &[1.0, 0.0], 1.0),
            Err(Error::InvalidProbability(_))
        ));
    }
}
