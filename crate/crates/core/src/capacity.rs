//! Capacity-to-secure studies: per-scenario cost
//! `C_i(x) = voll·E_i·exp(-λ_i (x - a_i)) + cone·x` over a capacity interval.
//!
//! Units are fixed: capacity in MW, energy in MWh, money in £.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuous::{
    hull_reduce, regret_functions, solve_1d, AnchoredFamily, ContinuousProblem, ContinuousSolution, HullReduction,
    ScenarioFunction,
};
use crate::error::{Error, Result};
use crate::model::RegretKind;

/// Value of lost load used by [`synth_ecr`], £/MWh.
pub const DEFAULT_VOLL: f64 = 17_000.0;
/// Cost of new entry used by [`synth_ecr`], £/MW.
pub const DEFAULT_CONE: f64 = 49_000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityScenario {
    pub name: String,
    /// Anchor capacity, MW.
    pub a: f64,
    /// Expected energy unserved at `x = a`, MWh.
    #[serde(rename = "E")]
    pub e: f64,
    /// Decay rate of unserved energy, per MW.
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityStudy {
    /// £/MWh.
    pub voll: f64,
    /// £/MW.
    pub cone: f64,
    /// Capacity interval, MW.
    pub bounds: [f64; 2],
    pub scenarios: Vec<CapacityScenario>,
}

impl CapacityStudy {
    pub fn new(voll: f64, cone: f64, bounds: [f64; 2], scenarios: Vec<CapacityScenario>) -> Result<Self> {
        let study = Self { voll, cone, bounds, scenarios };
        study.validate()?;
        Ok(study)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.voll.is_finite() && self.voll > 0.0) || !(self.cone.is_finite() && self.cone > 0.0) {
            return Err(Error::InvalidInput("voll and cone must be positive and finite".into()));
        }
        let [lo, hi] = self.bounds;
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidInput(format!("invalid capacity bounds [{lo}, {hi}]")));
        }
        if self.scenarios.is_empty() {
            return Err(Error::EmptyScenarioSet);
        }
        crate::model::ScenarioSet::new(self.scenarios.iter().map(|s| s.name.clone()), "scenario")?;
        for s in &self.scenarios {
            if !s.a.is_finite() || !(s.e.is_finite() && s.e > 0.0) || !(s.lambda.is_finite() && s.lambda > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "scenario {}: need finite a, E > 0 and lambda > 0",
                    s.name
                )));
            }
        }
        Ok(())
    }

    pub fn scenario_index(&self, name: &str) -> Result<usize> {
        self.scenarios
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::UnknownScenario(name.to_string()))
    }

    /// The scenario cost as a built-in exponential-plus-linear function.
    pub fn scenario_function(&self, index: usize) -> ScenarioFunction {
        let s = &self.scenarios[index];
        ScenarioFunction::exp_linear(self.voll * s.e, s.lambda, s.a, self.cone).expect("validated study")
    }

    pub fn problem(&self, kind: RegretKind) -> Result<ContinuousProblem> {
        ContinuousProblem::new(
            vec![self.bounds[0]],
            vec![self.bounds[1]],
            self.scenarios.iter().map(|s| s.name.clone()),
            (0..self.scenarios.len()).map(|i| self.scenario_function(i)).collect(),
            kind,
        )
    }

    /// The common decay rate, if every scenario shares one.
    pub fn shared_lambda(&self) -> Option<f64> {
        let l = self.scenarios[0].lambda;
        self.scenarios.iter().all(|s| s.lambda == l).then_some(l)
    }

    /// With a shared decay rate, the costs are shifts of one shape:
    /// `C_i(x) = voll·E_0·exp(-λ(x - a_i')) + cone·x` with
    /// `a_i' = a_i + ln(E_i / E_0)/λ` and `E_0` the first scenario's `E`.
    pub fn anchored_family(&self) -> Option<AnchoredFamily> {
        let lambda = self.shared_lambda()?;
        let e0 = self.scenarios[0].e;
        let anchors = self.scenarios.iter().map(|s| vec![effective_anchor(s, e0)]).collect();
        let shape = ScenarioFunction::exp_linear(self.voll * e0, lambda, 0.0, 0.0).ok()?;
        AnchoredFamily::new(self.scenarios.iter().map(|s| s.name.clone()), anchors, shape, vec![self.cone]).ok()
    }
}

fn effective_anchor(s: &CapacityScenario, e0: f64) -> f64 {
    s.a + (s.e / e0).ln() / s.lambda
}

/// `voll·E_i·exp(-λ_i (x - a_i)) + cone·x`, in £.
pub fn capacity_cost(study: &CapacityStudy, scenario: &str, x: f64) -> Result<f64> {
    let [lo, hi] = study.bounds;
    if !(lo..=hi).contains(&x) {
        return Err(Error::OutOfBounds { value: x, lo, hi });
    }
    let s = &study.scenarios[study.scenario_index(scenario)?];
    Ok(study.voll * s.e * (-s.lambda * (x - s.a)).exp() + study.cone * x)
}

/// Cost-minimizing capacity for one scenario: the stationary point
/// `a + ln(voll·E·λ / cone)/λ`, clamped to the bounds.
pub fn scenario_optimum(study: &CapacityStudy, scenario: &str) -> Result<f64> {
    let s = &study.scenarios[study.scenario_index(scenario)?];
    let stationary = s.a + (study.voll * s.e * s.lambda / study.cone).ln() / s.lambda;
    Ok(stationary.clamp(study.bounds[0], study.bounds[1]))
}

/// Minimax-regret capacity. The determining set names the scenarios that
/// alone fix the recommendation.
pub fn minimax_regret_capacity(study: &CapacityStudy) -> Result<ContinuousSolution> {
    study.validate()?;
    solve_1d(&study.problem(RegretKind::RegretMin)?)
}

/// Indices `(low, high)` of scenarios whose cost curves bound every other
/// scenario's from below and above across the whole interval, if such a pair
/// exists. The risk terms' log-difference is affine in `x`, so checking both
/// interval ends is exact.
pub fn pointwise_extremes(study: &CapacityStudy) -> Option<(usize, usize)> {
    let [lo, hi] = study.bounds;
    let log_risk = |s: &CapacityScenario, x: f64| (study.voll * s.e).ln() - s.lambda * (x - s.a);
    let n = study.scenarios.len();
    let bounds_all = |i: usize, below: bool| {
        (0..n).all(|j| {
            [lo, hi].iter().all(|&x| {
                let (a, b) = (log_risk(&study.scenarios[i], x), log_risk(&study.scenarios[j], x));
                if below {
                    a <= b
                } else {
                    a >= b
                }
            })
        })
    };
    let low = (0..n).find(|&i| bounds_all(i, true))?;
    let high = (0..n).find(|&i| bounds_all(i, false))?;
    Some((low, high))
}

/// Drops scenarios whose effective anchor lies between two others. Requires a
/// shared decay rate.
pub fn reduce_study(study: &CapacityStudy) -> Result<HullReduction> {
    let family = study
        .anchored_family()
        .ok_or_else(|| Error::InvalidInput("scenario reduction needs a shared lambda".into()))?;
    hull_reduce(&family)
}

/// Generates a study of `count` scenarios shaped like an electricity capacity
/// assessment: two extreme scenarios that bound the rest pointwise, up to five
/// core scenarios and the remainder as minor scenarios.
///
/// All scenarios share `λ = 0.0015 /MW`. Draws come from `ChaCha8Rng` seeded
/// with `seed`, in scenario order: core anchors uniform in [44000, 50000] MW
/// with `E` uniform in [2000, 4000] MWh; minor anchors uniform in
/// [45000, 49000] MW with `E` uniform in [2500, 3500] MWh. Anchors are rounded
/// to whole MW and `E` to 0.1 MWh. The extremes have `E = 3000` MWh and
/// anchors 42500 and 52000 MW; bounds are [40000, 56000] MW.
pub fn synth_ecr(seed: u64, count: usize) -> Result<CapacityStudy> {
    if count < 2 {
        return Err(Error::InvalidInput("a synthetic study needs at least two scenarios".into()));
    }
    const LAMBDA: f64 = 0.0015;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let round_e = |e: f64| (e * 10.0).round() / 10.0;
    let mut scenarios = vec![
        CapacityScenario { name: "extreme-low".into(), a: 42_500.0, e: 3_000.0, lambda: LAMBDA },
        CapacityScenario { name: "extreme-high".into(), a: 52_000.0, e: 3_000.0, lambda: LAMBDA },
    ];
    let core = (count - 2).min(5);
    for i in 0..core {
        let a = rng.random_range(44_000.0..50_000.0f64).round();
        let e = round_e(rng.random_range(2_000.0..4_000.0));
        scenarios.push(CapacityScenario { name: format!("core-{}", i + 1), a, e, lambda: LAMBDA });
    }
    for i in 0..count - 2 - core {
        let a = rng.random_range(45_000.0..49_000.0f64).round();
        let e = round_e(rng.random_range(2_500.0..3_500.0));
        scenarios.push(CapacityScenario { name: format!("minor-{:02}", i + 1), a, e, lambda: LAMBDA });
    }
    CapacityStudy::new(DEFAULT_VOLL, DEFAULT_CONE, [40_000.0, 56_000.0], scenarios)
}

/// Cost and regret of every scenario on a capacity grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub names: Vec<String>,
    pub x: Vec<f64>,
    /// `cost[r][i]`: scenario `i` at `x[r]`.
    pub cost: Vec<Vec<f64>>,
    pub regret: Vec<Vec<f64>>,
}

impl CurveTable {
    /// CSV with header `x,<name>_cost...,<name>_regret...` and six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x");
        for n in &self.names {
            out.push_str(&format!(",{n}_cost"));
        }
        for n in &self.names {
            out.push_str(&format!(",{n}_regret"));
        }
        out.push('\n');
        for r in 0..self.x.len() {
            out.push_str(&format!("{:.6}", self.x[r]));
            for v in self.cost[r].iter().chain(&self.regret[r]) {
                out.push_str(&format!(",{v:.6}"));
            }
            out.push('\n');
        }
        out
    }

    /// `max_i regret` at each grid point.
    pub fn max_regret(&self) -> Vec<f64> {
        self.regret.iter().map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect()
    }
}

/// Curves over the full study interval at spacing `step` MW.
pub fn emit_curves(study: &CapacityStudy, step: f64) -> Result<CurveTable> {
    emit_curves_range(study, study.bounds[0], study.bounds[1], step)
}

/// Curves on `from, from + step, …` up to `to`; empty when `from > to`.
pub fn emit_curves_range(study: &CapacityStudy, from: f64, to: f64, step: f64) -> Result<CurveTable> {
    study.validate()?;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidInput(format!("grid step must be positive, got {step}")));
    }
    let [lo, hi] = study.bounds;
    let names: Vec<String> = study.scenarios.iter().map(|s| s.name.clone()).collect();
    if from > to {
        return Ok(CurveTable { names, x: vec![], cost: vec![], regret: vec![] });
    }
    for v in [from, to] {
        if !(lo..=hi).contains(&v) {
            return Err(Error::OutOfBounds { value: v, lo, hi });
        }
    }
    let costs: Vec<ScenarioFunction> = (0..names.len()).map(|i| study.scenario_function(i)).collect();
    let regrets = regret_functions(&study.problem(RegretKind::RegretMin)?)?;
    let points = ((to - from) / step + 1e-9).floor() as usize + 1;
    let x: Vec<f64> = (0..points).map(|k| from + k as f64 * step).collect();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = x
        .par_iter()
        .map(|&xv| {
            (
                costs.iter().map(|f| f.value(&[xv])).collect(),
                regrets.iter().map(|f| f.value(&[xv]).max(0.0)).collect(),
            )
        })
        .collect();
    let (cost, regret) = rows.into_iter().unzip();
    Ok(CurveTable { names, x, cost, regret })
}
