//! Randomized comparison of minimax cost and minimax regret on two equally
//! likely scenarios and three decisions with independent uniform costs.
//!
//! Sample `k` draws its six costs from `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `k`, so results do not depend on how samples are split across
//! threads. Samples are summed in fixed-size index blocks and the block sums
//! are combined in index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::{argmin_indices, tied};

const BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum McRule {
    MinimaxCost,
    MinimaxRegret,
}

impl McRule {
    pub const ALL: [McRule; 2] = [McRule::MinimaxCost, McRule::MinimaxRegret];

    pub fn name(self) -> &'static str {
        match self {
            McRule::MinimaxCost => "minimax-cost",
            McRule::MinimaxRegret => "minimax-regret",
        }
    }
}

/// Which member of a tied argmin set a rule picks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    First,
    Last,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub rules: Vec<McRule>,
    #[serde(default)]
    pub tie_break: TieBreak,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed, rules: McRule::ALL.to_vec(), tie_break: TieBreak::First }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRuleResult {
    pub rule: McRule,
    /// Mean over samples of the chosen decision's expected cost.
    pub mean: f64,
    /// Sample standard deviation divided by `sqrt(samples)`.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McResult {
    pub samples: u64,
    pub seed: u64,
    pub results: Vec<McRuleResult>,
}

impl McResult {
    pub fn get(&self, rule: McRule) -> Option<&McRuleResult> {
        self.results.iter().find(|r| r.rule == rule)
    }
}

/// The six costs of sample `index`, as `[scenario][decision]`.
pub fn sample_matrix(seed: u64, index: u64) -> [[f64; 3]; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut c = [[0.0; 3]; 2];
    for row in &mut c {
        for v in row.iter_mut() {
            *v = rng.random::<f64>();
        }
    }
    c
}

/// Index of the decision `rule` picks for the matrix `c`.
pub fn choose(c: &[[f64; 3]; 2], rule: McRule, tie_break: TieBreak) -> usize {
    let worst: Vec<f64> = match rule {
        McRule::MinimaxCost => (0..3).map(|j| c[0][j].max(c[1][j])).collect(),
        McRule::MinimaxRegret => {
            let m = [c[0].iter().copied().fold(f64::INFINITY, f64::min), c[1].iter().copied().fold(f64::INFINITY, f64::min)];
            (0..3).map(|j| (c[0][j] - m[0]).max(c[1][j] - m[1])).collect()
        }
    };
    let argmin = argmin_indices(&worst, tied);
    match tie_break {
        TieBreak::First => argmin[0],
        TieBreak::Last => *argmin.last().expect("non-empty"),
    }
}

/// Runs the study. Deterministic in `(seed, samples, rules, tie_break)`.
pub fn run_study(config: &McConfig) -> Result<McResult> {
    if config.samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    if config.rules.is_empty() {
        return Err(Error::EmptySet("rules"));
    }
    let r = config.rules.len();
    let blocks = config.samples.div_ceil(BLOCK);
    let partial: Vec<Vec<(f64, f64)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![(0.0, 0.0); r];
            for index in b * BLOCK..((b + 1) * BLOCK).min(config.samples) {
                let c = sample_matrix(config.seed, index);
                for (k, &rule) in config.rules.iter().enumerate() {
                    let j = choose(&c, rule, config.tie_break);
                    let score = 0.5 * (c[0][j] + c[1][j]);
                    acc[k].0 += score;
                    acc[k].1 += score * score;
                }
            }
            acc
        })
        .collect();
    let n = config.samples as f64;
    let results = config
        .rules
        .iter()
        .enumerate()
        .map(|(k, &rule)| {
            let (sum, sum_sq) = partial.iter().fold((0.0, 0.0), |(s, q), block| (s + block[k].0, q + block[k].1));
            let mean = sum / n;
            let var = if config.samples > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
            McRuleResult { rule, mean, std_error: (var / n).sqrt() }
        })
        .collect();
    Ok(McResult { samples: config.samples, seed: config.seed, results })
}
