use lwr_core::montecarlo::{run_study, sample_matrix, McConfig, McRule, TieBreak};

#[test]
fn identical_inputs_give_identical_results() {
    let config = McConfig::new(50_000, 9);
    let a = run_study(&config).unwrap();
    let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_study(&config).unwrap());
    let c = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| run_study(&config).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn regret_rule_beats_cost_rule_with_enough_samples() {
    for seed in [1, 2, 3] {
        let r = run_study(&McConfig::new(100_000, seed)).unwrap();
        let cost = r.get(McRule::MinimaxCost).unwrap().mean;
        let regret = r.get(McRule::MinimaxRegret).unwrap().mean;
        assert!(regret < cost, "seed {seed}: {regret} vs {cost}");
    }
}

#[test]
fn tie_break_does_not_move_the_estimate() {
    let mut first = McConfig::new(100_000, 5);
    first.tie_break = TieBreak::First;
    let mut last = first.clone();
    last.tie_break = TieBreak::Last;
    assert_eq!(run_study(&first).unwrap().results, run_study(&last).unwrap().results);
}

#[test]
fn single_sample_scores_one_matrix() {
    let r = run_study(&McConfig::new(1, 3)).unwrap();
    let c = sample_matrix(3, 0);
    for res in &r.results {
        let expected = (0..3).map(|j| 0.5 * (c[0][j] + c[1][j])).any(|v| v == res.mean);
        assert!(expected);
        assert_eq!(res.std_error, 0.0);
    }
    assert_eq!(r, run_study(&McConfig::new(1, 3)).unwrap());
}
