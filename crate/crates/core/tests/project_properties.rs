use lwr_core::fixtures::{appendix_instance, example4_instance, example5_instance, mean_regret_instance};
use lwr_core::projects::{
    essential_scenarios, induced_cost_matrix, mean_regret_additive, mean_regret_profile, project_iia_probe,
    select_projects, subsets_in_rank_order, AdditiveProjectInstance,
};
use lwr_core::{regret_transform, RegretKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(rows: Vec<Vec<i32>>, base: Option<Vec<i32>>) -> AdditiveProjectInstance {
    let n = rows[0].len();
    AdditiveProjectInstance::new(
        (0..n).map(|k| format!("P{k}")),
        (0..rows.len()).map(|i| format!("S{i}")),
        rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect(),
        base.map(|b| b.into_iter().map(f64::from).collect()),
    )
    .unwrap()
}

fn int_rows(max_s: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<i32>>> {
    (1..=max_s, 1..=max_n).prop_flat_map(|(s, n)| prop::collection::vec(prop::collection::vec(-9i32..=9, n), s))
}

fn members(mask: u32, n: usize) -> Vec<String> {
    (0..n).filter(|k| mask >> k & 1 == 1).map(|k| format!("P{k}")).collect()
}

#[test]
fn closed_form_matches_enumeration_up_to_twelve_projects() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 1..=12 {
        for _ in 0..3 {
            let s = rng.random_range(1..=4);
            let rows: Vec<Vec<i32>> = (0..s).map(|_| (0..n).map(|_| rng.random_range(-20..=20)).collect()).collect();
            let inst = instance(rows, None);
            let m = induced_cost_matrix(&inst).unwrap();
            let mean = regret_transform(&m, RegretKind::RegretMean).column_maxima();
            let median = regret_transform(&m, RegretKind::RegretMedian).column_maxima();
            for (j, &mask) in subsets_in_rank_order(n).iter().enumerate() {
                let names = members(mask, n);
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                let closed = mean_regret_additive(&inst, &refs).unwrap();
                assert_eq!(closed, mean[j]);
                assert_eq!(closed, median[j]);
            }
        }
    }
}

proptest! {
    #[test]
    fn regret_selections_ignore_base_costs(rows in int_rows(4, 5), base in prop::collection::vec(-50i32..=50, 4)) {
        let plain = instance(rows.clone(), None);
        let shifted = instance(rows.clone(), Some(base[..rows.len()].to_vec()));
        for kind in [RegretKind::RegretMin, RegretKind::RegretMean, RegretKind::RegretMedian] {
            let a = select_projects(&plain, kind).unwrap();
            let b = select_projects(&shifted, kind).unwrap();
            prop_assert_eq!(a.chosen, b.chosen);
            prop_assert_eq!(a.argmin, b.argmin);
        }
    }

    #[test]
    fn complement_has_opposite_mean_regret_profile(rows in int_rows(4, 6), mask in 0u32..64) {
        let n = rows[0].len();
        let mask = mask & ((1 << n) - 1);
        let inst = instance(rows, None);
        let t = members(mask, n);
        let c = members(!mask & ((1 << n) - 1), n);
        let t: Vec<&str> = t.iter().map(String::as_str).collect();
        let c: Vec<&str> = c.iter().map(String::as_str).collect();
        let pt = mean_regret_profile(&inst, &t).unwrap();
        let pc = mean_regret_profile(&inst, &c).unwrap();
        for (a, b) in pt.iter().zip(&pc) {
            prop_assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn cost_rule_has_no_project_iia_findings(rows in int_rows(4, 4)) {
        let inst = instance(rows, None);
        let report = project_iia_probe(&inst, RegretKind::Cost).unwrap();
        prop_assert!(report.findings.is_empty());
    }
}

#[test]
fn some_base_vector_changes_the_cost_selection() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let found = (0..5_000).any(|_| {
        let rows: Vec<Vec<i32>> = (0..3).map(|_| (0..3).map(|_| rng.random_range(-9..=9)).collect()).collect();
        let base: Vec<i32> = (0..3).map(|_| rng.random_range(-30..=30)).collect();
        let a = select_projects(&instance(rows.clone(), None), RegretKind::Cost).unwrap();
        let b = select_projects(&instance(rows, Some(base)), RegretKind::Cost).unwrap();
        a.chosen != b.chosen
    });
    assert!(found);
}

#[test]
fn shipped_appendix_instance_needs_all_five_scenarios() {
    let inst = appendix_instance();
    assert_eq!(inst.projects().len(), 3);
    let e = essential_scenarios(&inst, RegretKind::RegretMin).unwrap();
    assert_eq!(e.essential_count, 5);
    assert!(e.essential_count > inst.projects().len() + 1);
}

#[test]
fn fixture_closed_forms_match_enumeration() {
    for inst in [example4_instance(), example5_instance(), mean_regret_instance(), appendix_instance()] {
        let n = inst.projects().len();
        let m = induced_cost_matrix(&inst).unwrap();
        let mean = regret_transform(&m, RegretKind::RegretMean).column_maxima();
        for (j, &mask) in subsets_in_rank_order(n).iter().enumerate() {
            let names = inst.subset_members(mask);
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            assert_eq!(mean_regret_additive(&inst, &refs).unwrap(), mean[j]);
        }
    }
}
