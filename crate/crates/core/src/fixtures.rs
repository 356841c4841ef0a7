//! Worked instances used throughout the tests and the command-line golden files.

use crate::model::{build_cost_matrix, CostMatrix};
use crate::projects::AdditiveProjectInstance;

/// Three scenarios, three decisions; minimax regret picks `x` but no
/// probability vector rationalizes it.
pub fn example1() -> CostMatrix {
    build_cost_matrix(
        ["A", "B", "C"],
        ["x", "y", "z"],
        vec![vec![4.0, 0.0, 5.0], vec![3.0, 5.0, 0.0], vec![3.0, 2.0, 0.0]],
    )
    .expect("valid fixture")
}

/// Pairwise minimax-regret preferences form the cycle y≻x, z≻y, x≻z.
pub fn example3() -> CostMatrix {
    build_cost_matrix(
        ["A", "B", "C"],
        ["x", "y", "z"],
        vec![vec![4.0, 0.0, 2.0], vec![4.0, 6.0, 0.0], vec![0.0, 0.0, 5.0]],
    )
    .expect("valid fixture")
}

/// Two identical projects; each helps in B and hurts in A.
pub fn example4_instance() -> AdditiveProjectInstance {
    AdditiveProjectInstance::new(
        ["X", "Y"],
        ["A", "B"],
        vec![vec![3.0, 3.0], vec![-4.0, -4.0]],
        Some(vec![0.0, 8.0]),
    )
    .expect("valid fixture")
}

/// Dropping the unselected project Z flips the minimax-regret choice.
pub fn example5_instance() -> AdditiveProjectInstance {
    AdditiveProjectInstance::new(
        ["X", "Y", "Z"],
        ["A", "B", "C"],
        vec![vec![-1.0, 1.0, 0.0], vec![-1.0, -2.0, 3.0], vec![1.0, -2.0, -2.0]],
        None,
    )
    .expect("valid fixture")
}

/// Project-based IIA fails for minimax mean regret too.
pub fn mean_regret_instance() -> AdditiveProjectInstance {
    AdditiveProjectInstance::new(
        ["X", "Y", "Z"],
        ["A", "B", "C"],
        vec![vec![-2.0, 3.0, 4.0], vec![1.0, -3.0, 2.0], vec![3.0, -2.0, -1.0]],
        None,
    )
    .expect("valid fixture")
}

/// Three projects, five scenarios, and every scenario changes the decision
/// when removed.
pub fn appendix_instance() -> AdditiveProjectInstance {
    AdditiveProjectInstance::new(
        ["X", "Y", "Z"],
        ["A", "B", "C", "D", "E"],
        vec![
            vec![6.0, -2.0, -4.0],
            vec![2.0, 4.0, 4.0],
            vec![4.0, -8.0, -1.0],
            vec![-6.0, 6.0, 0.0],
            vec![-2.0, -7.0, 1.0],
        ],
        None,
    )
    .expect("valid fixture")
}
