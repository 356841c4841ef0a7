//! Decision analysis under scenario uncertainty.
//!
//! The crate implements minimax-cost, minimax-regret and generalized-regret
//! decision rules, their robust counterparts over polytopes of scenario
//! probabilities, and a set of probes that expose how these rules behave:
//! violations of independence of irrelevant alternatives, preference cycles,
//! rationalizability by some probability vector, and a construction that
//! games the regret rule by injecting a synthetic option.
//!
//! Three kinds of decision set are supported:
//!
//! * finite sets, via [`CostMatrix`] ([`finite`], [`robust`]);
//! * boxes in `R^n` with convex scenario costs ([`continuous`], [`capacity`]);
//! * project portfolios `{0,1}^n` with additive costs ([`projects`]).

pub mod capacity;
pub mod continuous;
pub mod error;
pub mod finite;
pub mod fixtures;
pub mod model;
pub mod montecarlo;
pub mod projects;
pub mod robust;
pub mod simplex;

pub use error::{Error, Result};
pub use model::{build_cost_matrix, regret_transform, CostMatrix, LabelSet, RegretKind, RegretMatrix};
