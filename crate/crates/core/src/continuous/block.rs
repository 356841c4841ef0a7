//! Robust minimax over a block-diagonal probability polytope.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::robust::{block_structure, inner_max, ProbabilityPolytope};
use crate::simplex::LpStatus;

use super::envelope::Piece;
use super::{
    flatness_warning, greedy_reduce, is_active, method_for, minimize_pieces, regret_functions, ContinuousProblem,
    ContinuousSolution, ScenarioFunction,
};

/// `g_j(x)`: worst expected value over one block of the polytope.
struct ComponentPiece<'a> {
    functions: Vec<&'a ScenarioFunction>,
    polytope: Option<ProbabilityPolytope>,
}

impl ComponentPiece<'_> {
    /// Value and worst-case probabilities at `x`.
    fn worst(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let values: Vec<f64> = self.functions.iter().map(|f| f.value(x)).collect();
        match &self.polytope {
            None => Ok((values[0], vec![1.0])),
            Some(poly) => {
                let inner = inner_max(&values, poly)?;
                match inner.status {
                    LpStatus::Optimal => Ok((inner.objective, inner.probabilities)),
                    LpStatus::Infeasible => Err(Error::Infeasible),
                    LpStatus::Unbounded => Err(Error::Unbounded),
                }
            }
        }
    }
}

impl Piece for ComponentPiece<'_> {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.worst(x)?.0)
    }

    fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (_, p) = self.worst(x)?;
        let mut g = vec![0.0; x.len()];
        for (f, pi) in self.functions.iter().zip(p) {
            if pi != 0.0 {
                for (gj, dj) in g.iter_mut().zip(f.subgradient(x)) {
                    *gj += pi * dj;
                }
            }
        }
        Ok(g)
    }

    fn magnitude(&self, x: &[f64]) -> Result<f64> {
        let mut m = 0.0f64;
        for f in &self.functions {
            m = m.max(Piece::magnitude(*f, x)?);
        }
        Ok(m)
    }

    fn hessian(&self, x: &[f64]) -> Option<nalgebra::DMatrix<f64>> {
        if self.polytope.is_none() {
            return self.functions[0].hessian(x);
        }
        // Curvature of the worst-case mixture at `x`.
        let (_, p) = self.worst(x).ok()?;
        let mut h = nalgebra::DMatrix::zeros(x.len(), x.len());
        for (f, pi) in self.functions.iter().zip(p) {
            if pi != 0.0 {
                h += f.hessian(x)? * pi;
            }
        }
        Some(h)
    }
}

/// Solution of the block-robust problem, reported per component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSolution {
    /// `active` and `determining_set` hold the scenarios of the active and
    /// determining components.
    pub solution: ContinuousSolution,
    pub components: Vec<Vec<String>>,
    /// `g_j(x*)` per component.
    pub component_values: Vec<f64>,
    pub active_components: Vec<usize>,
    pub determining_components: Vec<usize>,
}

/// Minimizes `max_j g_j(x)` where `g_j` is the worst expected (cost or regret)
/// over block `j` of `polytope`.
pub fn robust_block_solve(problem: &ContinuousProblem, polytope: &ProbabilityPolytope) -> Result<BlockSolution> {
    if polytope.scenarios() != problem.scenarios() {
        return Err(Error::DimensionMismatch(
            "polytope scenarios must match the problem scenarios in order".into(),
        ));
    }
    let transformed = regret_functions(problem)?;
    let blocks = block_structure(polytope);
    let comps: Vec<ComponentPiece> = blocks
        .components
        .iter()
        .map(|comp| {
            let restricted = polytope.restrict(comp)?;
            Ok(ComponentPiece {
                functions: comp.iter().map(|&i| &transformed[i]).collect(),
                polytope: (comp.len() > 1 || restricted.n_rows() > 0).then_some(restricted),
            })
        })
        .collect::<Result<_>>()?;
    let pieces: Vec<&dyn Piece> = comps.iter().map(|c| c as &dyn Piece).collect();
    let method = method_for(problem);
    let opt = minimize_pieces(&pieces, problem.lower(), problem.upper(), method)?;

    let active_components: Vec<usize> = (0..pieces.len()).filter(|&j| is_active(opt.values[j], opt.value)).collect();
    let determining_components = greedy_reduce(active_components.clone(), &opt.x, |keep| {
        let sub: Vec<&dyn Piece> = keep.iter().map(|&j| pieces[j]).collect();
        Ok(minimize_pieces(&sub, problem.lower(), problem.upper(), method)?.x)
    })?;

    let mut warnings = Vec::new();
    if !problem.all_strictly_convex() {
        warnings.push("not every scenario function is strictly convex; the optimum may not be unique".into());
    }
    if let Some(w) = flatness_warning(&pieces, problem.lower(), problem.upper(), &opt.x, opt.value)? {
        warnings.push(w);
    }
    if determining_components.len() > problem.dimension() + 1 {
        warnings.push(format!(
            "determining set has {} components, more than dimension + 1 = {}",
            determining_components.len(),
            problem.dimension() + 1
        ));
    }
    let scenario_labels = |comps: &[usize]| -> Vec<String> {
        let mut idx: Vec<usize> = comps.iter().flat_map(|&j| blocks.components[j].iter().copied()).collect();
        idx.sort_unstable();
        idx.iter().map(|&i| problem.scenarios().get(i).to_string()).collect()
    };
    let scenario_values = transformed.iter().map(|f| f.value(&opt.x)).collect();
    Ok(BlockSolution {
        solution: ContinuousSolution {
            kind: problem.kind(),
            x_star: opt.x,
            value: opt.value,
            scenario_values,
            active: scenario_labels(&active_components),
            determining_set: scenario_labels(&determining_components),
            warnings,
            diagnostics: opt.diagnostics,
        },
        components: blocks.labels,
        component_values: opt.values,
        active_components,
        determining_components,
    })
}
