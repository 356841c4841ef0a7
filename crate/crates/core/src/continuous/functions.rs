//! Built-in convex scenario cost families.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::envelope::{minimize_max_affine, AffineCut};

/// Shape of a scenario cost function on `R^n`, before the constant offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Shape {
    /// `(x - center)ᵀ Q (x - center) + linear·x` with `Q` symmetric PSD.
    Quadratic {
        matrix: Vec<Vec<f64>>,
        center: Vec<f64>,
        linear: Vec<f64>,
    },
    /// `max_p (intercept_p + slope_p·x)`.
    PiecewiseLinear { pieces: Vec<(f64, Vec<f64>)> },
    /// `Σ_j scale_j·exp(-rate_j·(x_j - shift_j)) + linear·x`.
    ExpLinear {
        scale: Vec<f64>,
        rate: Vec<f64>,
        shift: Vec<f64>,
        linear: Vec<f64>,
    },
}

/// A convex scenario cost `shape(x) + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFunction {
    pub shape: Shape,
    #[serde(default)]
    pub offset: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl ScenarioFunction {
    /// Quadratic with a symmetric positive semi-definite matrix.
    pub fn quadratic(matrix: Vec<Vec<f64>>, center: Vec<f64>, linear: Vec<f64>) -> Result<Self> {
        let f = Self { shape: Shape::Quadratic { matrix, center, linear }, offset: 0.0 };
        f.validate()?;
        Ok(f)
    }

    /// `weight·‖x - center‖²`.
    pub fn isotropic(center: Vec<f64>, weight: f64) -> Result<Self> {
        let n = center.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { weight } else { 0.0 }).collect())
            .collect();
        Self::quadratic(matrix, center, vec![0.0; n])
    }

    pub fn piecewise_linear(pieces: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        let f = Self { shape: Shape::PiecewiseLinear { pieces }, offset: 0.0 };
        f.validate()?;
        Ok(f)
    }

    /// `scale·exp(-rate·(x - shift)) + linear·x` in one dimension.
    pub fn exp_linear(scale: f64, rate: f64, shift: f64, linear: f64) -> Result<Self> {
        Self::exp_linear_nd(vec![scale], vec![rate], vec![shift], vec![linear])
    }

    pub fn exp_linear_nd(scale: Vec<f64>, rate: Vec<f64>, shift: Vec<f64>, linear: Vec<f64>) -> Result<Self> {
        let f = Self { shape: Shape::ExpLinear { scale, rate, shift, linear }, offset: 0.0 };
        f.validate()?;
        Ok(f)
    }

    /// A constant function on `R^n`.
    pub fn constant(n: usize, value: f64) -> Self {
        Self { shape: Shape::PiecewiseLinear { pieces: vec![(value, vec![0.0; n])] }, offset: 0.0 }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn dimension(&self) -> usize {
        match &self.shape {
            Shape::Quadratic { center, .. } => center.len(),
            Shape::PiecewiseLinear { pieces } => pieces.first().map_or(0, |p| p.1.len()),
            Shape::ExpLinear { scale, .. } => scale.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dimension();
        if n == 0 {
            return Err(Error::InvalidInput("scenario function has dimension zero".into()));
        }
        if !self.offset.is_finite() {
            return Err(Error::InvalidInput("non-finite offset".into()));
        }
        match &self.shape {
            Shape::Quadratic { matrix, center, linear } => {
                if matrix.len() != n || matrix.iter().any(|r| r.len() != n) || linear.len() != n {
                    return Err(Error::DimensionMismatch("quadratic matrix, center and linear term".into()));
                }
                if !matrix.iter().all(|r| finite(r)) || !finite(center) || !finite(linear) {
                    return Err(Error::InvalidInput("non-finite quadratic coefficient".into()));
                }
                for i in 0..n {
                    for j in 0..i {
                        let scale = 1.0 + matrix[i][j].abs().max(matrix[j][i].abs());
                        if (matrix[i][j] - matrix[j][i]).abs() > 1e-12 * scale {
                            return Err(Error::InvalidInput("quadratic matrix is not symmetric".into()));
                        }
                    }
                }
                let q = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
                let min_eig = q.symmetric_eigenvalues().min();
                let scale = q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if min_eig < -1e-12 * (1.0 + scale) {
                    return Err(Error::InvalidInput(format!(
                        "quadratic matrix is not positive semi-definite (eigenvalue {min_eig:e})"
                    )));
                }
            }
            Shape::PiecewiseLinear { pieces } => {
                if pieces.iter().any(|(a, s)| s.len() != n || !a.is_finite() || !finite(s)) {
                    return Err(Error::InvalidInput("malformed affine piece".into()));
                }
            }
            Shape::ExpLinear { scale, rate, shift, linear } => {
                if rate.len() != n || shift.len() != n || linear.len() != n {
                    return Err(Error::DimensionMismatch("exponential-plus-linear coefficients".into()));
                }
                if !finite(scale) || !finite(rate) || !finite(shift) || !finite(linear) {
                    return Err(Error::InvalidInput("non-finite exponential coefficient".into()));
                }
                if scale.iter().any(|b| *b < 0.0) || rate.iter().any(|l| *l <= 0.0) {
                    return Err(Error::InvalidInput("exponential terms need scale ≥ 0 and rate > 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.offset
            + match &self.shape {
                Shape::Quadratic { matrix, center, linear } => {
                    let d: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                    let quad: f64 = matrix.iter().zip(&d).map(|(row, di)| di * dot(row, &d)).sum();
                    quad + dot(linear, x)
                }
                Shape::PiecewiseLinear { pieces } => pieces
                    .iter()
                    .map(|(a, s)| a + dot(s, x))
                    .fold(f64::NEG_INFINITY, f64::max),
                Shape::ExpLinear { scale, rate, shift, linear } => {
                    let exp: f64 = (0..x.len())
                        .map(|j| scale[j] * (-rate[j] * (x[j] - shift[j])).exp())
                        .sum();
                    exp + dot(linear, x)
                }
            }
    }

    /// A subgradient; the gradient where the function is differentiable.
    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.shape {
            Shape::Quadratic { matrix, center, linear } => {
                let d: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                matrix.iter().zip(linear).map(|(row, l)| 2.0 * dot(row, &d) + l).collect()
            }
            Shape::PiecewiseLinear { pieces } => {
                let mut best = 0;
                let mut best_v = f64::NEG_INFINITY;
                for (p, (a, s)) in pieces.iter().enumerate() {
                    let v = a + dot(s, x);
                    if v > best_v {
                        best_v = v;
                        best = p;
                    }
                }
                pieces[best].1.clone()
            }
            Shape::ExpLinear { scale, rate, shift, linear } => (0..x.len())
                .map(|j| -rate[j] * scale[j] * (-rate[j] * (x[j] - shift[j])).exp() + linear[j])
                .collect(),
        }
    }

    /// Hessian for smooth families; `None` for piecewise-linear functions.
    pub fn hessian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let n = x.len();
        match &self.shape {
            Shape::Quadratic { matrix, .. } => Some(DMatrix::from_fn(n, n, |i, j| 2.0 * matrix[i][j])),
            Shape::PiecewiseLinear { .. } => None,
            Shape::ExpLinear { scale, rate, shift, .. } => Some(DMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    rate[i] * rate[i] * scale[i] * (-rate[i] * (x[i] - shift[i])).exp()
                } else {
                    0.0
                }
            })),
        }
    }

    pub fn is_strictly_convex(&self) -> bool {
        match &self.shape {
            Shape::Quadratic { matrix, .. } => {
                let n = matrix.len();
                DMatrix::from_fn(n, n, |i, j| matrix[i][j]).cholesky().is_some()
            }
            Shape::PiecewiseLinear { .. } => false,
            Shape::ExpLinear { scale, .. } => scale.iter().all(|b| *b > 0.0),
        }
    }

    /// `x ↦ self(x - anchor) + extra·x`, expressed in the same family.
    pub fn anchored(&self, anchor: &[f64], extra_linear: &[f64]) -> Self {
        let shape = match &self.shape {
            Shape::Quadratic { matrix, center, linear } => Shape::Quadratic {
                matrix: matrix.clone(),
                center: center.iter().zip(anchor).map(|(c, a)| c + a).collect(),
                linear: linear.iter().zip(extra_linear).map(|(l, k)| l + k).collect(),
            },
            Shape::PiecewiseLinear { pieces } => Shape::PiecewiseLinear {
                pieces: pieces
                    .iter()
                    .map(|(a, s)| {
                        (a - dot(s, anchor), s.iter().zip(extra_linear).map(|(b, k)| b + k).collect())
                    })
                    .collect(),
            },
            Shape::ExpLinear { scale, rate, shift, linear } => Shape::ExpLinear {
                scale: scale.clone(),
                rate: rate.clone(),
                shift: shift.iter().zip(anchor).map(|(s, a)| s + a).collect(),
                linear: linear.iter().zip(extra_linear).map(|(l, k)| l + k).collect(),
            },
        };
        let linear_shift = match &self.shape {
            Shape::Quadratic { linear, .. } | Shape::ExpLinear { linear, .. } => -dot(linear, anchor),
            Shape::PiecewiseLinear { .. } => 0.0,
        };
        Self { shape, offset: self.offset + linear_shift }
    }

    /// Minimizer and minimum over the box `[lower, upper]`.
    pub fn box_minimum(&self, lower: &[f64], upper: &[f64]) -> Result<(Vec<f64>, f64)> {
        let x = match &self.shape {
            Shape::Quadratic { matrix, center, linear } => quadratic_box_min(matrix, center, linear, lower, upper)?,
            Shape::ExpLinear { scale, rate, shift, linear } => (0..lower.len())
                .map(|j| exp_linear_argmin(scale[j], rate[j], shift[j], linear[j], lower[j], upper[j]))
                .collect(),
            Shape::PiecewiseLinear { pieces } => {
                let cuts: Vec<AffineCut> = pieces
                    .iter()
                    .map(|(a, s)| AffineCut { intercept: *a, slope: s.clone(), owner: 0 })
                    .collect();
                minimize_max_affine(&cuts, lower, upper)?.x
            }
        };
        let v = self.value(&x);
        Ok((x, v))
    }

    /// Unconstrained minimizer, when it exists and has a closed form.
    pub fn unconstrained_minimum(&self) -> Option<(Vec<f64>, f64)> {
        let x = match &self.shape {
            Shape::Quadratic { matrix, center, linear } => {
                // 2Q(x - c) + l = 0
                let n = center.len();
                let q = DMatrix::from_fn(n, n, |i, j| 2.0 * matrix[i][j]);
                let rhs = DVector::from_fn(n, |i, _| -linear[i]);
                let d = q.cholesky()?.solve(&rhs);
                center.iter().zip(d.iter()).map(|(c, di)| c + di).collect()
            }
            Shape::ExpLinear { scale, rate, shift, linear } => {
                let mut x = Vec::with_capacity(scale.len());
                for j in 0..scale.len() {
                    if scale[j] <= 0.0 || linear[j] <= 0.0 {
                        return None;
                    }
                    x.push(shift[j] + (rate[j] * scale[j] / linear[j]).ln() / rate[j]);
                }
                x
            }
            Shape::PiecewiseLinear { .. } => return None,
        };
        let v = self.value(&x);
        Some((x, v))
    }
}

/// Minimizer of `b·exp(-λ(y - a)) + k·y` on `[lo, hi]`.
pub(crate) fn exp_linear_argmin(b: f64, rate: f64, a: f64, k: f64, lo: f64, hi: f64) -> f64 {
    if b == 0.0 {
        return if k < 0.0 { hi } else { lo };
    }
    if k <= 0.0 {
        return hi;
    }
    (a + (rate * b / k).ln() / rate).clamp(lo, hi)
}

fn quadratic_box_min(
    matrix: &[Vec<f64>],
    center: &[f64],
    linear: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Result<Vec<f64>> {
    let n = center.len();
    let inside = |x: &[f64]| x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| *v >= *l && *v <= *u);
    let q = DMatrix::from_fn(n, n, |i, j| 2.0 * matrix[i][j]);
    if let Some(chol) = q.clone().cholesky() {
        let d = chol.solve(&DVector::from_fn(n, |i, _| -linear[i]));
        let x: Vec<f64> = center.iter().zip(d.iter()).map(|(c, di)| c + di).collect();
        if inside(&x) {
            return Ok(x);
        }
    }
    // Cyclic coordinate descent; each coordinate step is an exact clamped minimization.
    let mut x: Vec<f64> = center.iter().zip(lower.iter().zip(upper)).map(|(c, (l, u))| c.clamp(*l, *u)).collect();
    let width = lower.iter().zip(upper).map(|(l, u)| u - l).fold(0.0, f64::max);
    for _ in 0..200_000 {
        let mut moved = 0.0f64;
        for j in 0..n {
            let grad: f64 = 2.0 * (0..n).map(|k| matrix[j][k] * (x[k] - center[k])).sum::<f64>() + linear[j];
            let curv = 2.0 * matrix[j][j];
            let next = if curv > 0.0 {
                (x[j] - grad / curv).clamp(lower[j], upper[j])
            } else if grad > 0.0 {
                lower[j]
            } else if grad < 0.0 {
                upper[j]
            } else {
                x[j]
            };
            moved = moved.max((next - x[j]).abs());
            x[j] = next;
        }
        if moved <= 1e-15 * (1.0 + width) {
            return Ok(x);
        }
    }
    Err(Error::NumericFailure("box-constrained quadratic minimization did not converge".into()))
}
