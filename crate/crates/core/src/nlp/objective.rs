use alloc::vec::Vec;

use super::{Pattern, TripletSink};
use crate::{Error, Result};

/// Objective callbacks over the full variable vector.
pub trait Objective: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    /// Writes the gradient into a zeroed buffer of length `n_var`.
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
    /// Adds `factor · ∇²f` entries (lower triangle, global indices).
    fn hessian(&self, x: &[f64], factor: f64, out: &mut TripletSink<'_>);
    fn hessian_pattern(&self) -> Vec<(usize, usize)>;
    /// Largest variable index referenced, if any.
    fn max_index(&self) -> Option<usize>;
}

/// `f(x) = c + lᵀx + ½ xᵀQx` with `Q` given by its lower triangle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadraticObjective {
    pub constant: f64,
    pub linear: Vec<(usize, f64)>,
    pub quadratic: Vec<(usize, usize, f64)>,
}

impl QuadraticObjective {
    pub fn new(
        constant: f64,
        linear: Vec<(usize, f64)>,
        quadratic: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(i, j, _) in &quadratic {
            if j > i {
                return Err(Error::InvalidSpec(alloc::format!(
                    "quadratic term ({i}, {j}) is not in the lower triangle"
                )));
            }
        }
        let p = Pattern::new(quadratic.iter().map(|&(i, j, _)| (i, j)).collect());
        if let Some((i, j)) = p.first_duplicate() {
            return Err(Error::InvalidSpec(alloc::format!(
                "quadratic term ({i}, {j}) listed twice"
            )));
        }
        Ok(Self {
            constant,
            linear,
            quadratic,
        })
    }

    pub fn linear(coeffs: Vec<(usize, f64)>) -> Self {
        Self {
            constant: 0.0,
            linear: coeffs,
            quadratic: Vec::new(),
        }
    }
}

impl Objective for QuadraticObjective {
    fn value(&self, x: &[f64]) -> f64 {
        let mut f = self.constant;
        for &(i, c) in &self.linear {
            f += c * x[i];
        }
        for &(i, j, q) in &self.quadratic {
            f += if i == j {
                0.5 * q * x[i] * x[i]
            } else {
                q * x[i] * x[j]
            };
        }
        f
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        for &(i, c) in &self.linear {
            grad[i] += c;
        }
        for &(i, j, q) in &self.quadratic {
            if i == j {
                grad[i] += q * x[i];
            } else {
                grad[i] += q * x[j];
                grad[j] += q * x[i];
            }
        }
    }

    fn hessian(&self, _x: &[f64], factor: f64, out: &mut TripletSink<'_>) {
        for &(i, j, q) in &self.quadratic {
            out.add(i, j, factor * q);
        }
    }

    fn hessian_pattern(&self) -> Vec<(usize, usize)> {
        self.quadratic.iter().map(|&(i, j, _)| (i, j)).collect()
    }

    fn max_index(&self) -> Option<usize> {
        self.linear
            .iter()
            .map(|&(i, _)| i)
            .chain(self.quadratic.iter().map(|&(i, _, _)| i))
            .max()
    }
}
