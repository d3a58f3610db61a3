use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Mat;
use crate::math::{exp, tanh};
use crate::{Error, Result};

/// Activation applied after a layer's affine map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Linear,
    Tanh,
    Sigmoid,
    /// Vector-valued; only allowed on the final layer.
    Softmax,
}

impl Activation {
    /// Code used by the binary weight format.
    pub fn code(self) -> u8 {
        match self {
            Activation::Linear => 0,
            Activation::Tanh => 1,
            Activation::Sigmoid => 2,
            Activation::Softmax => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Linear),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Sigmoid),
            3 => Some(Activation::Softmax),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
            Activation::Softmax => "softmax",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "linear" | "identity" => Some(Activation::Linear),
            "tanh" => Some(Activation::Tanh),
            "sigmoid" => Some(Activation::Sigmoid),
            "softmax" => Some(Activation::Softmax),
            _ => None,
        }
    }

    pub fn is_elementwise(self) -> bool {
        !matches!(self, Activation::Softmax)
    }

    /// Applies the activation to a whole pre-activation vector.
    pub fn apply(self, z: &[f64], out: &mut [f64]) {
        match self {
            Activation::Softmax => softmax(z, out),
            _ => {
                for (o, &v) in out.iter_mut().zip(z) {
                    *o = self.scalar(v).0;
                }
            }
        }
    }

    /// Value, first and second derivative of an elementwise activation.
    ///
    /// Panics for [`Activation::Softmax`].
    #[inline]
    pub fn scalar(self, z: f64) -> (f64, f64, f64) {
        match self {
            Activation::Linear => (z, 1.0, 0.0),
            Activation::Tanh => {
                let t = tanh(z);
                let d = 1.0 - t * t;
                (t, d, -2.0 * t * d)
            }
            Activation::Sigmoid => {
                let s = sigmoid(z);
                let d = s * (1.0 - s);
                (s, d, d * (1.0 - 2.0 * s))
            }
            Activation::Softmax => panic!("softmax is not elementwise"),
        }
    }

    /// Derivative given the activation's own output, for the elementwise kinds.
    #[inline]
    pub(crate) fn derivs_from_output(self, y: f64) -> (f64, f64) {
        match self {
            Activation::Linear => (1.0, 0.0),
            Activation::Tanh => {
                let d = 1.0 - y * y;
                (d, -2.0 * y * d)
            }
            Activation::Sigmoid => {
                let d = y * (1.0 - y);
                (d, d * (1.0 - 2.0 * y))
            }
            Activation::Softmax => panic!("softmax is not elementwise"),
        }
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

/// Max-shifted softmax.
pub fn softmax(z: &[f64], out: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &v) in out.iter_mut().zip(z) {
        *o = exp(v - max);
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Dense third-order array `t[i][j][k]`, cube of side `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.dim + j) * self.dim + k] = v;
    }
}

/// Softmax Jacobian `y_i (δ_ij - y_j)` from the output `y`.
pub fn softmax_jacobian(y: &[f64]) -> Mat {
    let m = y.len();
    let mut j = Mat::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            let delta = if a == b { 1.0 } else { 0.0 };
            j[(a, b)] = y[a] * (delta - y[b]);
        }
    }
    j
}

/// `∂²y_i / ∂z_j ∂z_k` of softmax, from the output `y`.
pub fn softmax_second(y: &[f64], i: usize, j: usize, k: usize) -> f64 {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    y[i] * ((d(i, k) - y[k]) * (d(i, j) - y[j]) - y[j] * (d(j, k) - y[k]))
}

/// Value, Jacobian and second-derivative tensor of an activation at `z`.
pub fn activation_value_jac_hess(kind: Activation, z: &[f64]) -> Result<(Vec<f64>, Mat, Tensor3)> {
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("activation input"));
    }
    let m = z.len();
    let mut value = vec![0.0; m];
    let mut hess = Tensor3::zeros(m);
    let jac = match kind {
        Activation::Softmax => {
            softmax(z, &mut value);
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        hess.set(i, j, k, softmax_second(&value, i, j, k));
                    }
                }
            }
            softmax_jacobian(&value)
        }
        _ => {
            let mut jac = Mat::zeros(m, m);
            for (i, &zi) in z.iter().enumerate() {
                let (v, d1, d2) = kind.scalar(zi);
                value[i] = v;
                jac[(i, i)] = d1;
                hess.set(i, i, i, d2);
            }
            jac
        }
    };
    Ok((value, jac, hess))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_at_zero() {
        let (v, j, h) = activation_value_jac_hess(Activation::Tanh, &[0.0, 0.0]).unwrap();
        assert_eq!(v, vec![0.0, 0.0]);
        assert_eq!(j, Mat::identity(2));
        assert_eq!(h, Tensor3::zeros(2));
    }

    #[test]
    fn sigmoid_at_zero() {
        let (v, j, h) = activation_value_jac_hess(Activation::Sigmoid, &[0.0]).unwrap();
        assert_eq!(v, vec![0.5]);
        assert_eq!(j[(0, 0)], 0.25);
        assert_eq!(h.get(0, 0, 0), 0.0);
    }

    #[test]
    fn softmax_derivatives_match_finite_differences() {
        let z = [0.3, -1.2, 0.8];
        let (_, jac, hess) = activation_value_jac_hess(Activation::Softmax, &z).unwrap();
        let h = 1e-5;
        let eval = |z: &[f64]| {
            let mut y = [0.0; 3];
            softmax(z, &mut y);
            y
        };
        for j in 0..3 {
            let mut zp = z;
            let mut zm = z;
            zp[j] += h;
            zm[j] -= h;
            let (yp, ym) = (eval(&zp), eval(&zm));
            let (_, jp, _) = activation_value_jac_hess(Activation::Softmax, &zp).unwrap();
            let (_, jm, _) = activation_value_jac_hess(Activation::Softmax, &zm).unwrap();
            for i in 0..3 {
                let fd = (yp[i] - ym[i]) / (2.0 * h);
                assert!((fd - jac[(i, j)]).abs() < 1e-6);
                for k in 0..3 {
                    // d/dz_j of J[i][k]
                    let fd2 = (jp[(i, k)] - jm[(i, k)]) / (2.0 * h);
                    assert!((fd2 - hess.get(i, k, j)).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn softmax_is_stable_for_large_inputs() {
        let mut y = [0.0; 3];
        softmax(&[1000.0, 1000.0, -1000.0], &mut y);
        assert!((y[0] - 0.5).abs() < 1e-15 && (y[1] - 0.5).abs() < 1e-15);
        assert!(y[2] >= 0.0);
    }

    #[test]
    fn codes_round_trip() {
        for a in [
            Activation::Linear,
            Activation::Tanh,
            Activation::Sigmoid,
            Activation::Softmax,
        ] {
            assert_eq!(Activation::from_code(a.code()), Some(a));
            assert_eq!(Activation::from_name(a.name()), Some(a));
        }
        assert_eq!(Activation::from_code(9), None);
    }
}
