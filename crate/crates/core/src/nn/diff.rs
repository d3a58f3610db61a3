//! Reverse-mode Jacobians and forward-over-reverse Lagrangian Hessians.
//!
//! The Hessian of `λᵀ NN(x)` is obtained by differentiating the reverse sweep of the scalar
//! composite in `n` unit directions at once. The `m × n × n` tensor of per-output Hessians is
//! never formed.

use alloc::vec;
use alloc::vec::Vec;

use super::{Activation, Layer, NeuralNet};
use crate::linalg::Mat;
use crate::math::abs;
use crate::Result;

/// Reverse-propagates each row of `adj` (adjoints w.r.t. the activation output) through the
/// activation, in place.
fn activation_transpose_rows(act: Activation, y: &[f64], adj: &mut Mat) {
    match act {
        Activation::Softmax => {
            for r in 0..adj.rows() {
                let row = adj.row_mut(r);
                let s: f64 = row.iter().zip(y).map(|(a, b)| a * b).sum();
                for (a, &yi) in row.iter_mut().zip(y) {
                    *a = yi * (*a - s);
                }
            }
        }
        _ => {
            let d: Vec<f64> = y.iter().map(|&v| act.derivs_from_output(v).0).collect();
            for r in 0..adj.rows() {
                for (a, di) in adj.row_mut(r).iter_mut().zip(&d) {
                    *a *= di;
                }
            }
        }
    }
}

/// Vector version of [`activation_transpose_rows`].
fn activation_transpose(act: Activation, y: &[f64], adj: &[f64]) -> Vec<f64> {
    match act {
        Activation::Softmax => {
            let s: f64 = adj.iter().zip(y).map(|(a, b)| a * b).sum();
            adj.iter().zip(y).map(|(a, yi)| yi * (a - s)).collect()
        }
        _ => adj
            .iter()
            .zip(y)
            .map(|(a, &yi)| a * act.derivs_from_output(yi).0)
            .collect(),
    }
}

/// `Wᵀ A` where `A` has one row per output neuron of `layer`.
fn weight_transpose_times(layer: &Layer, a: &Mat) -> Mat {
    let w = layer.weight();
    let mut out = Mat::zeros(w.cols(), a.cols());
    for i in 0..w.rows() {
        let arow = a.row(i);
        for (j, &wij) in w.row(i).iter().enumerate() {
            if wij == 0.0 {
                continue;
            }
            for (o, &v) in out.row_mut(j).iter_mut().zip(arow) {
                *o += wij * v;
            }
        }
    }
    out
}

impl NeuralNet {
    /// `∂NN_i/∂x_j` as an `m × n` matrix, by one batched reverse sweep over all outputs.
    pub fn jacobian(&self, x: &[f64]) -> Result<Mat> {
        self.check_input(x)?;
        let tape = self.tape(x);
        let mut adj = Mat::identity(self.output_dim());
        for (l, layer) in self.layers.iter().enumerate().rev() {
            activation_transpose_rows(layer.activation(), &tape.post[l + 1], &mut adj);
            adj = adj.matmul(layer.weight());
        }
        Ok(adj)
    }

    /// Gradient of the scalar `λᵀ NN(x)`.
    pub fn weighted_gradient(&self, x: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        self.check_multipliers(lambda)?;
        let tape = self.tape(x);
        let mut adj = lambda.to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let a = activation_transpose(layer.activation(), &tape.post[l + 1], &adj);
            adj = layer.weight().matvec_t(&a);
        }
        Ok(adj)
    }

    /// `Σ_i λ_i ∇²NN_i(x)`, symmetrized.
    pub fn lagrangian_hessian(&self, x: &[f64], lambda: &[f64]) -> Result<Mat> {
        let (mut h, _) = self.lagrangian_hessian_raw(x, lambda)?;
        h.symmetrize();
        Ok(h)
    }

    /// Unsymmetrized Lagrangian Hessian and its largest asymmetry.
    pub fn lagrangian_hessian_raw(&self, x: &[f64], lambda: &[f64]) -> Result<(Mat, f64)> {
        self.check_input(x)?;
        self.check_multipliers(lambda)?;
        let h = self.hessian_directions(x, lambda, None);
        let mut asym: f64 = 0.0;
        for i in 0..h.rows() {
            for j in 0..i {
                asym = asym.max(abs(h[(i, j)] - h[(j, i)]));
            }
        }
        Ok((h, asym))
    }

    /// `(Σ_i λ_i ∇²NN_i(x)) v`.
    pub fn hessian_vector_product(&self, x: &[f64], lambda: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        self.check_multipliers(lambda)?;
        if v.len() != self.input_dim() {
            return Err(crate::Error::DimensionMismatch {
                context: "hessian-vector direction",
                expected: self.input_dim(),
                got: v.len(),
            });
        }
        let dirs = Mat::from_vec(v.len(), 1, v.to_vec())?;
        Ok(self.hessian_directions(x, lambda, Some(&dirs)).into_vec())
    }

    /// Forward-over-reverse products of the Lagrangian Hessian with the columns of `dirs`
    /// (`n × k`), or with the identity when `dirs` is `None`. Returns `n × k`.
    fn hessian_directions(&self, x: &[f64], lambda: &[f64], dirs: Option<&Mat>) -> Mat {
        let tape = self.tape(x);
        let n_layers = self.layers.len();

        // Tangents of the pre-activations, one column per direction.
        let mut pre_dot: Vec<Mat> = Vec::with_capacity(n_layers);
        let mut post_dot: Vec<Mat> = Vec::with_capacity(n_layers);
        for (l, layer) in self.layers.iter().enumerate() {
            let a_dot = match (l, dirs) {
                (0, None) => layer.weight().clone(),
                (0, Some(d)) => layer.weight().matmul(d),
                _ => layer.weight().matmul(&post_dot[l - 1]),
            };
            let y = &tape.post[l + 1];
            let mut y_dot = a_dot.clone();
            match layer.activation() {
                Activation::Softmax => {
                    for c in 0..y_dot.cols() {
                        let s: f64 = (0..y.len()).map(|i| y[i] * a_dot[(i, c)]).sum();
                        for i in 0..y.len() {
                            y_dot[(i, c)] = y[i] * (a_dot[(i, c)] - s);
                        }
                    }
                }
                act => {
                    for (i, &yi) in y.iter().enumerate() {
                        let d = act.derivs_from_output(yi).0;
                        for v in y_dot.row_mut(i) {
                            *v *= d;
                        }
                    }
                }
            }
            pre_dot.push(a_dot);
            post_dot.push(y_dot);
        }

        // Primal reverse sweep; adj_post[l] is the adjoint of layer l's output.
        let mut adj_post: Vec<Vec<f64>> = vec![Vec::new(); n_layers];
        let mut adj = lambda.to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            adj_post[l] = adj.clone();
            let a = activation_transpose(layer.activation(), &tape.post[l + 1], &adj);
            adj = layer.weight().matvec_t(&a);
        }

        // Tangent of the reverse sweep.
        let k = pre_dot[0].cols();
        let mut d_adj = Mat::zeros(self.output_dim(), k);
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let y = &tape.post[l + 1];
            let ybar = &adj_post[l];
            let a_dot = &pre_dot[l];
            let mut d_abar = Mat::zeros(y.len(), k);
            match layer.activation() {
                Activation::Softmax => {
                    let y_dot = &post_dot[l];
                    let s: f64 = y.iter().zip(ybar).map(|(a, b)| a * b).sum();
                    for c in 0..k {
                        let ds: f64 = (0..y.len())
                            .map(|i| y_dot[(i, c)] * ybar[i] + y[i] * d_adj[(i, c)])
                            .sum();
                        for i in 0..y.len() {
                            d_abar[(i, c)] =
                                y_dot[(i, c)] * (ybar[i] - s) + y[i] * (d_adj[(i, c)] - ds);
                        }
                    }
                }
                act => {
                    for i in 0..y.len() {
                        let (d1, d2) = act.derivs_from_output(y[i]);
                        let curv = d2 * ybar[i];
                        let out = d_abar.row_mut(i);
                        for ((o, &dy), &ad) in out.iter_mut().zip(d_adj.row(i)).zip(a_dot.row(i)) {
                            *o = d1 * dy + curv * ad;
                        }
                    }
                }
            }
            d_adj = weight_transpose_times(layer, &d_abar);
        }
        d_adj
    }
}
