//! Assembly and factorization of the primal-dual Newton system
//!
//! ```text
//! [ W + Σ + δ_w I     Jᵀ    ] [dx]     [ ∇f + Jᵀλ - μ X⁻¹e ]
//! [      J          -δ_c I  ] [dλ] = - [        g          ]
//! ```
//!
//! with `Σ = diag(z / (x - ℓ))` over bounded variables. Only the lower triangle is stored.

use alloc::vec::Vec;

use super::IpmOptions;
use crate::linalg::{Inertia, LdltFactorization, Mat};
use crate::math::abs;
use crate::Result;

/// Inputs of one Newton system.
pub struct KktInputs<'a> {
    pub n_var: usize,
    pub n_con: usize,
    pub hess: &'a [(usize, usize, f64)],
    pub jac: &'a [(usize, usize, f64)],
    pub lower: &'a [f64],
    pub x: &'a [f64],
    pub z: &'a [f64],
    pub lambda: &'a [f64],
    pub grad_f: &'a [f64],
    pub g: &'a [f64],
    pub mu: f64,
}

/// Lower-triangular KKT matrix without regularization, plus its right-hand side.
#[derive(Debug, Clone)]
pub struct KktSystem {
    pub n_var: usize,
    pub n_con: usize,
    pub matrix: Mat,
    pub rhs: Vec<f64>,
    /// Largest Hessian or Jacobian entry, at least 1; excludes the barrier diagonal.
    pub scale: f64,
}

/// Pivots below `KKT_ZERO_RTOL * scale` count as zero.
///
/// The barrier diagonal is left out of the scale because it grows without bound as `μ → 0`
/// and would otherwise swamp legitimate small pivots of the dual block.
pub const KKT_ZERO_RTOL: f64 = 1e-14;

/// Builds the unregularized system; regularization is applied per factorization attempt.
pub fn assemble_kkt(inp: &KktInputs<'_>) -> KktSystem {
    let (n, m) = (inp.n_var, inp.n_con);
    let dim = n + m;
    let mut k = Mat::zeros(dim, dim);
    let mut scale: f64 = 1.0;
    for &(_, _, v) in inp.hess.iter().chain(inp.jac) {
        scale = scale.max(abs(v));
    }
    for &(r, c, v) in inp.hess {
        let (r, c) = if r >= c { (r, c) } else { (c, r) };
        k[(r, c)] += v;
    }
    for i in 0..n {
        if inp.lower[i].is_finite() {
            k[(i, i)] += inp.z[i] / (inp.x[i] - inp.lower[i]);
        }
    }
    let mut rhs = Vec::with_capacity(dim);
    rhs.extend_from_slice(inp.grad_f);
    for &(r, c, v) in inp.jac {
        k[(n + r, c)] += v;
        rhs[c] += v * inp.lambda[r];
    }
    for i in 0..n {
        if inp.lower[i].is_finite() {
            rhs[i] -= inp.mu / (inp.x[i] - inp.lower[i]);
        }
    }
    rhs.extend_from_slice(inp.g);
    for v in rhs.iter_mut() {
        *v = -*v;
    }
    KktSystem {
        n_var: n,
        n_con: m,
        matrix: k,
        rhs,
        scale,
    }
}

impl KktSystem {
    pub fn dim(&self) -> usize {
        self.n_var + self.n_con
    }

    /// Copy of the matrix with `δ_w` added to the primal diagonal and `-δ_c` to the dual one.
    pub fn regularized(&self, delta_w: f64, delta_c: f64) -> Mat {
        let mut a = self.matrix.clone();
        if delta_w != 0.0 {
            for i in 0..self.n_var {
                a[(i, i)] += delta_w;
            }
        }
        if delta_c != 0.0 {
            for i in self.n_var..self.dim() {
                a[(i, i)] -= delta_c;
            }
        }
        a
    }

    /// `(K + diag(δ)) v` using the stored lower triangle.
    pub fn apply(&self, v: &[f64], delta_w: f64, delta_c: f64) -> Vec<f64> {
        let mut out = self.matrix.sym_lower_matvec(v);
        for i in 0..self.n_var {
            out[i] += delta_w * v[i];
        }
        for i in self.n_var..self.dim() {
            out[i] -= delta_c * v[i];
        }
        out
    }

    pub fn target_inertia(&self) -> Inertia {
        Inertia::new(self.n_var, self.n_con, 0)
    }

    /// Solves with one step of iterative refinement against the regularized matrix.
    pub fn solve(&self, reg: &Regularized) -> Result<Vec<f64>> {
        let mut x = reg.factor.solve(&self.rhs)?;
        let ax = self.apply(&x, reg.delta_w, reg.delta_c);
        let r: Vec<f64> = self.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = reg.factor.solve(&r)?;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        Ok(x)
    }
}

/// A factorization with the correct inertia and the regularization that produced it.
#[derive(Debug, Clone)]
pub struct Regularized {
    pub factor: LdltFactorization,
    pub delta_w: f64,
    pub delta_c: f64,
    pub attempts: usize,
}

/// Searches for the smallest `δ_w` on a geometric ladder that yields inertia `(n, m, 0)`.
///
/// `delta_w` starts at zero; if that fails it restarts from `last_delta / 3` (when a previous
/// solve needed regularization) or `opts.delta_init`, growing by `opts.delta_growth`. Zero
/// pivots switch on `δ_c = opts.delta_c`. `min_delta` forces a lower bound for retries.
pub fn inertia_correct(
    kkt: &KktSystem,
    opts: &IpmOptions,
    last_delta: f64,
    min_delta: f64,
) -> Result<Option<Regularized>> {
    let target = kkt.target_inertia();
    let mut delta_c = 0.0;
    let mut delta_w = min_delta;
    let mut attempts = 0;
    loop {
        attempts += 1;
        let factor = LdltFactorization::factor_lower_with_tolerance(
            kkt.regularized(delta_w, delta_c),
            KKT_ZERO_RTOL * kkt.scale,
        )?;
        let inertia = factor.inertia();
        if inertia == target {
            return Ok(Some(Regularized {
                factor,
                delta_w,
                delta_c,
                attempts,
            }));
        }
        if inertia.zero > 0 && delta_c == 0.0 && kkt.n_con > 0 {
            delta_c = opts.delta_c;
            continue;
        }
        delta_w = if delta_w == 0.0 {
            if last_delta > 0.0 {
                (last_delta / 3.0).max(opts.delta_init * 1e-16)
            } else {
                opts.delta_init
            }
        } else {
            delta_w * opts.delta_growth
        };
        if delta_w > opts.delta_max {
            return Ok(None);
        }
    }
}
