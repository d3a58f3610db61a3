//! The oracle surface the solver iterates on, and the feasibility-restoration reformulation.

use alloc::vec::Vec;

use crate::nlp::NlpProblem;
use crate::Result;

pub(crate) trait Model {
    fn n_var(&self) -> usize;
    fn n_con(&self) -> usize;
    fn lower(&self) -> Vec<f64>;
    fn jac_structure(&self) -> Vec<(usize, usize)>;
    fn hess_structure(&self) -> Vec<(usize, usize)>;
    fn objective(&self, x: &[f64]) -> Result<f64>;
    fn constraints(&self, x: &[f64], g: &mut [f64]) -> Result<()>;
    fn gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<()>;
    fn jacobian(&self, x: &[f64], values: &mut [f64]) -> Result<()>;
    fn hessian(&self, x: &[f64], obj_factor: f64, lambda: &[f64], values: &mut [f64])
        -> Result<()>;
}

impl Model for NlpProblem {
    fn n_var(&self) -> usize {
        NlpProblem::n_var(self)
    }
    fn n_con(&self) -> usize {
        NlpProblem::n_con(self)
    }
    fn lower(&self) -> Vec<f64> {
        self.lower_bounds()
    }
    fn jac_structure(&self) -> Vec<(usize, usize)> {
        self.jacobian_structure()
    }
    fn hess_structure(&self) -> Vec<(usize, usize)> {
        self.hessian_structure()
    }
    fn objective(&self, x: &[f64]) -> Result<f64> {
        self.eval_objective(x)
    }
    fn constraints(&self, x: &[f64], g: &mut [f64]) -> Result<()> {
        self.eval_constraints(x, g)
    }
    fn gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<()> {
        self.eval_gradient(x, grad)
    }
    fn jacobian(&self, x: &[f64], values: &mut [f64]) -> Result<()> {
        self.eval_jacobian(x, values)
    }
    fn hessian(
        &self,
        x: &[f64],
        obj_factor: f64,
        lambda: &[f64],
        values: &mut [f64],
    ) -> Result<()> {
        self.eval_hessian(x, obj_factor, lambda, values)
    }
}

/// `min ½‖r‖²  s.t.  g(x) - r = 0`, `x ≥ ℓ`, `r` free: a least-squares feasibility problem
/// with the same sparsity as the original constraints.
pub(crate) struct Restoration<'a> {
    pub inner: &'a dyn Model,
}

impl Restoration<'_> {
    fn split<'x>(&self, x: &'x [f64]) -> (&'x [f64], &'x [f64]) {
        x.split_at(self.inner.n_var())
    }
}

impl Model for Restoration<'_> {
    fn n_var(&self) -> usize {
        self.inner.n_var() + self.inner.n_con()
    }
    fn n_con(&self) -> usize {
        self.inner.n_con()
    }
    fn lower(&self) -> Vec<f64> {
        let mut l = self.inner.lower();
        l.extend(core::iter::repeat_n(f64::NEG_INFINITY, self.inner.n_con()));
        l
    }
    fn jac_structure(&self) -> Vec<(usize, usize)> {
        let n = self.inner.n_var();
        let mut s = self.inner.jac_structure();
        s.extend((0..self.inner.n_con()).map(|i| (i, n + i)));
        s
    }
    fn hess_structure(&self) -> Vec<(usize, usize)> {
        let n = self.inner.n_var();
        let mut s = self.inner.hess_structure();
        s.extend((0..self.inner.n_con()).map(|i| (n + i, n + i)));
        s
    }
    fn objective(&self, x: &[f64]) -> Result<f64> {
        let (_, r) = self.split(x);
        Ok(0.5 * r.iter().map(|v| v * v).sum::<f64>())
    }
    fn constraints(&self, x: &[f64], g: &mut [f64]) -> Result<()> {
        let (xs, r) = self.split(x);
        self.inner.constraints(xs, g)?;
        for (gi, ri) in g.iter_mut().zip(r) {
            *gi -= ri;
        }
        Ok(())
    }
    fn gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<()> {
        let n = self.inner.n_var();
        grad.iter_mut().for_each(|v| *v = 0.0);
        grad[n..].copy_from_slice(&x[n..]);
        Ok(())
    }
    fn jacobian(&self, x: &[f64], values: &mut [f64]) -> Result<()> {
        let (xs, _) = self.split(x);
        let k = values.len() - self.inner.n_con();
        self.inner.jacobian(xs, &mut values[..k])?;
        values[k..].iter_mut().for_each(|v| *v = -1.0);
        Ok(())
    }
    fn hessian(
        &self,
        x: &[f64],
        obj_factor: f64,
        lambda: &[f64],
        values: &mut [f64],
    ) -> Result<()> {
        let (xs, _) = self.split(x);
        let k = values.len() - self.inner.n_con();
        self.inner.hessian(xs, 0.0, lambda, &mut values[..k])?;
        values[k..].iter_mut().for_each(|v| *v = obj_factor);
        Ok(())
    }
}
