use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{BlockOracle, TripletSink};

/// Sense of an inequality row `h_i(x) ≤ c` or `h_i(x) ≥ c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowSense {
    AtMost(f64),
    AtLeast(f64),
}

impl RowSense {
    pub fn bound(self) -> f64 {
        match self {
            RowSense::AtMost(c) | RowSense::AtLeast(c) => c,
        }
    }

    /// Slack value that makes the row hold with equality at `h`.
    pub fn slack_for(self, h: f64) -> f64 {
        match self {
            RowSense::AtMost(c) => c - h,
            RowSense::AtLeast(c) => h - c,
        }
    }

    fn slack_coeff(self) -> f64 {
        match self {
            RowSense::AtMost(_) => 1.0,
            RowSense::AtLeast(_) => -1.0,
        }
    }
}

/// Wraps an inequality block as `h(x) + s - c = 0` (≤) or `h(x) - s - c = 0` (≥).
///
/// The slack for row `i` is the local dependency `n_inner + i`.
pub(crate) struct SlackedOracle {
    pub inner: Box<dyn BlockOracle>,
    pub senses: Vec<RowSense>,
    pub n_inner: usize,
}

impl BlockOracle for SlackedOracle {
    fn residual(&self, x: &[f64], out: &mut [f64]) {
        self.inner.residual(&x[..self.n_inner], out);
        for (i, (o, sense)) in out.iter_mut().zip(&self.senses).enumerate() {
            *o += sense.slack_coeff() * x[self.n_inner + i] - sense.bound();
        }
    }

    fn jacobian(&self, x: &[f64], out: &mut TripletSink<'_>) {
        self.inner.jacobian(&x[..self.n_inner], out);
        for (i, sense) in self.senses.iter().enumerate() {
            out.add(i, self.n_inner + i, sense.slack_coeff());
        }
    }

    fn hessian(&self, x: &[f64], lambda: &[f64], out: &mut TripletSink<'_>) {
        self.inner.hessian(&x[..self.n_inner], lambda, out);
    }
}
