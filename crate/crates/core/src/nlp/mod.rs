//! Problems of the form `min f(x)  s.t.  g(x) = 0,  x ≥ ℓ`, built from constraint blocks.
//!
//! Derivatives are exchanged as values aligned with structures declared up front
//! ([`NlpProblem::jacobian_structure`], [`NlpProblem::hessian_structure`]). Hessian
//! structures are lower triangular in global indices and may repeat a position across
//! blocks; repeated positions are summed by consumers.

mod block;
mod objective;
mod slack;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

pub use block::{BlockOracle, ConstraintBlock, Pattern, TripletSink};
pub use objective::{Objective, QuadraticObjective};
pub use slack::RowSense;

use crate::clock::{Category, Timer};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct VarSpec {
    pub name: String,
    /// Lower bound, or `-∞` for a free variable.
    pub lower: f64,
    pub init: f64,
}

impl VarSpec {
    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite()
    }
}

pub type BlockId = usize;

/// Slack variables introduced for an inequality block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackHandle {
    pub block: BlockId,
    pub slacks: Range<usize>,
}

/// Values of every oracle at one point, with derivatives as global triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub f: f64,
    pub grad_f: Vec<f64>,
    pub g: Vec<f64>,
    pub jac: Vec<(usize, usize, f64)>,
    pub hess: Vec<(usize, usize, f64)>,
}

pub struct NlpProblem {
    vars: Vec<VarSpec>,
    blocks: Vec<ConstraintBlock>,
    row_offsets: Vec<usize>,
    n_con: usize,
    objective: Box<dyn Objective>,
    objective_hess: Pattern,
}

impl core::fmt::Debug for NlpProblem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("NlpProblem")
            .field("n_var", &self.n_var())
            .field("n_con", &self.n_con)
            .field("blocks", &self.blocks)
            .finish()
    }
}

impl Default for NlpProblem {
    fn default() -> Self {
        Self::new()
    }
}

impl NlpProblem {
    /// An empty problem with a zero objective.
    pub fn new() -> Self {
        Self {
            vars: Vec::new(),
            blocks: Vec::new(),
            row_offsets: Vec::new(),
            n_con: 0,
            objective: Box::new(QuadraticObjective::default()),
            objective_hess: Pattern::default(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, init: f64) -> usize {
        self.vars.push(VarSpec {
            name: name.into(),
            lower,
            init,
        });
        self.vars.len() - 1
    }

    /// Adds `inits.len()` variables named `prefix[i]` sharing one lower bound.
    pub fn add_vars(&mut self, prefix: &str, lower: f64, inits: &[f64]) -> Range<usize> {
        let start = self.vars.len();
        for (i, &v) in inits.iter().enumerate() {
            self.add_var(format!("{prefix}[{i}]"), lower, v);
        }
        start..self.vars.len()
    }

    pub fn set_lower(&mut self, var: usize, lower: f64) {
        self.vars[var].lower = lower;
    }

    pub fn set_init(&mut self, var: usize, value: f64) {
        self.vars[var].init = value;
    }

    pub fn set_objective<O: Objective + 'static>(&mut self, objective: O) -> Result<()> {
        if let Some(i) = objective.max_index() {
            if i >= self.n_var() {
                return Err(Error::VariableOutOfRange {
                    index: i,
                    n_var: self.n_var(),
                });
            }
        }
        let pattern = objective.hessian_pattern();
        for &(i, j) in &pattern {
            if j > i || i >= self.n_var() {
                return Err(Error::InvalidPattern {
                    block: usize::MAX,
                    row: i,
                    col: j,
                });
            }
        }
        self.objective_hess = Pattern::new(pattern);
        self.objective = Box::new(objective);
        Ok(())
    }

    pub fn add_block(&mut self, block: ConstraintBlock) -> Result<BlockId> {
        let id = self.blocks.len();
        block.validate(id, self.n_var())?;
        self.row_offsets.push(self.n_con);
        self.n_con += block.arity;
        self.blocks.push(block);
        Ok(id)
    }

    /// Adds an inequality block, one nonnegative slack per row, as equalities.
    ///
    /// Row `i` becomes `h_i + s_i - c = 0` for `h_i ≤ c` and `h_i - s_i - c = 0` for `h_i ≥ c`.
    /// Slacks start at the value that makes the row hold at the current initial point,
    /// clipped at zero.
    pub fn add_inequality_as_slack(
        &mut self,
        block: ConstraintBlock,
        senses: Vec<RowSense>,
    ) -> Result<SlackHandle> {
        if senses.len() != block.arity {
            return Err(Error::DimensionMismatch {
                context: "inequality senses",
                expected: block.arity,
                got: senses.len(),
            });
        }
        block.validate(self.blocks.len(), self.n_var())?;
        let local: Vec<f64> = block.deps.iter().map(|&d| self.vars[d].init).collect();
        let mut h = vec![0.0; block.arity];
        block.oracle.residual(&local, &mut h);

        let start = self.n_var();
        for (i, (&hi, sense)) in h.iter().zip(&senses).enumerate() {
            let s = sense.slack_for(hi);
            let init = if s.is_finite() { s.max(0.0) } else { 0.0 };
            self.add_var(format!("{}.slack[{i}]", block.name), 0.0, init);
        }
        let slacks = start..self.n_var();

        let n_inner = block.deps.len();
        let mut deps = block.deps;
        deps.extend(slacks.clone());
        let mut jac = block.jac.entries().to_vec();
        jac.extend((0..block.arity).map(|i| (i, n_inner + i)));
        let wrapped = ConstraintBlock::new(
            block.name,
            deps,
            block.arity,
            jac,
            block.hess.entries().to_vec(),
            Box::new(slack::SlackedOracle {
                inner: block.oracle,
                senses,
                n_inner,
            }),
        );
        let id = self.add_block(wrapped)?;
        Ok(SlackHandle { block: id, slacks })
    }

    /// `x_var ≤ upper`, as `x_var + s - upper = 0` with `s ≥ 0`.
    pub fn add_upper_bounds(
        &mut self,
        name: &str,
        vars: &[usize],
        upper: &[f64],
    ) -> Result<SlackHandle> {
        let rows = (0..vars.len()).map(|i| vec![(i, 1.0)]).collect();
        let block = ConstraintBlock::linear(name, vars.to_vec(), rows, vec![0.0; vars.len()]);
        let senses = upper.iter().map(|&u| RowSense::AtMost(u)).collect();
        self.add_inequality_as_slack(block, senses)
    }

    pub fn n_var(&self) -> usize {
        self.vars.len()
    }

    pub fn n_con(&self) -> usize {
        self.n_con
    }

    pub fn vars(&self) -> &[VarSpec] {
        &self.vars
    }

    pub fn blocks(&self) -> &[ConstraintBlock] {
        &self.blocks
    }

    /// First global row of each block.
    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn lower_bounds(&self) -> Vec<f64> {
        self.vars.iter().map(|v| v.lower).collect()
    }

    pub fn initial_point(&self) -> Vec<f64> {
        self.vars.iter().map(|v| v.init).collect()
    }

    /// Global `(row, col)` of every Jacobian value, block by block.
    pub fn jacobian_structure(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.jacobian_nnz());
        for (block, &off) in self.blocks.iter().zip(&self.row_offsets) {
            out.extend(
                block
                    .jac
                    .entries()
                    .iter()
                    .map(|&(r, c)| (off + r, block.deps[c])),
            );
        }
        out
    }

    /// Global lower-triangular `(row, col)` of every Hessian value: objective first, then blocks.
    pub fn hessian_structure(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self.objective_hess.entries().to_vec();
        for block in &self.blocks {
            out.extend(block.hess.entries().iter().map(|&(i, j)| {
                let (a, b) = (block.deps[i], block.deps[j]);
                if a >= b {
                    (a, b)
                } else {
                    (b, a)
                }
            }));
        }
        out
    }

    pub fn jacobian_nnz(&self) -> usize {
        self.blocks.iter().map(|b| b.jac.len()).sum()
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_var() {
            return Err(Error::DimensionMismatch {
                context: "primal point",
                expected: self.n_var(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn gather(block: &ConstraintBlock, x: &[f64]) -> Vec<f64> {
        block.deps.iter().map(|&d| x[d]).collect()
    }

    fn block_error(&self, id: usize) -> Error {
        Error::NonFiniteOracle {
            source_name: format!("block {id} ({})", self.blocks[id].name),
        }
    }

    pub fn eval_objective(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        let f = self.objective.value(x);
        if !f.is_finite() {
            return Err(Error::NonFiniteOracle {
                source_name: "objective".into(),
            });
        }
        Ok(f)
    }

    pub fn eval_gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<()> {
        self.check_len(x)?;
        grad.iter_mut().for_each(|g| *g = 0.0);
        self.objective.gradient(x, grad);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteOracle {
                source_name: "objective gradient".into(),
            });
        }
        Ok(())
    }

    pub fn eval_constraints(&self, x: &[f64], g: &mut [f64]) -> Result<()> {
        self.check_len(x)?;
        for (id, (block, &off)) in self.blocks.iter().zip(&self.row_offsets).enumerate() {
            let local = Self::gather(block, x);
            let out = &mut g[off..off + block.arity];
            block.oracle.residual(&local, out);
            if out.iter().any(|v| !v.is_finite()) {
                return Err(self.block_error(id));
            }
        }
        Ok(())
    }

    /// Jacobian values aligned with [`Self::jacobian_structure`].
    pub fn eval_jacobian(&self, x: &[f64], values: &mut [f64]) -> Result<()> {
        self.check_len(x)?;
        let mut start = 0;
        for (id, block) in self.blocks.iter().enumerate() {
            let local = Self::gather(block, x);
            let out = &mut values[start..start + block.jac.len()];
            let mut sink = TripletSink::new(&block.jac, out);
            block.oracle.jacobian(&local, &mut sink);
            if let Some((row, col)) = sink.violation() {
                return Err(Error::PatternViolation {
                    block: id,
                    row,
                    col,
                });
            }
            if out.iter().any(|v| !v.is_finite()) {
                return Err(self.block_error(id));
            }
            start += block.jac.len();
        }
        Ok(())
    }

    /// `obj_factor·∇²f + Σ λ_i ∇²g_i` values aligned with [`Self::hessian_structure`].
    pub fn eval_hessian(
        &self,
        x: &[f64],
        obj_factor: f64,
        lambda: &[f64],
        values: &mut [f64],
    ) -> Result<()> {
        self.check_len(x)?;
        if lambda.len() != self.n_con {
            return Err(Error::DimensionMismatch {
                context: "constraint multipliers",
                expected: self.n_con,
                got: lambda.len(),
            });
        }
        let n_obj = self.objective_hess.len();
        {
            let out = &mut values[..n_obj];
            let mut sink = TripletSink::new(&self.objective_hess, out);
            self.objective.hessian(x, obj_factor, &mut sink);
            if let Some((row, col)) = sink.violation() {
                return Err(Error::PatternViolation {
                    block: usize::MAX,
                    row,
                    col,
                });
            }
        }
        let mut start = n_obj;
        for (id, (block, &off)) in self.blocks.iter().zip(&self.row_offsets).enumerate() {
            let len = block.hess.len();
            if len == 0 {
                continue;
            }
            let local = Self::gather(block, x);
            let out = &mut values[start..start + len];
            let mut sink = TripletSink::new(&block.hess, out);
            block
                .oracle
                .hessian(&local, &lambda[off..off + block.arity], &mut sink);
            if let Some((row, col)) = sink.violation() {
                return Err(Error::PatternViolation {
                    block: id,
                    row,
                    col,
                });
            }
            if out.iter().any(|v| !v.is_finite()) {
                return Err(self.block_error(id));
            }
            start += len;
        }
        Ok(())
    }

    /// Evaluates every oracle at `(x, λ)`, charging wall time to the timer's categories.
    pub fn eval_all(&self, x: &[f64], lambda: &[f64], timer: &mut Timer<'_>) -> Result<Evaluation> {
        let mut g = vec![0.0; self.n_con];
        let f = timer.time(Category::Function, || -> Result<f64> {
            let f = self.eval_objective(x)?;
            self.eval_constraints(x, &mut g)?;
            Ok(f)
        })?;
        let mut grad_f = vec![0.0; self.n_var()];
        let jac_s = self.jacobian_structure();
        let mut jac_v = vec![0.0; jac_s.len()];
        timer.time(Category::Jacobian, || -> Result<()> {
            self.eval_gradient(x, &mut grad_f)?;
            self.eval_jacobian(x, &mut jac_v)
        })?;
        let hess_s = self.hessian_structure();
        let mut hess_v = vec![0.0; hess_s.len()];
        timer.time(Category::Hessian, || {
            self.eval_hessian(x, 1.0, lambda, &mut hess_v)
        })?;
        Ok(Evaluation {
            f,
            grad_f,
            g,
            jac: zip_triplets(&jac_s, &jac_v),
            hess: zip_triplets(&hess_s, &hess_v),
        })
    }
}

fn zip_triplets(structure: &[(usize, usize)], values: &[f64]) -> Vec<(usize, usize, f64)> {
    structure
        .iter()
        .zip(values)
        .map(|(&(r, c), &v)| (r, c, v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::NullClock;

    struct Square;

    impl BlockOracle for Square {
        fn residual(&self, x: &[f64], out: &mut [f64]) {
            out[0] = x[0] * x[0] + x[1] - 1.0;
        }
        fn jacobian(&self, x: &[f64], out: &mut TripletSink<'_>) {
            out.add(0, 0, 2.0 * x[0]);
            out.add(0, 1, 1.0);
        }
        fn hessian(&self, _x: &[f64], lambda: &[f64], out: &mut TripletSink<'_>) {
            out.add(0, 0, 2.0 * lambda[0]);
        }
    }

    struct Rogue;

    impl BlockOracle for Rogue {
        fn residual(&self, x: &[f64], out: &mut [f64]) {
            out[0] = x[0];
        }
        fn jacobian(&self, _x: &[f64], out: &mut TripletSink<'_>) {
            out.add(0, 1, 1.0);
        }
        fn hessian(&self, _x: &[f64], _lambda: &[f64], _out: &mut TripletSink<'_>) {}
    }

    struct NanBlock;

    impl BlockOracle for NanBlock {
        fn residual(&self, _x: &[f64], out: &mut [f64]) {
            out[0] = f64::NAN;
        }
        fn jacobian(&self, _x: &[f64], out: &mut TripletSink<'_>) {
            out.add(0, 0, 1.0);
        }
        fn hessian(&self, _x: &[f64], _lambda: &[f64], _out: &mut TripletSink<'_>) {}
    }

    #[test]
    fn scalar_quadratic_without_constraints() {
        let mut p = NlpProblem::new();
        p.add_var("x", f64::NEG_INFINITY, 0.0);
        p.set_objective(QuadraticObjective::new(0.0, vec![], vec![(0, 0, 2.0)]).unwrap())
            .unwrap();
        let clock = NullClock;
        let mut timer = Timer::new(&clock);
        let e = p.eval_all(&[3.0], &[], &mut timer).unwrap();
        assert_eq!(e.f, 9.0);
        assert_eq!(e.grad_f, vec![6.0]);
        assert!(e.g.is_empty() && e.jac.is_empty());
        assert_eq!(e.hess, vec![(0, 0, 2.0)]);
    }

    #[test]
    fn disjoint_blocks_sum_jacobian_nnz() {
        let mut p = NlpProblem::new();
        p.add_vars("x", f64::NEG_INFINITY, &[0.0; 4]);
        let a = ConstraintBlock::linear("a", vec![0, 1], vec![vec![(0, 1.0), (1, 1.0)]], vec![0.0]);
        let b = ConstraintBlock::linear(
            "b",
            vec![1, 2, 3],
            vec![vec![(0, 1.0)], vec![(1, 2.0), (2, -1.0)]],
            vec![0.0, 1.0],
        );
        p.add_block(a).unwrap();
        p.add_block(b).unwrap();
        assert_eq!(p.n_con(), 3);
        assert_eq!(p.jacobian_nnz(), 5);
        let clock = NullClock;
        let e = p
            .eval_all(&[1.0, 2.0, 3.0, 4.0], &[0.0; 3], &mut Timer::new(&clock))
            .unwrap();
        assert_eq!(e.jac.len(), 5);
        assert_eq!(e.g, vec![3.0, 2.0, 3.0]);
        assert_eq!(e.jac[2], (1, 1, 1.0));
    }

    #[test]
    fn slack_rows_for_both_senses() {
        let mut p = NlpProblem::new();
        p.add_vars("x", f64::NEG_INFINITY, &[0.8, 0.1]);
        let ge = ConstraintBlock::linear("ge", vec![0], vec![vec![(0, 1.0)]], vec![0.0]);
        let h = p
            .add_inequality_as_slack(ge, vec![RowSense::AtLeast(0.6)])
            .unwrap();
        assert_eq!(h.slacks, 2..3);
        assert!((p.vars()[2].init - 0.2).abs() < 1e-15);
        assert_eq!(p.vars()[2].lower, 0.0);

        let le =
            ConstraintBlock::linear("le", vec![0, 1], vec![vec![(0, 1.0), (1, 1.0)]], vec![0.0]);
        p.add_inequality_as_slack(le, vec![RowSense::AtMost(1.0)])
            .unwrap();
        let mut g = vec![0.0; 2];
        // x1 = 0.8, x2 = 0.1, s_ge = 0.3, s_le = 0.5
        p.eval_constraints(&[0.8, 0.1, 0.3, 0.5], &mut g).unwrap();
        assert!((g[0] - (0.8 - 0.3 - 0.6)).abs() < 1e-15);
        assert!((g[1] - (0.8 + 0.1 + 0.5 - 1.0)).abs() < 1e-15);
        let s = p.jacobian_structure();
        assert_eq!(s, vec![(0, 0), (0, 2), (1, 0), (1, 1), (1, 3)]);
        let mut v = vec![0.0; 5];
        p.eval_jacobian(&[0.8, 0.1, 0.3, 0.5], &mut v).unwrap();
        assert_eq!(v, vec![1.0, -1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn slack_arity_bookkeeping() {
        let mut p = NlpProblem::new();
        p.add_vars("x", 0.0, &[0.5; 3]);
        let block = ConstraintBlock::linear(
            "three",
            vec![0, 1, 2],
            vec![vec![(0, 1.0)], vec![(1, 1.0)], vec![(2, 1.0)]],
            vec![0.0; 3],
        );
        let (n_var, n_con) = (p.n_var(), p.n_con());
        p.add_inequality_as_slack(block, vec![RowSense::AtMost(1.0); 3])
            .unwrap();
        assert_eq!(p.n_var(), n_var + 3);
        assert_eq!(p.n_con(), n_con + 3);
    }

    #[test]
    fn pattern_violation_reported() {
        let mut p = NlpProblem::new();
        p.add_vars("x", 0.0, &[0.5; 2]);
        p.add_block(ConstraintBlock::new(
            "rogue",
            vec![0, 1],
            1,
            vec![(0, 0)],
            vec![],
            Box::new(Rogue),
        ))
        .unwrap();
        let mut v = vec![0.0; 1];
        assert_eq!(
            p.eval_jacobian(&[0.5, 0.5], &mut v),
            Err(Error::PatternViolation {
                block: 0,
                row: 0,
                col: 1
            })
        );
    }

    #[test]
    fn non_finite_oracle_names_block() {
        let mut p = NlpProblem::new();
        p.add_vars("x", 0.0, &[0.5]);
        p.add_block(ConstraintBlock::new(
            "bad",
            vec![0],
            1,
            vec![(0, 0)],
            vec![],
            Box::new(NanBlock),
        ))
        .unwrap();
        let mut g = vec![0.0];
        match p.eval_constraints(&[0.5], &mut g) {
            Err(Error::NonFiniteOracle { source_name }) => assert!(source_name.contains("bad")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_blocks_rejected() {
        let mut p = NlpProblem::new();
        p.add_vars("x", 0.0, &[0.5; 2]);
        let out_of_range = ConstraintBlock::linear("o", vec![5], vec![vec![(0, 1.0)]], vec![0.0]);
        assert!(matches!(
            p.add_block(out_of_range),
            Err(Error::VariableOutOfRange { .. })
        ));
        let dup = ConstraintBlock::new(
            "d",
            vec![0, 1],
            1,
            vec![(0, 0), (0, 0)],
            vec![],
            Box::new(Rogue),
        );
        assert!(matches!(
            p.add_block(dup),
            Err(Error::DuplicatePattern { .. })
        ));
        let upper = ConstraintBlock::new(
            "u",
            vec![0, 1],
            1,
            vec![(0, 0)],
            vec![(0, 1)],
            Box::new(Square),
        );
        assert!(matches!(
            p.add_block(upper),
            Err(Error::InvalidPattern { .. })
        ));
    }

    #[test]
    fn hessian_structure_normalizes_to_lower() {
        let mut p = NlpProblem::new();
        p.add_vars("x", 0.0, &[0.5; 3]);
        // deps reversed: local (1,0) maps to global (0,2) -> normalized (2,0)
        struct Cross;
        impl BlockOracle for Cross {
            fn residual(&self, x: &[f64], out: &mut [f64]) {
                out[0] = x[0] * x[1];
            }
            fn jacobian(&self, x: &[f64], out: &mut TripletSink<'_>) {
                out.add(0, 0, x[1]);
                out.add(0, 1, x[0]);
            }
            fn hessian(&self, _x: &[f64], l: &[f64], out: &mut TripletSink<'_>) {
                out.add(1, 0, l[0]);
            }
        }
        p.add_block(ConstraintBlock::new(
            "c",
            vec![2, 0],
            1,
            vec![(0, 0), (0, 1)],
            vec![(1, 0)],
            Box::new(Cross),
        ))
        .unwrap();
        assert_eq!(p.hessian_structure(), vec![(2, 0)]);
        let mut v = vec![0.0];
        p.eval_hessian(&[1.0, 2.0, 3.0], 1.0, &[2.5], &mut v)
            .unwrap();
        assert_eq!(v, vec![2.5]);
    }
}
