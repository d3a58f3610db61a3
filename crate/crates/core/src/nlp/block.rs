use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// A declared sparsity pattern: `(row, col)` pairs in emission order, plus a sorted index.
#[derive(Debug, Clone, Default)]
pub struct Pattern {
    entries: Vec<(usize, usize)>,
    sorted: Vec<(usize, usize, usize)>,
}

impl Pattern {
    pub fn new(entries: Vec<(usize, usize)>) -> Self {
        let mut sorted: Vec<_> = entries
            .iter()
            .enumerate()
            .map(|(k, &(r, c))| (r, c, k))
            .collect();
        sorted.sort_unstable();
        Self { entries, sorted }
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn first_duplicate(&self) -> Option<(usize, usize)> {
        self.sorted
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
            .map(|w| (w[0].0, w[0].1))
    }

    fn position(&self, row: usize, col: usize) -> Option<usize> {
        self.sorted
            .binary_search_by(|&(r, c, _)| (r, c).cmp(&(row, col)))
            .ok()
            .map(|p| self.sorted[p].2)
    }
}

/// Receives derivative entries from an oracle and files them under the declared pattern.
///
/// Entries outside the pattern are recorded as a contract violation. Repeated entries at
/// the same position accumulate.
pub struct TripletSink<'a> {
    pattern: &'a Pattern,
    values: &'a mut [f64],
    cursor: usize,
    violation: Option<(usize, usize)>,
}

impl<'a> TripletSink<'a> {
    pub fn new(pattern: &'a Pattern, values: &'a mut [f64]) -> Self {
        debug_assert_eq!(pattern.len(), values.len());
        values.iter_mut().for_each(|v| *v = 0.0);
        Self {
            pattern,
            values,
            cursor: 0,
            violation: None,
        }
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        // Oracles usually emit in declaration order.
        if self.cursor < self.pattern.entries.len()
            && self.pattern.entries[self.cursor] == (row, col)
        {
            self.values[self.cursor] += value;
            self.cursor += 1;
            return;
        }
        match self.pattern.position(row, col) {
            Some(k) => {
                self.values[k] += value;
                self.cursor = k + 1;
            }
            None => {
                if self.violation.is_none() {
                    self.violation = Some((row, col));
                }
            }
        }
    }

    pub fn violation(&self) -> Option<(usize, usize)> {
        self.violation
    }
}

/// Callbacks of a constraint block. All indices are local: rows in `0..arity`, columns index
/// the block's dependency list, and `x` holds the dependency values in that order.
pub trait BlockOracle: Send + Sync {
    fn residual(&self, x: &[f64], out: &mut [f64]);
    fn jacobian(&self, x: &[f64], out: &mut TripletSink<'_>);
    /// `Σ_i λ_i ∇² g_i` restricted to the dependencies; lower triangle (`row >= col`).
    fn hessian(&self, x: &[f64], lambda: &[f64], out: &mut TripletSink<'_>);
}

/// A vector of scalar equality constraints over a subset of the variables.
pub struct ConstraintBlock {
    pub(crate) name: String,
    pub(crate) deps: Vec<usize>,
    pub(crate) arity: usize,
    pub(crate) jac: Pattern,
    pub(crate) hess: Pattern,
    pub(crate) oracle: Box<dyn BlockOracle>,
}

impl core::fmt::Debug for ConstraintBlock {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ConstraintBlock")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("deps", &self.deps.len())
            .field("jac_nnz", &self.jac.len())
            .field("hess_nnz", &self.hess.len())
            .finish()
    }
}

impl ConstraintBlock {
    pub fn new(
        name: impl Into<String>,
        deps: Vec<usize>,
        arity: usize,
        jac_pattern: Vec<(usize, usize)>,
        hess_pattern: Vec<(usize, usize)>,
        oracle: Box<dyn BlockOracle>,
    ) -> Self {
        Self {
            name: name.into(),
            deps,
            arity,
            jac: Pattern::new(jac_pattern),
            hess: Pattern::new(hess_pattern),
            oracle,
        }
    }

    /// Affine block `A x_deps + c = 0`; `rows[i]` lists `(local column, coefficient)`.
    pub fn linear(
        name: impl Into<String>,
        deps: Vec<usize>,
        rows: Vec<Vec<(usize, f64)>>,
        constants: Vec<f64>,
    ) -> Self {
        let arity = rows.len();
        let jac = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, _)| (r, c)))
            .collect();
        Self::new(
            name,
            deps,
            arity,
            jac,
            Vec::new(),
            Box::new(LinearOracle { rows, constants }),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn deps(&self) -> &[usize] {
        &self.deps
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn jacobian_pattern(&self) -> &Pattern {
        &self.jac
    }

    pub fn hessian_pattern(&self) -> &Pattern {
        &self.hess
    }

    pub(crate) fn validate(&self, id: usize, n_var: usize) -> Result<()> {
        for &d in &self.deps {
            if d >= n_var {
                return Err(Error::VariableOutOfRange { index: d, n_var });
            }
        }
        let mut sorted = self.deps.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpec(alloc::format!(
                "block '{}' lists a dependency twice",
                self.name
            )));
        }
        let nd = self.deps.len();
        for &(r, c) in self.jac.entries() {
            if r >= self.arity || c >= nd {
                return Err(Error::InvalidPattern {
                    block: id,
                    row: r,
                    col: c,
                });
            }
        }
        for &(r, c) in self.hess.entries() {
            if r >= nd || c > r {
                return Err(Error::InvalidPattern {
                    block: id,
                    row: r,
                    col: c,
                });
            }
        }
        if let Some((row, col)) = self.jac.first_duplicate().or(self.hess.first_duplicate()) {
            return Err(Error::DuplicatePattern {
                block: id,
                row,
                col,
            });
        }
        Ok(())
    }
}

struct LinearOracle {
    rows: Vec<Vec<(usize, f64)>>,
    constants: Vec<f64>,
}

impl BlockOracle for LinearOracle {
    fn residual(&self, x: &[f64], out: &mut [f64]) {
        for ((o, row), c) in out.iter_mut().zip(&self.rows).zip(&self.constants) {
            *o = row.iter().map(|&(j, a)| a * x[j]).sum::<f64>() + c;
        }
    }

    fn jacobian(&self, _x: &[f64], out: &mut TripletSink<'_>) {
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, a) in row {
                out.add(r, c, a);
            }
        }
    }

    fn hessian(&self, _x: &[f64], _lambda: &[f64], _out: &mut TripletSink<'_>) {}
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn sink_accepts_declared_entries_in_any_order() {
        let p = Pattern::new(vec![(0, 0), (1, 0), (1, 1)]);
        let mut vals = vec![9.0; 3];
        let mut sink = TripletSink::new(&p, &mut vals);
        sink.add(1, 1, 2.0);
        sink.add(0, 0, 1.0);
        sink.add(1, 0, 0.5);
        sink.add(1, 0, 0.5);
        assert!(sink.violation().is_none());
        assert_eq!(vals, vec![1.0, 1.0, 2.0]);
    }

    #[test]
    fn sink_flags_undeclared_entry() {
        let p = Pattern::new(vec![(0, 0)]);
        let mut vals = vec![0.0];
        let mut sink = TripletSink::new(&p, &mut vals);
        sink.add(0, 1, 1.0);
        assert_eq!(sink.violation(), Some((0, 1)));
    }
}
