//! Embedding a [`NeuralNet`] into an [`NlpProblem`].
//!
//! * Full space: every layer gets pre-activation variables `z_l` and post-activation
//!   variables `y_l`, tied by `z_l - W_l y_{l-1} - b_l = 0` and `y_l - σ_l(z_l) = 0`.
//! * Reduced space: only the outputs `y` are variables, tied to the inputs by one dense
//!   block `y - NN(x) = 0` whose derivatives come from the network oracles.

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::nlp::{BlockId, BlockOracle, ConstraintBlock, NlpProblem, TripletSink};
use crate::nn::{softmax_jacobian, softmax_second, Activation, Layer, NeuralNet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Formulation {
    #[cfg_attr(feature = "serde", serde(rename = "full"))]
    FullSpace,
    #[cfg_attr(feature = "serde", serde(rename = "reduced"))]
    ReducedSpace,
}

impl Formulation {
    pub const ALL: [Formulation; 2] = [Formulation::FullSpace, Formulation::ReducedSpace];

    pub fn name(self) -> &'static str {
        match self {
            Formulation::FullSpace => "full",
            Formulation::ReducedSpace => "reduced",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "full" | "full-space" => Some(Formulation::FullSpace),
            "reduced" | "reduced-space" => Some(Formulation::ReducedSpace),
            _ => None,
        }
    }
}

/// Variables of one full-space layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerVars {
    pub z: Range<usize>,
    pub y: Range<usize>,
}

/// Where an embedded network lives in its host problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbedHandle {
    pub formulation: Formulation,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    /// Empty for the reduced space.
    pub layers: Vec<LayerVars>,
    pub blocks: Vec<BlockId>,
}

impl EmbedHandle {
    /// Number of auxiliary variables the embedding added.
    pub fn added_vars(&self) -> usize {
        match self.formulation {
            Formulation::FullSpace => self.layers.iter().map(|l| l.z.len() + l.y.len()).sum(),
            Formulation::ReducedSpace => self.outputs.len(),
        }
    }
}

/// Structural size of a problem, counted from declared patterns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FormulationStats {
    pub n_var: usize,
    pub n_con: usize,
    pub jac_nnz: usize,
    /// Distinct lower-triangle positions of the Lagrangian Hessian.
    pub hess_nnz: usize,
}

pub fn formulation_stats(problem: &NlpProblem) -> FormulationStats {
    let mut hess = problem.hessian_structure();
    hess.sort_unstable();
    hess.dedup();
    FormulationStats {
        n_var: problem.n_var(),
        n_con: problem.n_con(),
        jac_nnz: problem.jacobian_nnz(),
        hess_nnz: hess.len(),
    }
}

pub fn embed(
    problem: &mut NlpProblem,
    nn: &NeuralNet,
    input_vars: &[usize],
    formulation: Formulation,
) -> Result<EmbedHandle> {
    match formulation {
        Formulation::FullSpace => embed_full_space(problem, nn, input_vars),
        Formulation::ReducedSpace => embed_reduced_space(problem, nn, input_vars),
    }
}

fn check_inputs(problem: &NlpProblem, nn: &NeuralNet, input_vars: &[usize]) -> Result<Vec<f64>> {
    if input_vars.len() != nn.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "network inputs",
            expected: nn.input_dim(),
            got: input_vars.len(),
        });
    }
    let vars = problem.vars();
    input_vars
        .iter()
        .map(|&i| {
            vars.get(i)
                .map(|v| v.init)
                .ok_or(Error::VariableOutOfRange {
                    index: i,
                    n_var: vars.len(),
                })
        })
        .collect()
}

pub fn embed_full_space(
    problem: &mut NlpProblem,
    nn: &NeuralNet,
    input_vars: &[usize],
) -> Result<EmbedHandle> {
    let x0 = check_inputs(problem, nn, input_vars)?;
    let mut prev_vars = input_vars.to_vec();
    let mut prev_vals = x0;
    let mut layers = Vec::with_capacity(nn.depth());
    let mut blocks = Vec::with_capacity(2 * nn.depth());

    for (l, layer) in nn.layers().iter().enumerate() {
        let width = layer.output_dim();
        let z0 = affine(layer, &prev_vals);
        let mut y0 = vec![0.0; width];
        layer.activation().apply(&z0, &mut y0);
        let z = problem.add_vars(&format!("nn.z{}", l + 1), f64::NEG_INFINITY, &z0);
        let y = problem.add_vars(&format!("nn.y{}", l + 1), f64::NEG_INFINITY, &y0);

        let n_in = prev_vars.len();
        let w = layer.weight();
        let rows: Vec<Vec<(usize, f64)>> = (0..width)
            .map(|i| {
                let mut row: Vec<(usize, f64)> = w
                    .row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(_, &a)| a != 0.0)
                    .map(|(j, &a)| (j, -a))
                    .collect();
                row.push((n_in + i, 1.0));
                row
            })
            .collect();
        let mut deps = prev_vars.clone();
        deps.extend(z.clone());
        let constants = layer.bias().iter().map(|b| -b).collect();
        blocks.push(problem.add_block(ConstraintBlock::linear(
            format!("nn.affine{}", l + 1),
            deps,
            rows,
            constants,
        ))?);

        let mut deps: Vec<usize> = z.clone().collect();
        deps.extend(y.clone());
        blocks.push(problem.add_block(activation_block(l + 1, layer.activation(), width, deps))?);

        prev_vars = y.clone().collect();
        prev_vals = y0;
        layers.push(LayerVars { z, y });
    }

    Ok(EmbedHandle {
        formulation: Formulation::FullSpace,
        inputs: input_vars.to_vec(),
        outputs: prev_vars,
        layers,
        blocks,
    })
}

fn affine(layer: &Layer, x: &[f64]) -> Vec<f64> {
    let mut z = layer.weight().matvec(x);
    for (zi, b) in z.iter_mut().zip(layer.bias()) {
        *zi += b;
    }
    z
}

fn activation_block(l: usize, act: Activation, width: usize, deps: Vec<usize>) -> ConstraintBlock {
    let name = format!("nn.{}{}", act.name(), l);
    let mut jac = Vec::new();
    let mut hess = Vec::new();
    if act.is_elementwise() {
        for i in 0..width {
            jac.push((i, i));
            jac.push((i, width + i));
        }
        if act != Activation::Linear {
            hess.extend((0..width).map(|i| (i, i)));
        }
        ConstraintBlock::new(
            name,
            deps,
            width,
            jac,
            hess,
            Box::new(Elementwise { act, width }),
        )
    } else {
        for i in 0..width {
            jac.extend((0..width).map(|j| (i, j)));
            jac.push((i, width + i));
        }
        for r in 0..width {
            hess.extend((0..=r).map(|c| (r, c)));
        }
        ConstraintBlock::new(
            name,
            deps,
            width,
            jac,
            hess,
            Box::new(SoftmaxBlock { width }),
        )
    }
}

/// `y - σ(z) = 0` over local variables `z ++ y`.
struct Elementwise {
    act: Activation,
    width: usize,
}

impl BlockOracle for Elementwise {
    fn residual(&self, x: &[f64], out: &mut [f64]) {
        let (z, y) = x.split_at(self.width);
        for i in 0..self.width {
            out[i] = y[i] - self.act.scalar(z[i]).0;
        }
    }

    fn jacobian(&self, x: &[f64], out: &mut TripletSink<'_>) {
        for i in 0..self.width {
            out.add(i, i, -self.act.scalar(x[i]).1);
            out.add(i, self.width + i, 1.0);
        }
    }

    fn hessian(&self, x: &[f64], lambda: &[f64], out: &mut TripletSink<'_>) {
        if self.act == Activation::Linear {
            return;
        }
        for i in 0..self.width {
            out.add(i, i, -lambda[i] * self.act.scalar(x[i]).2);
        }
    }
}

/// `y - softmax(z) = 0` over local variables `z ++ y`.
struct SoftmaxBlock {
    width: usize,
}

impl SoftmaxBlock {
    fn value(&self, z: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.width];
        crate::nn::softmax(z, &mut s);
        s
    }
}

impl BlockOracle for SoftmaxBlock {
    fn residual(&self, x: &[f64], out: &mut [f64]) {
        let (z, y) = x.split_at(self.width);
        let s = self.value(z);
        for i in 0..self.width {
            out[i] = y[i] - s[i];
        }
    }

    fn jacobian(&self, x: &[f64], out: &mut TripletSink<'_>) {
        let s = self.value(&x[..self.width]);
        let j = softmax_jacobian(&s);
        for i in 0..self.width {
            for k in 0..self.width {
                out.add(i, k, -j[(i, k)]);
            }
            out.add(i, self.width + i, 1.0);
        }
    }

    fn hessian(&self, x: &[f64], lambda: &[f64], out: &mut TripletSink<'_>) {
        let s = self.value(&x[..self.width]);
        for r in 0..self.width {
            for c in 0..=r {
                let v: f64 = (0..self.width)
                    .map(|i| lambda[i] * softmax_second(&s, i, r, c))
                    .sum();
                out.add(r, c, -v);
            }
        }
    }
}

pub fn embed_reduced_space(
    problem: &mut NlpProblem,
    nn: &NeuralNet,
    input_vars: &[usize],
) -> Result<EmbedHandle> {
    let x0 = check_inputs(problem, nn, input_vars)?;
    let n = nn.input_dim();
    let m = nn.output_dim();
    let y0 = nn.forward(&x0)?;
    let y = problem.add_vars("nn.y", f64::NEG_INFINITY, &y0);

    let mut jac = Vec::with_capacity(m * (n + 1));
    for i in 0..m {
        jac.extend((0..n).map(|j| (i, j)));
        jac.push((i, n + i));
    }
    let mut hess = Vec::with_capacity(n * (n + 1) / 2);
    for r in 0..n {
        hess.extend((0..=r).map(|c| (r, c)));
    }
    let mut deps = input_vars.to_vec();
    deps.extend(y.clone());
    let oracle = GrayBox {
        nn: Arc::new(nn.clone()),
    };
    let block = problem.add_block(ConstraintBlock::new(
        "nn",
        deps,
        m,
        jac,
        hess,
        Box::new(oracle),
    ))?;

    Ok(EmbedHandle {
        formulation: Formulation::ReducedSpace,
        inputs: input_vars.to_vec(),
        outputs: y.collect(),
        layers: Vec::new(),
        blocks: vec![block],
    })
}

/// `y - NN(x) = 0` over local variables `x ++ y`.
///
/// Its Lagrangian Hessian is `-Σ λ_i ∇²NN_i(x)`, so the network is queried with `-λ`.
/// Oracle failures surface as NaN, which the problem reports as a non-finite block.
struct GrayBox {
    nn: Arc<NeuralNet>,
}

impl BlockOracle for GrayBox {
    fn residual(&self, x: &[f64], out: &mut [f64]) {
        let n = self.nn.input_dim();
        match self.nn.forward(&x[..n]) {
            Ok(v) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = x[n + i] - v[i];
                }
            }
            Err(_) => out.fill(f64::NAN),
        }
    }

    fn jacobian(&self, x: &[f64], out: &mut TripletSink<'_>) {
        let n = self.nn.input_dim();
        let m = self.nn.output_dim();
        let j = self.nn.jacobian(&x[..n]);
        for i in 0..m {
            for c in 0..n {
                out.add(i, c, j.as_ref().map_or(f64::NAN, |j| -j[(i, c)]));
            }
            out.add(i, n + i, 1.0);
        }
    }

    fn hessian(&self, x: &[f64], lambda: &[f64], out: &mut TripletSink<'_>) {
        let n = self.nn.input_dim();
        let neg: Vec<f64> = lambda.iter().map(|l| -l).collect();
        let h = self.nn.lagrangian_hessian(&x[..n], &neg);
        for r in 0..n {
            for c in 0..=r {
                out.add(r, c, h.as_ref().map_or(f64::NAN, |h| h[(r, c)]));
            }
        }
    }
}
