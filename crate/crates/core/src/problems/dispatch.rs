use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formulations::{embed, EmbedHandle, Formulation};
use crate::linalg::Mat;
use crate::nlp::{ConstraintBlock, NlpProblem, QuadraticObjective, RowSense};
use crate::nn::{Activation, Layer, NeuralNet};
use crate::{Error, Result};

/// Generator data, fixed demands and the frequency floor of a dispatch instance.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DispatchData {
    /// Cost of generator `i` is `a_i p² + b_i p + c_i`.
    pub cost_a: Vec<f64>,
    pub cost_b: Vec<f64>,
    pub cost_c: Vec<f64>,
    pub p_min: Vec<f64>,
    pub p_max: Vec<f64>,
    pub demand: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(default = "default_eta"))]
    pub eta: f64,
}

#[cfg(feature = "serde")]
fn default_eta() -> f64 {
    DispatchData::DEFAULT_ETA
}

impl DispatchData {
    pub const DEFAULT_ETA: f64 = 59.4;

    pub fn n_gen(&self) -> usize {
        self.p_min.len()
    }

    pub fn n_demand(&self) -> usize {
        self.demand.len()
    }

    pub fn total_demand(&self) -> f64 {
        self.demand.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_gen();
        for (name, len) in [
            ("cost_a", self.cost_a.len()),
            ("cost_b", self.cost_b.len()),
            ("cost_c", self.cost_c.len()),
            ("p_max", self.p_max.len()),
        ] {
            if len != n {
                return Err(Error::InvalidSpec(alloc::format!(
                    "{name} has {len} entries, expected {n}"
                )));
            }
        }
        if let Some(i) = (0..n).find(|&i| !(self.p_min[i] <= self.p_max[i])) {
            return Err(Error::InvalidSpec(alloc::format!(
                "generator {i} has p_min > p_max"
            )));
        }
        if self.cost_a.iter().any(|&a| !(a >= 0.0)) {
            return Err(Error::InvalidSpec(
                "quadratic cost coefficients must be nonnegative".into(),
            ));
        }
        if !(self.eta > 0.0) {
            return Err(Error::InvalidSpec(
                "frequency floor must be positive".into(),
            ));
        }
        let d = self.total_demand();
        let lo: f64 = self.p_min.iter().sum();
        let hi: f64 = self.p_max.iter().sum();
        if !(lo <= d && d <= hi) {
            return Err(Error::InvalidSpec(alloc::format!(
                "total demand {d} outside generation range [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    pub fn cost(&self, p: &[f64]) -> f64 {
        (0..self.n_gen())
            .map(|i| self.cost_a[i] * p[i] * p[i] + self.cost_b[i] * p[i] + self.cost_c[i])
            .sum()
    }

    /// Cheapest dispatch meeting demand within the generator limits, ignoring the surrogate.
    ///
    /// Bisection on the balance price; requires `a_i > 0`.
    pub fn economic_dispatch(&self) -> Vec<f64> {
        let d = self.total_demand();
        let at = |price: f64| -> Vec<f64> {
            (0..self.n_gen())
                .map(|i| {
                    ((price - self.cost_b[i]) / (2.0 * self.cost_a[i]))
                        .clamp(self.p_min[i], self.p_max[i])
                })
                .collect()
        };
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        while at(lo).iter().sum::<f64>() > d {
            lo *= 2.0;
        }
        while at(hi).iter().sum::<f64>() < d {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if at(mid).iter().sum::<f64>() < d {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi))
    }
}

/// Quadratic-cost dispatch with a frequency surrogate `NN(p, d) ≥ η`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchSpec {
    pub surrogate: NeuralNet,
    pub data: DispatchData,
    pub formulation: Formulation,
}

impl DispatchSpec {
    pub fn validate(&self) -> Result<()> {
        self.data.validate()?;
        let want = self.data.n_gen() + self.data.n_demand();
        if self.surrogate.input_dim() != want {
            return Err(Error::DimensionMismatch {
                context: "surrogate inputs",
                expected: want,
                got: self.surrogate.input_dim(),
            });
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct DispatchProblem {
    pub problem: NlpProblem,
    pub embed: EmbedHandle,
    pub p: Range<usize>,
    pub d: Range<usize>,
}

impl DispatchProblem {
    pub fn generation<'a>(&self, solution: &'a [f64]) -> &'a [f64] {
        &solution[self.p.clone()]
    }
}

/// Builds `min Σ a p² + b p + c  s.t.  Σp = Σd,  p_min ≤ p ≤ p_max,  NN(p, d) ≥ η`.
///
/// Demands are variables pinned by equalities so the surrogate sees them as inputs.
pub fn build_dispatch(spec: &DispatchSpec) -> Result<DispatchProblem> {
    spec.validate()?;
    let data = &spec.data;
    let ng = data.n_gen();
    let nd = data.n_demand();
    let total = data.total_demand();
    let lo: f64 = data.p_min.iter().sum();
    let hi: f64 = data.p_max.iter().sum();
    let share = if hi > lo {
        (total - lo) / (hi - lo)
    } else {
        0.0
    };

    let mut prob = NlpProblem::new();
    let p = prob.add_vars("p", f64::NEG_INFINITY, &vec![0.0; ng]);
    for (k, i) in p.clone().enumerate() {
        prob.set_lower(i, data.p_min[k]);
        prob.set_init(i, data.p_min[k] + share * (data.p_max[k] - data.p_min[k]));
    }
    let d = prob.add_vars("d", f64::NEG_INFINITY, &data.demand);

    let ps: Vec<usize> = p.clone().collect();
    prob.add_block(ConstraintBlock::linear(
        "balance",
        ps.clone(),
        vec![(0..ng).map(|i| (i, 1.0)).collect()],
        vec![-total],
    ))?;
    prob.add_upper_bounds("p_max", &ps, &data.p_max)?;
    prob.add_block(ConstraintBlock::linear(
        "demand",
        d.clone().collect(),
        (0..nd).map(|j| vec![(j, 1.0)]).collect(),
        data.demand.iter().map(|v| -v).collect(),
    ))?;

    let inputs: Vec<usize> = p.clone().chain(d.clone()).collect();
    let handle = embed(&mut prob, &spec.surrogate, &inputs, spec.formulation)?;
    let m = handle.outputs.len();
    prob.add_inequality_as_slack(
        ConstraintBlock::linear(
            "frequency",
            handle.outputs.clone(),
            (0..m).map(|k| vec![(k, 1.0)]).collect(),
            vec![0.0; m],
        ),
        vec![RowSense::AtLeast(data.eta); m],
    )?;

    let linear = ps.iter().zip(&data.cost_b).map(|(&i, &b)| (i, b)).collect();
    let quad = ps
        .iter()
        .zip(&data.cost_a)
        .map(|(&i, &a)| (i, i, 2.0 * a))
        .collect();
    prob.set_objective(QuadraticObjective::new(
        data.cost_c.iter().sum(),
        linear,
        quad,
    )?)?;

    Ok(DispatchProblem {
        problem: prob,
        embed: handle,
        p,
        d,
    })
}

/// Seeded generator data: limits, costs and a demand at mid-range of total capacity.
pub fn seeded_dispatch_data(n_gen: usize, n_demand: usize, seed: u64) -> DispatchData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd15_7a7c);
    let p_min: Vec<f64> = (0..n_gen).map(|_| rng.gen_range(0.1..0.3)).collect();
    let p_max: Vec<f64> = p_min
        .iter()
        .map(|lo| lo + rng.gen_range(0.5..1.0))
        .collect();
    let cost_a = (0..n_gen).map(|_| rng.gen_range(0.5..2.0)).collect();
    let cost_b = (0..n_gen).map(|_| rng.gen_range(1.0..5.0)).collect();
    let cost_c = (0..n_gen).map(|_| rng.gen_range(0.0..1.0)).collect();
    let lo: f64 = p_min.iter().sum();
    let hi: f64 = p_max.iter().sum();
    let target = lo + rng.gen_range(0.35..0.55) * (hi - lo);
    let raw: Vec<f64> = (0..n_demand).map(|_| rng.gen_range(0.5..1.5)).collect();
    let scale = target / raw.iter().sum::<f64>();
    DispatchData {
        cost_a,
        cost_b,
        cost_c,
        p_min,
        p_max,
        demand: raw.iter().map(|r| r * scale).collect(),
        eta: DispatchData::DEFAULT_ETA,
    }
}

/// Seeded surrogate whose frequency surface straddles `η` inside the feasible region.
///
/// With `p_ed` the economic dispatch and `p_alt` the proportional dispatch, every output
/// row is oriented and shifted so that `y_b(p_ed) = η - 0.25` and `y_b(p_alt) = η + 0.25`.
/// The surrogate therefore cuts off the unconstrained optimum while `p_alt` stays strictly
/// feasible.
pub fn seeded_surrogate(
    data: &DispatchData,
    hidden: &[usize],
    n_bus: usize,
    seed: u64,
) -> Result<NeuralNet> {
    let mut widths = vec![data.n_gen() + data.n_demand()];
    widths.extend_from_slice(hidden);
    widths.push(n_bus);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = NeuralNet::random(&widths, Activation::Tanh, Activation::Linear, &mut rng)?;

    let p_ed = data.economic_dispatch();
    let lo: f64 = data.p_min.iter().sum();
    let hi: f64 = data.p_max.iter().sum();
    let share = (data.total_demand() - lo) / (hi - lo);
    let p_alt: Vec<f64> = (0..data.n_gen())
        .map(|i| data.p_min[i] + share * (data.p_max[i] - data.p_min[i]))
        .collect();
    let input = |p: &[f64]| -> Vec<f64> { p.iter().chain(&data.demand).copied().collect() };

    let mut layers = net.into_layers();
    let last = layers.pop().expect("nonempty network");
    let prefix = NeuralNet::new(layers.clone());
    let (h_ed, h_alt) = match &prefix {
        Ok(pre) => (pre.forward(&input(&p_ed))?, pre.forward(&input(&p_alt))?),
        Err(_) => (input(&p_ed), input(&p_alt)),
    };
    let w = last.weight();
    let mut data_w = Vec::with_capacity(w.rows() * w.cols());
    let mut bias = Vec::with_capacity(n_bus);
    for b in 0..n_bus {
        let row = w.row(b);
        let dot = |h: &[f64]| row.iter().zip(h).map(|(a, x)| a * x).sum::<f64>();
        let gap = dot(&h_alt) - dot(&h_ed);
        if gap.abs() < 1e-12 {
            return Err(Error::InvalidSpec(
                "surrogate cannot separate the two dispatches".into(),
            ));
        }
        let scale = 0.5 / gap;
        data_w.extend(row.iter().map(|a| a * scale));
        bias.push(data.eta + 0.25 - scale * dot(&h_alt));
    }
    layers.push(Layer::new(
        Mat::from_vec(w.rows(), w.cols(), data_w)?,
        bias,
        Activation::Linear,
    )?);
    NeuralNet::new(layers)
}

/// Seeded dispatch instance with an active surrogate constraint.
pub fn seeded_dispatch(
    n_gen: usize,
    n_demand: usize,
    hidden: &[usize],
    n_bus: usize,
    seed: u64,
    formulation: Formulation,
) -> Result<DispatchSpec> {
    let data = seeded_dispatch_data(n_gen, n_demand, seed);
    let surrogate = seeded_surrogate(&data, hidden, n_bus, seed)?;
    Ok(DispatchSpec {
        surrogate,
        data,
        formulation,
    })
}
