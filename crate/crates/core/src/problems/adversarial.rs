use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formulations::{embed, EmbedHandle, Formulation};
use crate::linalg::Mat;
use crate::math::sqrt;
use crate::nlp::{ConstraintBlock, NlpProblem, QuadraticObjective, RowSense};
use crate::nn::{Activation, Layer, NeuralNet};
use crate::{Error, Result};

/// Smallest L1 perturbation of `x_ref` that the classifier assigns to `target` with
/// probability at least `confidence`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialSpec {
    pub classifier: NeuralNet,
    pub x_ref: Vec<f64>,
    pub target: usize,
    pub confidence: f64,
    pub formulation: Formulation,
}

impl AdversarialSpec {
    pub const DEFAULT_CONFIDENCE: f64 = 0.6;

    pub fn validate(&self) -> Result<()> {
        let nn = &self.classifier;
        if self.x_ref.len() != nn.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "reference image",
                expected: nn.input_dim(),
                got: self.x_ref.len(),
            });
        }
        if self.target >= nn.output_dim() {
            return Err(Error::InvalidSpec(alloc::format!(
                "target {} out of range for {} classes",
                self.target,
                nn.output_dim()
            )));
        }
        if let Some(p) = self.x_ref.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidSpec(alloc::format!(
                "pixel {p} outside [0, 1]"
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidSpec("confidence must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// True when `x_ref` already satisfies the confidence row, so `x_ref` is optimal.
    pub fn is_degenerate(&self) -> Result<bool> {
        Ok(self.classifier.forward(&self.x_ref)?[self.target] >= self.confidence)
    }
}

/// An adversarial problem with the indices needed to read its solution.
#[derive(Debug)]
pub struct AdversarialProblem {
    pub problem: NlpProblem,
    pub embed: EmbedHandle,
    pub x: Range<usize>,
    pub u: Range<usize>,
    pub v: Range<usize>,
    /// `x_ref` is already classified as the target with enough confidence.
    pub degenerate: bool,
}

impl AdversarialProblem {
    pub fn image<'a>(&self, solution: &'a [f64]) -> &'a [f64] {
        &solution[self.x.clone()]
    }
}

/// Builds `min Σ(u + v)  s.t.  x - x_ref = u - v,  y = NN(x),  y_t ≥ confidence,  0 ≤ x ≤ 1`.
pub fn build_adversarial(spec: &AdversarialSpec) -> Result<AdversarialProblem> {
    spec.validate()?;
    let n = spec.x_ref.len();
    let mut p = NlpProblem::new();
    let x = p.add_vars("x", 0.0, &spec.x_ref);
    let u = p.add_vars("u", 0.0, &vec![0.0; n]);
    let v = p.add_vars("v", 0.0, &vec![0.0; n]);

    let mut deps: Vec<usize> = x.clone().collect();
    deps.extend(u.clone());
    deps.extend(v.clone());
    let rows = (0..n)
        .map(|i| vec![(i, 1.0), (n + i, -1.0), (2 * n + i, 1.0)])
        .collect();
    let consts = spec.x_ref.iter().map(|r| -r).collect();
    p.add_block(ConstraintBlock::linear("l1_split", deps, rows, consts))?;

    let xs: Vec<usize> = x.clone().collect();
    p.add_upper_bounds("pixel_max", &xs, &vec![1.0; n])?;

    let handle = embed(&mut p, &spec.classifier, &xs, spec.formulation)?;
    let yt = handle.outputs[spec.target];
    p.add_inequality_as_slack(
        ConstraintBlock::linear("confidence", vec![yt], vec![vec![(0, 1.0)]], vec![0.0]),
        vec![RowSense::AtLeast(spec.confidence)],
    )?;

    let coeffs = u.clone().chain(v.clone()).map(|i| (i, 1.0)).collect();
    p.set_objective(QuadraticObjective::linear(coeffs))?;

    Ok(AdversarialProblem {
        problem: p,
        embed: handle,
        x,
        u,
        v,
        degenerate: spec.is_degenerate()?,
    })
}

/// Seeded classifier with tanh hidden layers and a softmax output.
///
/// Output biases are set so every logit has zero mean over seeded random images, and the
/// final layer is then scaled by `gain` so that class probabilities are not uniform.
pub fn seeded_classifier(widths: &[usize], gain: f64, seed: u64) -> Result<NeuralNet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = NeuralNet::random(widths, Activation::Tanh, Activation::Softmax, &mut rng)?;
    let n = net.input_dim();
    let mut layers = net.into_layers();
    let last = layers.pop().expect("nonempty network");
    let prefix = NeuralNet::new(layers.clone()).ok();

    let w = last.weight();
    let samples = 32;
    let mut mean = vec![0.0; w.rows()];
    for _ in 0..samples {
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let h = match &prefix {
            Some(pre) => pre.forward(&x)?,
            None => x,
        };
        for (m, z) in mean.iter_mut().zip(w.matvec(&h)) {
            *m += z / samples as f64;
        }
    }
    let data = w.as_slice().iter().map(|a| a * gain).collect();
    let bias = mean.iter().map(|m| -m * gain).collect();
    layers.push(Layer::new(
        Mat::from_vec(w.rows(), w.cols(), data)?,
        bias,
        last.activation(),
    )?);
    NeuralNet::new(layers)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Best `y_t` found by projected gradient ascent over the unit box from `x0`.
fn reach(nn: &NeuralNet, x0: &[f64], t: usize) -> Result<f64> {
    let mut x = x0.to_vec();
    let mut best = nn.forward(&x)?[t];
    for _ in 0..60 {
        let j = nn.jacobian(&x)?;
        let g = j.row(t);
        let norm = sqrt(g.iter().map(|v| v * v).sum::<f64>()).max(1e-12);
        for (xi, gi) in x.iter_mut().zip(g) {
            *xi = (*xi + 0.5 * gi / norm).clamp(0.0, 1.0);
        }
        best = best.max(nn.forward(&x)?[t]);
    }
    Ok(best)
}

fn reference_image(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

fn corners(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..6)
        .map(|_| {
            (0..n)
                .map(|_| f64::from(u8::from(rng.gen_bool(0.5))))
                .collect()
        })
        .collect()
}

/// A target class other than the label of `x_ref`, below `confidence` at `x_ref`, and
/// reaching `confidence + 0.15` somewhere in the box.
fn reachable_target(
    classifier: &NeuralNet,
    x_ref: &[f64],
    starts: &[Vec<f64>],
    confidence: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Option<usize>> {
    let y_ref = classifier.forward(x_ref)?;
    let label = argmax(&y_ref);
    let mut order: Vec<usize> = (0..classifier.output_dim())
        .filter(|&t| t != label)
        .collect();
    order.shuffle(rng);
    for t in order {
        if y_ref[t] >= confidence {
            continue;
        }
        let mut best = reach(classifier, x_ref, t)?;
        for start in starts {
            if best >= confidence + 0.15 {
                break;
            }
            best = best.max(reach(classifier, start, t)?);
        }
        if best >= confidence + 0.15 {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Seeded non-degenerate adversarial instance.
///
/// The target differs from the label of `x_ref`, is below `confidence` at `x_ref`, and is
/// reached with probability at least `confidence + 0.15` by a point of the box found by
/// projected gradient ascent from `x_ref` or a few seeded corners, so the instance is
/// feasible. The classifier's output gain is raised until such a target exists.
pub fn seeded_adversarial(
    widths: &[usize],
    seed: u64,
    formulation: Formulation,
) -> Result<AdversarialSpec> {
    let confidence = AdversarialSpec::DEFAULT_CONFIDENCE;
    let n = *widths
        .first()
        .ok_or_else(|| Error::InvalidNetwork("empty shape".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ad5e);
    let x_ref = reference_image(n, &mut rng);
    let starts = corners(n, &mut rng);
    let mut gain = 4.0;
    for _ in 0..12 {
        let classifier = seeded_classifier(widths, gain, seed)?;
        if let Some(target) = reachable_target(&classifier, &x_ref, &starts, confidence, &mut rng)?
        {
            return Ok(AdversarialSpec {
                classifier,
                x_ref,
                target,
                confidence,
                formulation,
            });
        }
        gain *= 1.5;
    }
    Err(Error::InvalidSpec(
        "no reachable target class for this seed".into(),
    ))
}

/// Seeded reference image and target for a given classifier.
pub fn adversarial_for(
    classifier: NeuralNet,
    seed: u64,
    formulation: Formulation,
) -> Result<AdversarialSpec> {
    let confidence = AdversarialSpec::DEFAULT_CONFIDENCE;
    let n = classifier.input_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ad5e);
    for _ in 0..8 {
        let x_ref = reference_image(n, &mut rng);
        let starts = corners(n, &mut rng);
        if let Some(target) = reachable_target(&classifier, &x_ref, &starts, confidence, &mut rng)?
        {
            return Ok(AdversarialSpec {
                classifier,
                x_ref,
                target,
                confidence,
                formulation,
            });
        }
    }
    Err(Error::InvalidSpec(
        "classifier has no reachable target class".into(),
    ))
}
