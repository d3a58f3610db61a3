//! Sequential dense networks `y_l = σ_l(W_l y_{l-1} + b_l)` and their derivative oracles.

mod activation;
mod diff;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

pub use activation::{
    activation_value_jac_hess, softmax, softmax_jacobian, softmax_second, Activation, Tensor3,
};

use crate::linalg::Mat;
use crate::math::sqrt;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    weight: Mat,
    bias: Vec<f64>,
    activation: Activation,
}

impl Layer {
    pub fn new(weight: Mat, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if weight.rows() != bias.len() {
            return Err(Error::DimensionMismatch {
                context: "layer bias length vs weight rows",
                expected: weight.rows(),
                got: bias.len(),
            });
        }
        if !weight.is_finite() || bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("layer parameters"));
        }
        Ok(Self {
            weight,
            bias,
            activation,
        })
    }

    pub fn weight(&self) -> &Mat {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn param_count(&self) -> usize {
        self.weight.rows() * self.weight.cols() + self.bias.len()
    }

    /// Pre-activation `W y + b`.
    pub(crate) fn affine(&self, y: &[f64]) -> Vec<f64> {
        let mut z = self.weight.matvec(y);
        for (zi, bi) in z.iter_mut().zip(&self.bias) {
            *zi += bi;
        }
        z
    }
}

/// A feed-forward network of dense layers. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralNet {
    layers: Vec<Layer>,
}

impl NeuralNet {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidNetwork(
                "a network needs at least one layer".into(),
            ));
        }
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(Error::InvalidNetwork(format!(
                    "layer {} outputs {} values but layer {} expects {}",
                    l,
                    pair[0].output_dim(),
                    l + 1,
                    pair[1].input_dim()
                )));
            }
        }
        let last = layers.len() - 1;
        if let Some(l) = layers[..last]
            .iter()
            .position(|layer| layer.activation == Activation::Softmax)
        {
            return Err(Error::InvalidNetwork(format!(
                "softmax is only supported on the final layer (found on layer {l})"
            )));
        }
        Ok(Self { layers })
    }

    /// Seeded network with weights and biases uniform on `±1/√fan_in`.
    ///
    /// `widths` lists the input width followed by every layer's output width.
    pub fn random<R: Rng + ?Sized>(
        widths: &[usize],
        hidden: Activation,
        last: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::InvalidNetwork(
                "shape needs an input width and at least one layer width".into(),
            ));
        }
        if widths.contains(&0) {
            return Err(Error::InvalidNetwork(
                "layer widths must be positive".into(),
            ));
        }
        let n_layers = widths.len() - 1;
        let mut layers = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let bound = 1.0 / sqrt(fan_in as f64);
            let data = (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-bound..=bound))
                .collect();
            let bias = (0..fan_out)
                .map(|_| rng.gen_range(-bound..=bound))
                .collect();
            let act = if l + 1 == n_layers { last } else { hidden };
            layers.push(Layer::new(
                Mat::from_vec(fan_out, fan_in, data)?,
                bias,
                act,
            )?);
        }
        Self::new(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Layer> {
        self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Total number of neurons (sum of layer output widths).
    pub fn neuron_count(&self) -> usize {
        self.layers.iter().map(Layer::output_dim).sum()
    }

    /// Input width followed by each layer's output width.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim()];
        w.extend(self.layers.iter().map(Layer::output_dim));
        w
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "network input",
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network input"));
        }
        Ok(())
    }

    pub(crate) fn check_multipliers(&self, lambda: &[f64]) -> Result<()> {
        if lambda.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "network output multipliers",
                expected: self.output_dim(),
                got: lambda.len(),
            });
        }
        Ok(())
    }

    /// Evaluates the network.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut y = x.to_vec();
        for layer in &self.layers {
            let z = layer.affine(&y);
            y = vec![0.0; z.len()];
            layer.activation.apply(&z, &mut y);
        }
        Ok(y)
    }

    /// Pre- and post-activation values of every layer; `post[0]` is the input.
    pub(crate) fn tape(&self, x: &[f64]) -> Tape {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len() + 1);
        post.push(x.to_vec());
        for layer in &self.layers {
            let z = layer.affine(post.last().unwrap());
            let mut y = vec![0.0; z.len()];
            layer.activation.apply(&z, &mut y);
            pre.push(z);
            post.push(y);
        }
        Tape { pre, post }
    }
}

pub(crate) struct Tape {
    #[allow(dead_code)]
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(weight: Mat, act: Activation) -> NeuralNet {
        let b = vec![0.0; weight.rows()];
        NeuralNet::new(vec![Layer::new(weight, b, act).unwrap()]).unwrap()
    }

    #[test]
    fn linear_identity_passes_through() {
        let nn = single(Mat::identity(2), Activation::Linear);
        assert_eq!(nn.forward(&[0.3, -0.7]).unwrap(), vec![0.3, -0.7]);
    }

    #[test]
    fn tanh_of_zero_is_zero() {
        let nn = single(Mat::identity(3), Activation::Tanh);
        assert_eq!(nn.forward(&[0.0; 3]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn softmax_of_constant_is_uniform() {
        let nn = single(Mat::zeros(4, 4), Activation::Softmax);
        assert_eq!(nn.forward(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![0.25; 4]);
    }

    #[test]
    fn construction_errors() {
        let bad_bias = Layer::new(Mat::zeros(2, 3), vec![0.0; 3], Activation::Tanh);
        assert!(matches!(bad_bias, Err(Error::DimensionMismatch { .. })));

        let l1 = Layer::new(Mat::zeros(2, 3), vec![0.0; 2], Activation::Tanh).unwrap();
        let l2 = Layer::new(Mat::zeros(2, 4), vec![0.0; 2], Activation::Tanh).unwrap();
        assert!(matches!(
            NeuralNet::new(vec![l1.clone(), l2]),
            Err(Error::InvalidNetwork(_))
        ));

        let sm = Layer::new(Mat::zeros(3, 2), vec![0.0; 3], Activation::Softmax).unwrap();
        let l3 = Layer::new(Mat::zeros(1, 3), vec![0.0; 1], Activation::Tanh).unwrap();
        assert!(matches!(
            NeuralNet::new(vec![l1, sm, l3]),
            Err(Error::InvalidNetwork(_))
        ));
        assert!(matches!(
            NeuralNet::new(vec![]),
            Err(Error::InvalidNetwork(_))
        ));

        let nn = single(Mat::identity(2), Activation::Tanh);
        assert!(matches!(
            nn.forward(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_net_shape_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let nn = NeuralNet::random(
            &[16, 32, 32, 3],
            Activation::Tanh,
            Activation::Softmax,
            &mut rng,
        )
        .unwrap();
        assert_eq!(nn.widths(), vec![16, 32, 32, 3]);
        assert_eq!(nn.param_count(), 16 * 32 + 32 + 32 * 32 + 32 + 32 * 3 + 3);
        let bound = 1.0 / 32f64.sqrt();
        assert!(nn.layers()[1]
            .weight()
            .as_slice()
            .iter()
            .all(|w| w.abs() <= bound));
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let nn = NeuralNet::random(
            &[5, 7, 4],
            Activation::Sigmoid,
            Activation::Softmax,
            &mut rng,
        )
        .unwrap();
        let x = [0.1, -0.2, 0.3, 0.9, -1.0];
        let a = nn.forward(&x).unwrap();
        let b = nn.forward(&x).unwrap();
        assert_eq!(a, b);
        let s: f64 = a.iter().sum();
        assert!((s - 1.0).abs() <= 1e-12);
        assert!(a.iter().all(|&v| v > 0.0 && v < 1.0));
    }
}
