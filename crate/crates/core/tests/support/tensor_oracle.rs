//! Test-only Lagrangian Hessian that materializes every output Hessian before contracting.

use graybox_core::linalg::Mat;
use graybox_core::nn::{softmax_jacobian, softmax_second, Activation, NeuralNet};

/// Second derivatives by tensor forward propagation: carries `∂y/∂x` (`w × n`) and
/// `∂²y/∂x²` (`w × n × n`) through every layer and contracts with `λ` at the end.
pub fn naive_hessian(nn: &NeuralNet, x: &[f64], lambda: &[f64]) -> Mat {
    let n = x.len();
    let mut y = x.to_vec();
    let mut jac = Mat::identity(n);
    let mut ten = vec![0.0; n * n * n];
    for layer in nn.layers() {
        let w = layer.weight();
        let (r, c) = (w.rows(), w.cols());
        let mut z = w.matvec(&y);
        for (zi, b) in z.iter_mut().zip(layer.bias()) {
            *zi += b;
        }
        let jz = w.matmul(&jac);
        let mut tz = vec![0.0; r * n * n];
        for i in 0..r {
            for k in 0..c {
                let wik = w[(i, k)];
                if wik == 0.0 {
                    continue;
                }
                for p in 0..n * n {
                    tz[i * n * n + p] += wik * ten[k * n * n + p];
                }
            }
        }
        let mut out = vec![0.0; r];
        layer.activation().apply(&z, &mut out);
        let mut new_jac = Mat::zeros(r, n);
        let mut new_ten = vec![0.0; r * n * n];
        if layer.activation() == Activation::Softmax {
            let s = softmax_jacobian(&out);
            new_jac = s.matmul(&jz);
            for i in 0..r {
                for k in 0..r {
                    let sik = s[(i, k)];
                    for p in 0..n * n {
                        new_ten[i * n * n + p] += sik * tz[k * n * n + p];
                    }
                    for l in 0..r {
                        let t = softmax_second(&out, i, k, l);
                        for a in 0..n {
                            for b in 0..n {
                                new_ten[i * n * n + a * n + b] += t * jz[(k, a)] * jz[(l, b)];
                            }
                        }
                    }
                }
            }
        } else {
            for i in 0..r {
                let (_, d1, d2) = layer.activation().scalar(z[i]);
                for a in 0..n {
                    new_jac[(i, a)] = d1 * jz[(i, a)];
                    for b in 0..n {
                        new_ten[i * n * n + a * n + b] =
                            d1 * tz[i * n * n + a * n + b] + d2 * jz[(i, a)] * jz[(i, b)];
                    }
                }
            }
        }
        y = out;
        jac = new_jac;
        ten = new_ten;
    }
    let mut h = Mat::zeros(n, n);
    for (i, li) in lambda.iter().enumerate() {
        for a in 0..n {
            for b in 0..n {
                h[(a, b)] += li * ten[i * n * n + a * n + b];
            }
        }
    }
    h
}
