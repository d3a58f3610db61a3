use graybox_core::linalg::Mat;
use graybox_core::nn::{softmax, softmax_jacobian, Activation, Layer, NeuralNet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[path = "support/tensor_oracle.rs"]
mod tensor_oracle;
use tensor_oracle::naive_hessian;

const HIDDEN: [Activation; 3] = [Activation::Linear, Activation::Tanh, Activation::Sigmoid];
const LAST: [Activation; 4] = [
    Activation::Linear,
    Activation::Tanh,
    Activation::Sigmoid,
    Activation::Softmax,
];

fn net(seed: u64, depth: usize, max_width: usize) -> (NeuralNet, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let widths: Vec<usize> = (0..=depth).map(|_| rng.gen_range(2..=max_width)).collect();
    let hidden = HIDDEN[rng.gen_range(0..HIDDEN.len())];
    let last = LAST[rng.gen_range(0..LAST.len())];
    let nn = NeuralNet::random(&widths, hidden, last, &mut rng).unwrap();
    let x = (0..widths[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (nn, x)
}

fn lambda_for(nn: &NeuralNet, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(99));
    (0..nn.output_dim())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect()
}

fn perturbed(x: &[f64], j: usize, h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[j] += h;
    y
}

#[test]
fn tensor_oracle_agrees_on_every_activation() {
    for (s, &last) in LAST.iter().enumerate() {
        for (t, &hidden) in HIDDEN.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64((s * 10 + t) as u64);
            let nn = NeuralNet::random(&[6, 5, 4, 3], hidden, last, &mut rng).unwrap();
            let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lam = lambda_for(&nn, 3);
            let a = nn.lagrangian_hessian(&x, &lam).unwrap();
            let b = naive_hessian(&nn, &x, &lam);
            for i in 0..6 {
                for j in 0..6 {
                    assert!(
                        (a[(i, j)] - b[(i, j)]).abs() <= 1e-10,
                        "{hidden:?}/{last:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn softmax_of_shifted_logits_is_invariant() {
    let z = [0.3, -1.2, 2.5, 0.0];
    let shifted: Vec<f64> = z.iter().map(|v| v + 100.0).collect();
    let mut a = [0.0; 4];
    let mut b = [0.0; 4];
    softmax(&z, &mut a);
    softmax(&shifted, &mut b);
    for (p, q) in a.iter().zip(&b) {
        assert!((p - q).abs() <= 1e-14);
    }
    let mut big = [0.0; 2];
    softmax(&[800.0, 0.0], &mut big);
    assert!(big.iter().all(|v| v.is_finite()));
}

#[test]
fn linear_network_has_zero_hessian() {
    let w = Mat::from_vec(2, 3, vec![1.0, -2.0, 0.5, 0.0, 3.0, 1.0]).unwrap();
    let nn = NeuralNet::new(vec![Layer::new(
        w.clone(),
        vec![0.1, 0.2],
        Activation::Linear,
    )
    .unwrap()])
    .unwrap();
    assert_eq!(nn.jacobian(&[0.3, 0.1, -0.4]).unwrap(), w);
    let h = nn
        .lagrangian_hessian(&[0.3, 0.1, -0.4], &[1.0, -1.0])
        .unwrap();
    assert!(h.as_slice().iter().all(|&v| v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jacobian_matches_central_differences(seed in any::<u64>(), depth in 1usize..5) {
        let (nn, x) = net(seed, depth, 9);
        let j = nn.jacobian(&x).unwrap();
        let h = 1e-6;
        for c in 0..x.len() {
            let fp = nn.forward(&perturbed(&x, c, h)).unwrap();
            let fm = nn.forward(&perturbed(&x, c, -h)).unwrap();
            for r in 0..nn.output_dim() {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                prop_assert!((fd - j[(r, c)]).abs() <= 1e-6, "{} vs {}", fd, j[(r, c)]);
            }
        }
    }

    #[test]
    fn weighted_gradient_is_jacobian_transpose(seed in any::<u64>(), depth in 1usize..5) {
        let (nn, x) = net(seed, depth, 9);
        let lam = lambda_for(&nn, seed);
        let g = nn.weighted_gradient(&x, &lam).unwrap();
        let jt = nn.jacobian(&x).unwrap().matvec_t(&lam);
        for (a, b) in g.iter().zip(&jt) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn hessian_matches_differences_of_gradient(seed in any::<u64>(), depth in 1usize..5) {
        let (nn, x) = net(seed, depth, 8);
        let lam = lambda_for(&nn, seed);
        let hm = nn.lagrangian_hessian(&x, &lam).unwrap();
        let h = 1e-5;
        for c in 0..x.len() {
            let gp = nn.weighted_gradient(&perturbed(&x, c, h), &lam).unwrap();
            let gm = nn.weighted_gradient(&perturbed(&x, c, -h), &lam).unwrap();
            for r in 0..x.len() {
                let fd = (gp[r] - gm[r]) / (2.0 * h);
                prop_assert!((fd - hm[(r, c)]).abs() <= 1e-5, "{} vs {}", fd, hm[(r, c)]);
            }
        }
    }

    #[test]
    fn hessian_is_symmetric_before_symmetrizing(seed in any::<u64>(), depth in 1usize..5) {
        let (nn, x) = net(seed, depth, 9);
        let lam = lambda_for(&nn, seed);
        let (_, asym) = nn.lagrangian_hessian_raw(&x, &lam).unwrap();
        prop_assert!(asym <= 1e-10);
    }

    #[test]
    fn hessian_is_linear_in_multipliers(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (nn, x) = net(seed, 2, 8);
        let l1 = lambda_for(&nn, seed);
        let l2 = lambda_for(&nn, seed ^ 1);
        let mix: Vec<f64> = l1.iter().zip(&l2).map(|(p, q)| a * p + b * q).collect();
        let h1 = nn.lagrangian_hessian(&x, &l1).unwrap();
        let h2 = nn.lagrangian_hessian(&x, &l2).unwrap();
        let hm = nn.lagrangian_hessian(&x, &mix).unwrap();
        let scale = h1.max_abs().max(h2.max_abs()).max(1.0);
        for k in 0..hm.as_slice().len() {
            let lin = a * h1.as_slice()[k] + b * h2.as_slice()[k];
            prop_assert!((hm.as_slice()[k] - lin).abs() <= 1e-12 * scale * 10.0);
        }
    }

    #[test]
    fn hessian_vector_product_matches_dense(seed in any::<u64>()) {
        let (nn, x) = net(seed, 3, 8);
        let lam = lambda_for(&nn, seed);
        let v: Vec<f64> = (0..x.len()).map(|i| (i as f64).sin()).collect();
        let hv = nn.hessian_vector_product(&x, &lam, &v).unwrap();
        let dense = nn.lagrangian_hessian(&x, &lam).unwrap().matvec(&v);
        for (p, q) in hv.iter().zip(&dense) {
            prop_assert!((p - q).abs() <= 1e-10);
        }
    }

    #[test]
    fn softmax_rows(z in proptest::collection::vec(-30.0f64..30.0, 1..12)) {
        let mut y = vec![0.0; z.len()];
        softmax(&z, &mut y);
        prop_assert!((y.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let j = softmax_jacobian(&y);
        for r in 0..z.len() {
            prop_assert!(j.row(r).iter().sum::<f64>().abs() <= 1e-12);
        }
    }

    #[test]
    fn oracles_are_deterministic(seed in any::<u64>()) {
        let (nn, x) = net(seed, 3, 8);
        let lam = lambda_for(&nn, seed);
        prop_assert_eq!(nn.forward(&x).unwrap(), nn.forward(&x).unwrap());
        prop_assert_eq!(nn.jacobian(&x).unwrap(), nn.jacobian(&x).unwrap());
        prop_assert_eq!(
            nn.lagrangian_hessian(&x, &lam).unwrap(),
            nn.lagrangian_hessian(&x, &lam).unwrap()
        );
    }
}
