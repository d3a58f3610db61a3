use graybox_core::linalg::{ldlt_factor, ldlt_solve, Inertia, Mat};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_mat(m: &DMatrix<f64>) -> Mat {
    let n = m.nrows();
    Mat::from_vec(n, n, (0..n * n).map(|k| m[(k / n, k % n)]).collect()).unwrap()
}

fn eigen_inertia(m: &DMatrix<f64>, tol: f64) -> Inertia {
    let eig = m.clone().symmetric_eigen().eigenvalues;
    let pos = eig.iter().filter(|&&e| e > tol).count();
    let neg = eig.iter().filter(|&&e| e < -tol).count();
    Inertia::new(pos, neg, eig.len() - pos - neg)
}

/// `Q diag(spectrum) Qᵀ` with a seeded orthogonal `Q`.
fn with_spectrum(spectrum: &[f64], seed: u64) -> DMatrix<f64> {
    let n = spectrum.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let q = g.qr().q();
    &q * DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(spectrum)) * q.transpose()
}

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&g + g.transpose()) * 0.5
}

#[test]
fn known_spectrum_inertia() {
    let a = with_spectrum(&[4.0, 3.0, 2.0, 1.0, -1.0, -2.0, -3.0, 0.0], 42);
    let f = ldlt_factor(&to_mat(&a)).unwrap();
    assert_eq!(f.inertia(), Inertia::new(4, 3, 1));
}

#[test]
fn small_solves() {
    let f = ldlt_factor(&Mat::identity(3)).unwrap();
    assert_eq!(
        ldlt_solve(&f, &[1.0, 2.0, 3.0]).unwrap(),
        vec![1.0, 2.0, 3.0]
    );
    let f = ldlt_factor(&Mat::from_diag(&[2.0, 4.0])).unwrap();
    assert_eq!(ldlt_solve(&f, &[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
}

#[test]
fn seeded_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let a = to_mat(&random_symmetric(10, &mut rng));
    let f = ldlt_factor(&a).unwrap();
    assert_eq!(f.inertia().zero, 0);
    for _ in 0..100 {
        let v: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = f.solve(&a.matvec(&v)).unwrap();
        let err = x
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = v.iter().map(|b| b.abs()).fold(0.0, f64::max);
        assert!(err <= 1e-8 * scale, "{err}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inertia_matches_eigenvalues(n in 1usize..14, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_symmetric(n, &mut rng);
        let eig = a.clone().symmetric_eigen().eigenvalues;
        // keep away from eigenvalues too close to zero to be classified reliably
        prop_assume!(eig.iter().all(|e| e.abs() > 1e-6));
        let f = ldlt_factor(&to_mat(&a)).unwrap();
        prop_assert_eq!(f.inertia(), eigen_inertia(&a, 0.0));
    }

    #[test]
    fn reconstruction(n in 1usize..14, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = to_mat(&random_symmetric(n, &mut rng));
        let f = ldlt_factor(&a).unwrap();
        let r = f.reconstruct();
        let scale = a.max_abs().max(1.0);
        for i in 0..n {
            for j in 0..n {
                prop_assert!((r[(i, j)] - a[(i, j)]).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn permutation_preserves_inertia(n in 2usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_symmetric(n, &mut rng);
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            p.swap(i, rng.gen_range(0..=i));
        }
        let pa = DMatrix::from_fn(n, n, |i, j| a[(p[i], p[j])]);
        let fa = ldlt_factor(&to_mat(&a)).unwrap();
        let fp = ldlt_factor(&to_mat(&pa)).unwrap();
        prop_assert_eq!(fa.inertia(), fp.inertia());
    }

    #[test]
    fn shift_past_smallest_eigenvalue_is_positive_definite(n in 1usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_symmetric(n, &mut rng);
        let lmin = a.clone().symmetric_eigen().eigenvalues.min();
        let shifted = &a + DMatrix::identity(n, n) * (lmin.abs() + 1e-3);
        let f = ldlt_factor(&to_mat(&shifted)).unwrap();
        prop_assert_eq!(f.inertia(), Inertia::new(n, 0, 0));
    }

    #[test]
    fn inertia_counts_sum_to_dimension(n in 1usize..16, seed in any::<u64>(), rank in 0usize..16) {
        // rank-deficient inputs exercise zero pivots
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rank.min(n);
        let b = DMatrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0));
        let signs: Vec<f64> = (0..k).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let a = &b * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(signs)) * b.transpose();
        let f = ldlt_factor(&to_mat(&a)).unwrap();
        prop_assert_eq!(f.inertia().dim(), n);
        prop_assert!(f.inertia().zero >= n - k);
    }
}
