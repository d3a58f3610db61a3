//! Symmetric indefinite LDLᵀ with Bunch-Kaufman partial pivoting.
//!
//! Computes `P A Pᵀ = L D Lᵀ` where `L` is unit lower triangular and `D` is block diagonal with
//! 1×1 and 2×2 blocks. Only the lower triangle of the input is referenced. The elimination
//! skips structurally zero entries of the pivot column, so matrices that are dense in storage
//! but sparse in content (KKT systems) factor in time proportional to the fill they produce.

use alloc::vec;
use alloc::vec::Vec;

use super::Mat;
use crate::math::{abs, sqrt};
use crate::{Error, Result};

/// Relative threshold below which a pivot eigenvalue counts as zero.
pub const ZERO_PIVOT_RTOL: f64 = 1e-11;

const SYMMETRY_TOL: f64 = 1e-12;

/// Counts of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn new(positive: usize, negative: usize, zero: usize) -> Self {
        Self {
            positive,
            negative,
            zero,
        }
    }

    pub fn dim(&self) -> usize {
        self.positive + self.negative + self.zero
    }
}

/// A diagonal block of `D`, identified by its leading position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pivot {
    One(usize),
    Two(usize),
}

#[derive(Debug, Clone)]
pub struct LdltFactorization {
    n: usize,
    // Strict lower part holds L (except the sub-diagonal of 2×2 blocks); D sits on the
    // diagonal and, for 2×2 blocks, at (k+1, k).
    factor: Mat,
    perm: Vec<usize>,
    pivots: Vec<Pivot>,
    inertia: Inertia,
    zero_tol: f64,
}

/// Factors a full symmetric matrix after checking shape, finiteness and symmetry.
pub fn ldlt_factor(a: &Mat) -> Result<LdltFactorization> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix to factor"));
    }
    let n = a.rows();
    let tol = SYMMETRY_TOL * a.max_abs().max(1.0);
    for i in 0..n {
        for j in 0..i {
            if abs(a[(i, j)] - a[(j, i)]) > tol {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    LdltFactorization::factor_lower(a.clone())
}

/// Solves `A x = b` with a previously computed factorization.
pub fn ldlt_solve(fact: &LdltFactorization, b: &[f64]) -> Result<Vec<f64>> {
    fact.solve(b)
}

impl LdltFactorization {
    /// Factors the symmetric matrix whose lower triangle is stored in `a`.
    ///
    /// The upper triangle is ignored and overwritten.
    pub fn factor_lower(a: Mat) -> Result<Self> {
        Self::factor_lower_with(a, None)
    }

    /// As [`factor_lower`](Self::factor_lower), with pivots of magnitude at most `zero_tol`
    /// counted as zero instead of the default relative threshold.
    pub fn factor_lower_with_tolerance(a: Mat, zero_tol: f64) -> Result<Self> {
        Self::factor_lower_with(a, Some(zero_tol))
    }

    fn factor_lower_with(mut a: Mat, zero_tol: Option<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let mut max_abs: f64 = 0.0;
        for i in 0..n {
            for &v in &a.row(i)[..=i] {
                if !v.is_finite() {
                    return Err(Error::NonFinite("matrix to factor"));
                }
                max_abs = max_abs.max(abs(v));
            }
        }
        let zero_tol = zero_tol.unwrap_or(ZERO_PIVOT_RTOL * max_abs);
        let alpha = (1.0 + sqrt(17.0)) / 8.0;

        let mut perm: Vec<usize> = (0..n).collect();
        let mut pivots = Vec::with_capacity(n);
        let mut inertia = Inertia::default();
        let mut nz: Vec<(usize, f64, f64)> = Vec::with_capacity(n);

        let mut k = 0;
        while k < n {
            let akk = abs(a[(k, k)]);
            let (r, colmax) = column_max(&a, k, k + 1);

            let two_by_two = if akk >= alpha * colmax {
                false
            } else {
                let rowmax = row_max_excluding(&a, r, k);
                if akk * rowmax >= alpha * colmax * colmax {
                    false
                } else if abs(a[(r, r)]) >= alpha * rowmax {
                    swap_symmetric(&mut a, &mut perm, k, r);
                    false
                } else {
                    if r != k + 1 {
                        swap_symmetric(&mut a, &mut perm, k + 1, r);
                    }
                    true
                }
            };

            if !two_by_two {
                let d = a[(k, k)];
                classify(d, zero_tol, &mut inertia);
                nz.clear();
                for i in k + 1..n {
                    let w = a[(i, k)];
                    if w != 0.0 {
                        nz.push((i, w, 0.0));
                    }
                }
                if d != 0.0 && !nz.is_empty() {
                    for t in 0..nz.len() {
                        let (i, wi, _) = nz[t];
                        let li = wi / d;
                        let row = a.row_mut(i);
                        for &(j, wj, _) in &nz[..=t] {
                            row[j] -= li * wj;
                        }
                        row[k] = li;
                    }
                }
                pivots.push(Pivot::One(k));
                k += 1;
            } else {
                let d11 = a[(k, k)];
                let d21 = a[(k + 1, k)];
                let d22 = a[(k + 1, k + 1)];
                let det = d11 * d22 - d21 * d21;
                let half_tr = 0.5 * (d11 + d22);
                let rad = sqrt(0.25 * (d11 - d22) * (d11 - d22) + d21 * d21);
                classify(half_tr + rad, zero_tol, &mut inertia);
                classify(half_tr - rad, zero_tol, &mut inertia);
                nz.clear();
                for i in k + 2..n {
                    let w0 = a[(i, k)];
                    let w1 = a[(i, k + 1)];
                    if w0 != 0.0 || w1 != 0.0 {
                        nz.push((i, w0, w1));
                    }
                }
                if det != 0.0 {
                    for t in 0..nz.len() {
                        let (i, w0, w1) = nz[t];
                        let l0 = (d22 * w0 - d21 * w1) / det;
                        let l1 = (d11 * w1 - d21 * w0) / det;
                        let row = a.row_mut(i);
                        for &(j, v0, v1) in &nz[..=t] {
                            row[j] -= l0 * v0 + l1 * v1;
                        }
                        row[k] = l0;
                        row[k + 1] = l1;
                    }
                }
                pivots.push(Pivot::Two(k));
                k += 2;
            }
        }

        Ok(Self {
            n,
            factor: a,
            perm,
            pivots,
            inertia,
            zero_tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn inertia(&self) -> Inertia {
        self.inertia
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn pivots(&self) -> &[Pivot] {
        &self.pivots
    }

    /// Absolute threshold used to classify pivots as zero.
    pub fn zero_tolerance(&self) -> f64 {
        self.zero_tol
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "ldlt solve right-hand side",
                expected: self.n,
                got: b.len(),
            });
        }
        if self.inertia.zero > 0 {
            return Err(Error::Singular {
                zero_pivots: self.inertia.zero,
            });
        }
        let n = self.n;
        let f = &self.factor;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();

        for &p in &self.pivots {
            match p {
                Pivot::One(k) => {
                    let yk = y[k];
                    if yk != 0.0 {
                        for i in k + 1..n {
                            y[i] -= f[(i, k)] * yk;
                        }
                    }
                }
                Pivot::Two(k) => {
                    let (y0, y1) = (y[k], y[k + 1]);
                    for i in k + 2..n {
                        y[i] -= f[(i, k)] * y0 + f[(i, k + 1)] * y1;
                    }
                }
            }
        }

        for &p in &self.pivots {
            match p {
                Pivot::One(k) => y[k] /= f[(k, k)],
                Pivot::Two(k) => {
                    let (d11, d21, d22) = (f[(k, k)], f[(k + 1, k)], f[(k + 1, k + 1)]);
                    let det = d11 * d22 - d21 * d21;
                    let (y0, y1) = (y[k], y[k + 1]);
                    y[k] = (d22 * y0 - d21 * y1) / det;
                    y[k + 1] = (d11 * y1 - d21 * y0) / det;
                }
            }
        }

        for &p in self.pivots.iter().rev() {
            match p {
                Pivot::One(k) => {
                    let mut acc = 0.0;
                    for i in k + 1..n {
                        acc += f[(i, k)] * y[i];
                    }
                    y[k] -= acc;
                }
                Pivot::Two(k) => {
                    let (mut a0, mut a1) = (0.0, 0.0);
                    for i in k + 2..n {
                        a0 += f[(i, k)] * y[i];
                        a1 += f[(i, k + 1)] * y[i];
                    }
                    y[k] -= a0;
                    y[k + 1] -= a1;
                }
            }
        }

        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        Ok(x)
    }

    /// Rebuilds `Pᵀ L D Lᵀ P`, i.e. the matrix that was factored.
    pub fn reconstruct(&self) -> Mat {
        let n = self.n;
        let mut l = Mat::identity(n);
        let mut d = Mat::zeros(n, n);
        for &p in &self.pivots {
            match p {
                Pivot::One(k) => {
                    d[(k, k)] = self.factor[(k, k)];
                    for i in k + 1..n {
                        l[(i, k)] = self.factor[(i, k)];
                    }
                }
                Pivot::Two(k) => {
                    d[(k, k)] = self.factor[(k, k)];
                    d[(k + 1, k)] = self.factor[(k + 1, k)];
                    d[(k, k + 1)] = self.factor[(k + 1, k)];
                    d[(k + 1, k + 1)] = self.factor[(k + 1, k + 1)];
                    for i in k + 2..n {
                        l[(i, k)] = self.factor[(i, k)];
                        l[(i, k + 1)] = self.factor[(i, k + 1)];
                    }
                }
            }
        }
        let pap = l.matmul(&d).matmul(&l.transpose());
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(self.perm[i], self.perm[j])] = pap[(i, j)];
            }
        }
        a
    }
}

fn classify(eig: f64, tol: f64, inertia: &mut Inertia) {
    if eig > tol {
        inertia.positive += 1;
    } else if eig < -tol {
        inertia.negative += 1;
    } else {
        inertia.zero += 1;
    }
}

/// Largest `|a[i][col]|` for `i >= from`, with its row.
fn column_max(a: &Mat, col: usize, from: usize) -> (usize, f64) {
    let mut best = (col, 0.0);
    for i in from..a.rows() {
        let v = abs(a[(i, col)]);
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Largest off-diagonal magnitude in row/column `r` of the active submatrix starting at `k`.
fn row_max_excluding(a: &Mat, r: usize, k: usize) -> f64 {
    let mut m: f64 = 0.0;
    for &v in &a.row(r)[k..r] {
        m = m.max(abs(v));
    }
    for i in r + 1..a.rows() {
        m = m.max(abs(a[(i, r)]));
    }
    m
}

/// Symmetric interchange of rows and columns `p < q` in lower-triangular storage.
fn swap_symmetric(a: &mut Mat, perm: &mut [usize], p: usize, q: usize) {
    if p == q {
        return;
    }
    let (p, q) = if p < q { (p, q) } else { (q, p) };
    let n = a.rows();
    for j in 0..p {
        let t = a[(p, j)];
        a[(p, j)] = a[(q, j)];
        a[(q, j)] = t;
    }
    let t = a[(p, p)];
    a[(p, p)] = a[(q, q)];
    a[(q, q)] = t;
    for i in p + 1..q {
        let t = a[(i, p)];
        a[(i, p)] = a[(q, i)];
        a[(q, i)] = t;
    }
    for i in q + 1..n {
        let t = a[(i, p)];
        a[(i, p)] = a[(i, q)];
        a[(i, q)] = t;
    }
    perm.swap(p, q);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Mat {
        // Gram-Schmidt on a random matrix.
        let mut q = Mat::zeros(n, n);
        for j in 0..n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for k in 0..j {
                let proj: f64 = (0..n).map(|i| q[(i, k)] * v[i]).sum();
                for i in 0..n {
                    v[i] -= proj * q[(i, k)];
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for i in 0..n {
                q[(i, j)] = v[i] / norm;
            }
        }
        q
    }

    fn with_spectrum(spectrum: &[f64], seed: u64) -> Mat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_orthogonal(spectrum.len(), &mut rng);
        let mut a = q.matmul(&Mat::from_diag(spectrum)).matmul(&q.transpose());
        a.symmetrize();
        a
    }

    fn random_symmetric(n: usize, seed: u64) -> Mat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    #[test]
    fn identity_inertia() {
        let f = ldlt_factor(&Mat::identity(3)).unwrap();
        assert_eq!(f.inertia(), Inertia::new(3, 0, 0));
    }

    #[test]
    fn diagonal_inertia() {
        let f = ldlt_factor(&Mat::from_diag(&[2.0, -5.0])).unwrap();
        assert_eq!(f.inertia(), Inertia::new(1, 1, 0));
    }

    #[test]
    fn known_spectrum_inertia() {
        let a = with_spectrum(&[4.0, 3.0, 2.0, 1.0, -1.0, -2.0, -3.0, 0.0], 11);
        let f = ldlt_factor(&a).unwrap();
        assert_eq!(f.inertia(), Inertia::new(4, 3, 1));
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let f = ldlt_factor(&Mat::identity(3)).unwrap();
        assert_eq!(f.solve(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let f = ldlt_factor(&Mat::from_diag(&[2.0, 4.0])).unwrap();
        assert_eq!(f.solve(&[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn seeded_round_trip_recovers_solution() {
        let a = random_symmetric(10, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x_true: Vec<f64> = (0..10).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b = a.matvec(&x_true);
        let f = ldlt_factor(&a).unwrap();
        let x = f.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-8, "{u} vs {v}");
        }
    }

    #[test]
    fn reconstruction_matches_input() {
        for seed in 0..20 {
            let a = random_symmetric(12, seed);
            let f = ldlt_factor(&a).unwrap();
            let r = f.reconstruct();
            let scale = a.max_abs();
            for i in 0..12 {
                for j in 0..12 {
                    assert!((r[(i, j)] - a[(i, j)]).abs() <= 1e-10 * scale);
                }
            }
        }
    }

    #[test]
    fn two_by_two_pivots_used_on_zero_diagonal() {
        let a = Mat::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 2.0], [0.0, 2.0, 0.0]]).unwrap();
        let f = ldlt_factor(&a).unwrap();
        assert!(f.pivots().iter().any(|p| matches!(p, Pivot::Two(_))));
        assert_eq!(f.inertia().dim(), 3);
        // eigenvalues are 0 and ±√5
        assert_eq!(f.inertia(), Inertia::new(1, 1, 1));
    }

    #[test]
    fn singular_solve_rejected() {
        let f = ldlt_factor(&Mat::from_diag(&[1.0, 0.0])).unwrap();
        assert_eq!(f.inertia(), Inertia::new(1, 0, 1));
        assert_eq!(
            f.solve(&[1.0, 1.0]),
            Err(Error::Singular { zero_pivots: 1 })
        );
    }

    #[test]
    fn structural_and_numeric_errors() {
        assert!(matches!(
            ldlt_factor(&Mat::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        let a = Mat::from_rows(&[[1.0, 2.0], [2.1, 1.0]]).unwrap();
        assert!(matches!(ldlt_factor(&a), Err(Error::NotSymmetric { .. })));
        let a = Mat::from_rows(&[[1.0, f64::NAN], [f64::NAN, 1.0]]).unwrap();
        assert!(matches!(ldlt_factor(&a), Err(Error::NonFinite(_))));
        let f = ldlt_factor(&Mat::identity(2)).unwrap();
        assert!(matches!(
            f.solve(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lower_only_storage_is_enough() {
        let a = random_symmetric(9, 3);
        let mut lower = a.clone();
        for i in 0..9 {
            for j in i + 1..9 {
                lower[(i, j)] = f64::NAN;
            }
        }
        let b: Vec<f64> = (0..9).map(|i| i as f64 - 4.0).collect();
        let x1 = ldlt_factor(&a).unwrap().solve(&b).unwrap();
        let x2 = LdltFactorization::factor_lower(lower)
            .unwrap()
            .solve(&b)
            .unwrap();
        assert_eq!(x1, x2);
    }
}
