//! Dense complex linear algebra: the matrix carrier type, Kronecker
//! products, Hermitian eigendecomposition, and matrix functions via
//! spectral calculus.
//!
//! Everything here is desk-scale dense double precision. Sparse formats
//! and iterative solvers are out of scope.

mod eig;

pub use eig::{hermitian_eig, EigenDecomposition};

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Relative tolerance for the Hermitian-input check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Build from row-major real entries (imaginary parts zero).
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            data: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_at(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] += v;
    }

    pub fn row_slice(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.at(r, c)).collect()
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.at(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest |M[i][j] - conj(M[j][i])| with its location.
    pub fn hermitian_deviation(&self) -> (f64, usize, usize) {
        let mut worst = (0.0f64, 0usize, 0usize);
        for i in 0..self.rows {
            for j in i..self.cols {
                let dev = (self.at(i, j) - self.at(j, i).conj()).norm();
                if dev > worst.0 {
                    worst = (dev, i, j);
                }
            }
        }
        worst
    }

    /// Reject non-square or non-Hermitian input, naming the worst offender.
    pub fn require_hermitian(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let tol = HERMITIAN_TOL * (1.0 + self.max_abs());
        let (dev, i, j) = self.hermitian_deviation();
        if dev > tol {
            return Err(Error::NotHermitian {
                row: i,
                col: j,
                deviation: dev,
                tolerance: tol,
            });
        }
        Ok(())
    }

    /// True when every imaginary part is exactly zero (enables the real
    /// symmetric fast path in the eigensolver).
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.at(c, r).conj())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add_scaled_in_place(&mut self, other: &Self, factor: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * factor;
        }
    }

    /// Plain dense product (ikj loop order for cache friendliness).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row_slice(i);
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &aik) in a_row.iter().enumerate() {
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let b_row = other.row_slice(k);
                for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                    *o += aik * bkj;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|r| {
                self.row_slice(r)
                    .iter()
                    .zip(v)
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect()
    }
}

/// Kronecker product a (x) b. Rejected when an output dimension would
/// exceed `cap`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let rows = a
        .rows()
        .checked_mul(b.rows())
        .ok_or(Error::DimensionCap { dim: usize::MAX, cap })?;
    let cols = a
        .cols()
        .checked_mul(b.cols())
        .ok_or(Error::DimensionCap { dim: usize::MAX, cap })?;
    let dim = rows.max(cols);
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a.at(i, j);
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out.set(i * b.rows() + k, j * b.cols() + l, aij * b.at(k, l));
                }
            }
        }
    }
    Ok(out)
}

/// f(M) for Hermitian M via the spectral decomposition V f(diag) V^dag.
/// Rejects input whose transformed eigenvalues are not finite (the caller
/// must shift the spectrum first; see the thermal-state builder).
pub fn matrix_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let mapped: Vec<f64> = eig.eigenvalues.iter().map(|&x| f(x)).collect();
    if let Some(bad) = mapped.iter().find(|x| !x.is_finite()) {
        return Err(Error::Overflow {
            context: format!("matrix_function produced non-finite value {bad}"),
        });
    }
    Ok(reconstruct_hermitian(&eig.eigenvectors, &mapped))
}

/// V diag(w) V^dag, symmetrized so the output is exactly Hermitian.
pub fn reconstruct_hermitian(v: &ComplexMatrix, weights: &[f64]) -> ComplexMatrix {
    let n = v.rows();
    assert_eq!(weights.len(), n);
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &w) in weights.iter().enumerate() {
                acc += v.at(i, k) * w * v.at(j, k).conj();
            }
            out.set(i, j, acc);
            if i == j {
                out.set(i, i, Complex64::new(acc.re, 0.0));
            } else {
                out.set(j, i, acc.conj());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::task_rng;
    use rand::Rng;

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub(crate) fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = task_rng(seed, "test-hermitian", 0);
        let a = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        a.add(&a.adjoint()).scaled(Complex64::new(0.5, 0.0))
    }

    #[test]
    fn kron_identity_cases() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = kron(&i2, &i2, 64).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));

        let zz = kron(&pauli_z(), &pauli_z(), 64).unwrap();
        let expect = ComplexMatrix::from_real(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0, //
                0.0, 0.0, -1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        assert_eq!(zz, expect);
    }

    #[test]
    fn kron_block_structure_via_index_formula() {
        // Oracle: K[i*br + k][j*bc + l] = A[i][j] * B[k][l], checked entry-wise.
        let mut rng = task_rng(3, "test-kron", 0);
        let a = ComplexMatrix::from_fn(2, 2, |_, _| {
            Complex64::new(rng.gen::<f64>(), rng.gen::<f64>())
        });
        let b = ComplexMatrix::from_fn(3, 3, |_, _| {
            Complex64::new(rng.gen::<f64>(), rng.gen::<f64>())
        });
        let k = kron(&a, &b, 64).unwrap();
        assert_eq!(k.rows(), 6);
        assert_eq!(k.cols(), 6);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..3 {
                    for q in 0..3 {
                        let got = k.at(i * 3 + p, j * 3 + q);
                        let want = a.at(i, j) * b.at(p, q);
                        assert!((got - want).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn kron_rejects_beyond_cap() {
        let i64m = ComplexMatrix::identity(64);
        match kron(&i64m, &i64m, 1024) {
            Err(Error::DimensionCap { dim, cap }) => {
                assert_eq!(dim, 4096);
                assert_eq!(cap, 1024);
            }
            other => panic!("expected DimensionCap, got {other:?}"),
        }
    }

    #[test]
    fn matrix_function_identity_map_returns_input() {
        let m = random_hermitian(6, 11);
        let f = matrix_function(&m, |x| x).unwrap();
        assert!(f.sub(&m).max_abs() < 1e-10);
    }

    #[test]
    fn matrix_function_exp_of_zero_is_identity() {
        let z = ComplexMatrix::zeros(4, 4);
        let e = matrix_function(&z, f64::exp).unwrap();
        assert!(e.sub(&ComplexMatrix::identity(4)).max_abs() < 1e-12);
    }

    #[test]
    fn matrix_function_exp_on_log_diagonal() {
        let m = ComplexMatrix::from_real(2, 2, &[2.0f64.ln(), 0.0, 0.0, 3.0f64.ln()]);
        let e = matrix_function(&m, f64::exp).unwrap();
        assert!((e.at(0, 0).re - 2.0).abs() < 1e-12);
        assert!((e.at(1, 1).re - 3.0).abs() < 1e-12);
        assert!(e.at(0, 1).norm() < 1e-12);
    }

    #[test]
    fn matrix_function_rejects_overflow() {
        let m = ComplexMatrix::from_real(2, 2, &[1000.0, 0.0, 0.0, -1000.0]);
        assert!(matches!(
            matrix_function(&m, f64::exp),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn exp_times_exp_minus_is_identity() {
        let m = random_hermitian(8, 5);
        let a = matrix_function(&m, f64::exp).unwrap();
        let b = matrix_function(&m, |x| (-x).exp()).unwrap();
        let prod = a.mul(&b);
        assert!(prod.sub(&ComplexMatrix::identity(8)).max_abs() < 1e-8);
    }

    #[test]
    fn hermitian_check_names_worst_offender() {
        let mut m = ComplexMatrix::identity(3);
        m.set(0, 2, Complex64::new(0.5, 0.0));
        match m.require_hermitian() {
            Err(Error::NotHermitian { row, col, deviation, .. }) => {
                assert_eq!((row, col), (0, 2));
                assert!((deviation - 0.5).abs() < 1e-15);
            }
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn non_square_rejected() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            m.require_hermitian(),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn pauli_x_is_hermitian_and_real() {
        assert!(pauli_x().require_hermitian().is_ok());
        assert!(pauli_x().is_real());
        assert!(!random_hermitian(4, 1).is_real());
    }
}
