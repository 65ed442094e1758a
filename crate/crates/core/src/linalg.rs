//! Dense complex matrices and the handful of Hermitian matrix functions the
//! rest of the crate is built on.
//!
//! Matrices are stored row-major as pairs of `f64`. Decompositions (Hermitian
//! eigenproblem, SVD, LU) are delegated to `nalgebra`; everything else is a
//! straightforward loop over the row-major buffer.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest row/column count `kron` will produce unless told otherwise.
pub const DEFAULT_MAX_KRON_DIM: usize = 4096;

/// Default eigenvalue clamp threshold for [`psd_sqrt`].
pub const DEFAULT_PSD_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Wire form: `{"rows": r, "cols": c, "entries": [[re, im], ...]}`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        let data = m.entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        ComplexMatrix::from_vec(m.rows, m.cols, data)
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        MatrixJson { rows: m.rows, cols: m.cols, entries: m.data.iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Square matrix from real rows; panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self::from_fn(n, m, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = C64::new(*d, 0.0);
        }
        m
    }

    pub fn from_complex_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    /// The matrix unit `e_{kl}` of size `n`.
    pub fn unit(n: usize, k: usize, l: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.data[k * n + l] = C64::new(1.0, 0.0);
        m
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance; panics on shape mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise distance; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `max |M[i,j] - conj(M[j,i])|`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && self
                .data
                .iter()
                .enumerate()
                .all(|(idx, z)| idx / self.cols == idx % self.cols || (z.re == 0.0 && z.im == 0.0))
    }

    /// `(M + M*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        (self + &adj).scale_real(0.5)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let (n, p, m) = (self.rows, self.cols, other.cols);
        let mut out = vec![C64::new(0.0, 0.0); n * m];
        for i in 0..n {
            let out_row = &mut out[i * m..(i + 1) * m];
            for k in 0..p {
                let a = self.data[i * p + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * m..(k + 1) * m];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(ComplexMatrix { rows: n, cols: m, data: out })
    }

    /// `self * diag(d)`: scales column `j` by `d[j]`.
    pub fn mul_diag_right(&self, d: &[C64]) -> Self {
        assert_eq!(self.cols, d.len(), "shape mismatch");
        let mut out = self.clone();
        for row in out.data.chunks_mut(self.cols) {
            for (z, s) in row.iter_mut().zip(d) {
                *z *= s;
            }
        }
        out
    }

    /// `diag(d) * self`: scales row `i` by `d[i]`.
    pub fn mul_diag_left(&self, d: &[C64]) -> Self {
        assert_eq!(self.rows, d.len(), "shape mismatch");
        let mut out = self.clone();
        for (row, s) in out.data.chunks_mut(self.cols).zip(d) {
            for z in row.iter_mut() {
                *z *= s;
            }
        }
        out
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!((self.rows, self.cols), (other.cols, other.rows), "shape mismatch");
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * other.data[k * other.cols + i];
            }
        }
        acc
    }

    /// Frobenius norm of `[self, other]`; zero without multiplying when both are diagonal.
    pub fn commutator_norm(&self, other: &Self) -> f64 {
        if self.is_diagonal() && other.is_diagonal() {
            return 0.0;
        }
        let ab = self * other;
        let ba = other * self;
        ab.distance(&ba)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        if self.is_diagonal() {
            return self.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        singular_values(self).into_iter().fold(0.0, f64::max)
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Random matrix with entries whose real and imaginary parts are uniform in `[-1, 1)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Kronecker product, refusing results larger than [`DEFAULT_MAX_KRON_DIM`].
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_limit(a, b, DEFAULT_MAX_KRON_DIM)
}

pub fn kron_with_limit(a: &ComplexMatrix, b: &ComplexMatrix, max_dim: usize) -> Result<ComplexMatrix> {
    let rows = a.rows.saturating_mul(b.rows);
    let cols = a.cols.saturating_mul(b.cols);
    if rows > max_dim || cols > max_dim {
        return Err(Error::DimensionOverflow { dim: rows.max(cols), max: max_dim });
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Spectral decomposition `m = V diag(values) V*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `V diag(f(values)) V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d: Vec<C64> = self.values.iter().map(|&v| C64::new(f(v), 0.0)).collect();
        if is_identity(&self.vectors) {
            return ComplexMatrix::from_complex_diag(&d);
        }
        let vd = self.vectors.mul_diag_right(&d);
        &vd * &self.vectors.adjoint()
    }
}

fn is_identity(m: &ComplexMatrix) -> bool {
    m.is_diagonal() && m.diagonal().iter().all(|z| z.re == 1.0 && z.im == 0.0)
}

/// Hermitian eigendecomposition. The input must be Hermitian within `tol`;
/// its Hermitian part is decomposed. Diagonal input is returned as-is.
pub fn eigh(m: &ComplexMatrix, tol: f64) -> Result<Eigh> {
    if !m.is_square() {
        return Err(Error::NonSquare(m.rows, m.cols));
    }
    let dev = m.hermitian_deviation();
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    if m.is_diagonal() {
        return Ok(Eigh {
            values: m.diagonal().iter().map(|z| z.re).collect(),
            vectors: ComplexMatrix::identity(m.rows),
        });
    }
    let se = nalgebra::SymmetricEigen::new(m.hermitian_part().to_nalgebra());
    Ok(Eigh {
        values: se.eigenvalues.iter().copied().collect(),
        vectors: ComplexMatrix::from_nalgebra(&se.eigenvectors),
    })
}

/// Positive semidefinite square root by spectral decomposition.
///
/// Eigenvalues in `[-tol, 0)` are clamped to zero; anything below `-tol`
/// means the input was not a positive operator.
pub fn psd_sqrt(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let e = eigh(m, tol)?;
    let min = e.min_value();
    if min < -tol {
        return Err(Error::NegativeEigenvalue(min));
    }
    Ok(e.map(|v| v.max(0.0).sqrt()))
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_diagonal() {
        return m.diagonal().iter().map(|z| z.norm()).collect();
    }
    m.to_nalgebra().singular_values().iter().copied().collect()
}

/// Smallest singular value; a value above `tol` certifies `|m^-1| <= 1/value`.
pub fn min_singular_value(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NonSquare(m.rows, m.cols));
    }
    Ok(singular_values(m).into_iter().fold(f64::INFINITY, f64::min).max(0.0))
}

/// Matrix inverse. Hermitian input goes through the eigendecomposition,
/// everything else through LU.
pub fn inverse(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let smin = min_singular_value(m)?;
    if !(smin > tol) {
        return Err(Error::Singular(smin));
    }
    if m.is_diagonal() {
        let d: Vec<C64> = m.diagonal().iter().map(|z| z.inv()).collect();
        return Ok(ComplexMatrix::from_complex_diag(&d));
    }
    let scale = m.max_abs().max(1.0);
    if m.hermitian_deviation() <= 1e-12 * scale {
        return Ok(eigh(m, f64::INFINITY)?.map(|v| 1.0 / v));
    }
    m.to_nalgebra().try_inverse().map(|inv| ComplexMatrix::from_nalgebra(&inv)).ok_or(Error::Singular(smin))
}
