//! Dense complex Hermitian linear algebra.
//!
//! Everything downstream (entropies, posteriors, the dual solvers) works on
//! [`HermitianOperator`] values and their [`SpectralDecomposition`]. Matrices
//! are small (dim ≤ 64), stored row-major, and diagonalized with a cyclic
//! complex Jacobi method, which is accurate to a few ulps at this scale.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    dim: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn new(dim: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::shape(
                format!("{} entries for dim {dim}", dim * dim),
                format!("{} entries", entries.len()),
            ));
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * n + i] = Complex::new(d, T::zero());
        }
        m
    }

    /// Builds a matrix from a function of (row, column).
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let entries = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex<T>) {
        self.entries[row * self.dim + col] = value;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim)
            .map(|i| self.get(i, i))
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z.scale(factor)).collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> T {
        self.entries.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Max-norm distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Tensor product, with entry `(i·d_B + k, j·d_B + l) = A_ij · B_kl`.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        Self::from_fn(da * db, |r, c| {
            let (i, k) = (r / db, r % db);
            let (j, l) = (c / db, c % db);
            self.get(i, j) * other.get(k, l)
        })
    }

    /// Traces out one factor of a bipartite matrix on `dims.0 ⊗ dims.1`,
    /// keeping `keep`.
    pub fn partial_trace(&self, dims: (usize, usize), keep: Subsystem) -> Result<Self> {
        let (d1, d2) = dims;
        if d1 == 0 || d2 == 0 || d1 * d2 != self.dim {
            return Err(Error::shape(
                format!("dim {}", self.dim),
                format!("subsystem dims {d1}×{d2}"),
            ));
        }
        let zero = Complex::new(T::zero(), T::zero());
        let out = match keep {
            Subsystem::First => Self::from_fn(d1, |i, j| {
                (0..d2).fold(zero, |acc, k| acc + self.get(i * d2 + k, j * d2 + k))
            }),
            Subsystem::Second => Self::from_fn(d2, |k, l| {
                (0..d1).fold(zero, |acc, i| acc + self.get(i * d2 + k, i * d2 + l))
            }),
        };
        Ok(out)
    }

    /// `‖M − M†‖_max`.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    fn symmetrized(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.dim, |i, j| (self.get(i, j) + self.get(j, i).conj()).scale(half))
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] = out.entries[i * n + j] + a * rhs.get(k, j);
                }
            }
        }
        out
    }
}

/// Which factor of a bipartite space to keep in [`ComplexMatrix::partial_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Wire form: `{ "dim": n, "entries": [[re, im], ...] }`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixRepr<T> {
    dim: usize,
    entries: Vec<[T; 2]>,
}

impl<T: Real + Serialize> Serialize for ComplexMatrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            dim: self.dim,
            entries: self.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for ComplexMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::<T>::deserialize(deserializer)?;
        let entries = repr.entries.into_iter().map(|[re, im]| Complex::new(re, im)).collect();
        ComplexMatrix::new(repr.dim, entries).map_err(serde::de::Error::custom)
    }
}

/// A complex matrix known to be Hermitian. The stored form is `(M + M†)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T> {
    matrix: ComplexMatrix<T>,
    hermiticity_tol: T,
}

impl<T: Real> HermitianOperator<T> {
    pub const DEFAULT_TOL: f64 = 1e-12;

    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        Self::with_tolerance(matrix, T::tolerance(Self::DEFAULT_TOL))
    }

    pub fn with_tolerance(matrix: ComplexMatrix<T>, tol: T) -> Result<Self> {
        let deviation = matrix.hermiticity_defect();
        if !(deviation <= tol) {
            return Err(Error::NotHermitian {
                deviation: deviation.to_f64_lossy(),
                tol: tol.to_f64_lossy(),
            });
        }
        Ok(Self {
            matrix: matrix.symmetrized(),
            hermiticity_tol: tol,
        })
    }

    /// Symmetrizes without checking; for matrices Hermitian by construction.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix<T>) -> Self {
        Self {
            matrix: matrix.symmetrized(),
            hermiticity_tol: T::tolerance(Self::DEFAULT_TOL),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix_unchecked(ComplexMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix_unchecked(ComplexMatrix::zeros(dim))
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        Self::from_matrix_unchecked(ComplexMatrix::from_real_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn hermiticity_tol(&self) -> T {
        self.hermiticity_tol
    }

    /// Real trace.
    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.matrix.get(i, i).re).collect()
    }

    pub fn scale(&self, factor: T) -> Self {
        Self::from_matrix_unchecked(self.matrix.scale(factor))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self::from_matrix_unchecked(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self::from_matrix_unchecked(&self.matrix - &other.matrix))
    }

    /// `self + factor·other`.
    pub fn add_scaled(&self, factor: T, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        let entries = self
            .matrix
            .entries
            .iter()
            .zip(&other.matrix.entries)
            .map(|(a, b)| a + b.scale(factor))
            .collect();
        Ok(Self::from_matrix_unchecked(ComplexMatrix {
            dim: self.dim(),
            entries,
        }))
    }

    /// Tensor product of Hermitian operators (Hermitian again).
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(self.matrix.kron(&other.matrix))
    }

    pub fn partial_trace(&self, dims: (usize, usize), keep: Subsystem) -> Result<Self> {
        self.matrix.partial_trace(dims, keep).map(Self::from_matrix_unchecked)
    }

    pub fn eigh(&self) -> Result<SpectralDecomposition<T>> {
        eigh(self)
    }

    /// Spectral function `U·diag(f(λ))·U†`; fails with a domain error if some
    /// eigenvalue is `≤ domain_guard`.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T, domain_guard: Option<T>) -> Result<Self> {
        matrix_function(self, f, domain_guard)
    }

    pub fn exp(&self) -> Result<Self> {
        matrix_function(self, T::exp, None)
    }

    /// Natural matrix logarithm; requires a strictly positive spectrum.
    pub fn ln(&self) -> Result<Self> {
        matrix_function(self, T::ln, Some(T::zero()))
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::shape(format!("dim {a}"), format!("dim {b}")));
    }
    Ok(())
}

impl<T: Real + Serialize> Serialize for HermitianOperator<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for HermitianOperator<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let matrix = ComplexMatrix::<T>::deserialize(deserializer)?;
        HermitianOperator::new(matrix).map_err(serde::de::Error::custom)
    }
}

/// Eigenvalues in ascending order with the matching eigenvectors as the
/// columns of `unitary`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition<T> {
    pub eigenvalues: Vec<T>,
    pub unitary: ComplexMatrix<T>,
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `U·diag(values)·U†` for arbitrary per-eigenvector weights.
    pub fn compose(&self, values: &[T]) -> HermitianOperator<T> {
        assert_eq!(values.len(), self.dim(), "one value per eigenvector");
        let n = self.dim();
        let u = &self.unitary;
        let m = ComplexMatrix::from_fn(n, |i, j| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (k, &v) in values.iter().enumerate() {
                acc = acc + u.get(i, k) * u.get(j, k).conj() * v;
            }
            acc
        });
        HermitianOperator::from_matrix_unchecked(m)
    }

    /// Applies `f` to every eigenvalue and recomposes.
    pub fn apply(&self, f: impl Fn(T) -> T) -> HermitianOperator<T> {
        let values: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.compose(&values)
    }
}

/// Diagonalizes a Hermitian operator with cyclic complex Jacobi rotations.
pub fn eigh<T: Real>(op: &HermitianOperator<T>) -> Result<SpectralDecomposition<T>> {
    let n = op.dim();
    let mut a = op.matrix.clone();
    let mut v = ComplexMatrix::<T>::identity(n);

    let scale = a.frobenius_norm();
    let threshold = T::epsilon() * scale;
    let mut converged = n == 1 || scale == T::zero();
    let mut sweeps = 0;

    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::SolverFailure {
                dim: n,
                iterations: sweeps,
            });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = off_diagonal_norm(&a) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let unitary = ComplexMatrix::from_fn(n, |r, c| v.get(r, order[c]));
    Ok(SpectralDecomposition { eigenvalues, unitary })
}

fn off_diagonal_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let n = a.dim;
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc = acc + a.get(i, j).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// One Jacobi rotation zeroing `a[p][q]`. The 2×2 unitary first removes the
/// phase of `a[p][q]` and then applies the real symmetric rotation.
fn rotate<T: Real>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = a.get(p, q);
    let r = apq.norm();
    if r == T::zero() {
        return;
    }
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    let phase = apq.unscale(r);

    let tau = (aqq - app) / (T::lit(2.0) * r);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    let g_pp = phase.scale(c);
    let g_pq = phase.scale(s);
    let g_qp = Complex::new(-s, T::zero());
    let g_qq = Complex::new(c, T::zero());

    let n = a.dim;
    // A ← A·G
    for k in 0..n {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp * g_pp + akq * g_qp);
        a.set(k, q, akp * g_pq + akq * g_qq);
    }
    // A ← G†·A
    for k in 0..n {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, g_pp.conj() * apk + g_qp.conj() * aqk);
        a.set(q, k, g_pq.conj() * apk + g_qq.conj() * aqk);
    }
    let zero = Complex::new(T::zero(), T::zero());
    a.set(p, q, zero);
    a.set(q, p, zero);
    a.set(p, p, Complex::new(a.get(p, p).re, T::zero()));
    a.set(q, q, Complex::new(a.get(q, q).re, T::zero()));
    // V ← V·G
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * g_pp + vkq * g_qp);
        v.set(k, q, vkp * g_pq + vkq * g_qq);
    }
}

/// `U·diag(f(λ_i))·U†`. With `domain_guard = Some(g)`, any eigenvalue `≤ g`
/// is rejected before `f` is applied.
pub fn matrix_function<T: Real>(
    op: &HermitianOperator<T>,
    f: impl Fn(T) -> T,
    domain_guard: Option<T>,
) -> Result<HermitianOperator<T>> {
    let spectrum = eigh(op)?;
    if let Some(guard) = domain_guard {
        let lowest = spectrum.min_eigenvalue();
        if lowest <= guard {
            return Err(Error::Domain {
                eigenvalue: lowest.to_f64_lossy(),
                bound: guard.to_f64_lossy(),
            });
        }
    }
    Ok(spectrum.apply(f))
}

pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.kron(b)
}

pub fn partial_trace<T: Real>(c: &ComplexMatrix<T>, dims: (usize, usize), keep: Subsystem) -> Result<ComplexMatrix<T>> {
    c.partial_trace(dims, keep)
}

/// `Re Tr(A·B)` for Hermitian `A`, `B`.
pub fn trace_product<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> Result<T> {
    check_same_dim(a.dim(), b.dim())?;
    let n = a.dim();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        for j in 0..n {
            acc = acc + a.matrix.get(i, j) * b.matrix.get(j, i);
        }
    }
    debug_assert!(
        acc.im.abs() <= T::tolerance(1e-10) * (T::one() + a.matrix.frobenius_norm() * b.matrix.frobenius_norm()),
        "trace of a product of Hermitian operators has imaginary part {:?}",
        acc.im
    );
    Ok(acc.re)
}

/// Pauli matrices and the identity on a qubit.
pub mod pauli {
    use super::*;

    fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
        Complex::new(T::lit(re), T::lit(im))
    }

    pub fn identity<T: Real>() -> HermitianOperator<T> {
        HermitianOperator::identity(2)
    }

    pub fn sigma_x<T: Real>() -> HermitianOperator<T> {
        let m = ComplexMatrix::new(2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        HermitianOperator::from_matrix_unchecked(m)
    }

    pub fn sigma_y<T: Real>() -> HermitianOperator<T> {
        let m = ComplexMatrix::new(2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap();
        HermitianOperator::from_matrix_unchecked(m)
    }

    pub fn sigma_z<T: Real>() -> HermitianOperator<T> {
        HermitianOperator::from_real_diagonal(&[T::one(), -T::one()])
    }

    /// `c1·1 + cx·σx + cy·σy + cz·σz`.
    pub fn combination<T: Real>(coefficients: [T; 4]) -> HermitianOperator<T> {
        let [c1, cx, cy, cz] = coefficients;
        let m = ComplexMatrix::new(
            2,
            vec![
                Complex::new(c1 + cz, T::zero()),
                Complex::new(cx, -cy),
                Complex::new(cx, cy),
                Complex::new(c1 - cz, T::zero()),
            ],
        )
        .unwrap();
        HermitianOperator::from_matrix_unchecked(m)
    }
}
