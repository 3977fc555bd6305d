//! Dense complex linear algebra for finite-dimensional operators.
//!
//! Bipartite spaces are always ordered with the left factor varying slowest,
//! so index `(a, b)` of `H_A ⊗ H_B` is `a * dim_b + b`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative eigenvalue threshold below which a direction is outside the support.
pub const SUPPORT_TOL: f64 = 1e-10;
/// Negative eigenvalues down to `-CLAMP_TOL` are accepted (and zeroed) in states.
pub const CLAMP_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const NORM_TOL: f64 = 1e-12;
pub const SCHMIDT_TOL: f64 = 1e-10;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Builds a matrix from row-major entries, rejecting NaN/Inf.
pub fn matrix_from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<CMatrix> {
    if entries.len() != rows * cols {
        return Err(Error::Shape {
            what: "matrix",
            expected: rows * cols,
            found: entries.len(),
        });
    }
    if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite { what: "matrix" });
    }
    Ok(CMatrix::from_row_slice(rows, cols, entries))
}

pub fn real_diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(values.len(), values.iter().map(|&x| re(x))))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `Tr[A B]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Hilbert-Schmidt inner product `Tr[A^dagger B]`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * re(0.5)
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(m: &CMatrix) -> Result<f64> {
    Ok(eigh(m)?.values.iter().map(|x| x.abs()).sum())
}

pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.clone(), false, false, EIG_EPS, EIG_MAX_ITER).ok_or(Error::SvdFailure {
        rows: m.nrows(),
        cols: m.ncols(),
    })?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Count of singular values above `tol` (absolute).
pub fn numerical_rank(m: &CMatrix, tol: f64) -> Result<usize> {
    Ok(singular_values(m)?.into_iter().filter(|&s| s > tol).count())
}

/// Thin SVD `M = U diag(s) V^dagger` with singular values in nonincreasing order.
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v_t: CMatrix,
}

pub fn svd(m: &CMatrix) -> Result<Svd> {
    let dec = SVD::try_new(m.clone(), true, true, EIG_EPS, EIG_MAX_ITER).ok_or(Error::SvdFailure {
        rows: m.nrows(),
        cols: m.ncols(),
    })?;
    let u = dec.u.expect("requested U");
    let v_t = dec.v_t.expect("requested V^dagger");
    let mut order: Vec<usize> = (0..dec.singular_values.len()).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let u = CMatrix::from_columns(&order.iter().map(|&k| u.column(k).into_owned()).collect::<Vec<_>>());
    let v_t = CMatrix::from_rows(&order.iter().map(|&k| v_t.row(k).into_owned()).collect::<Vec<_>>());
    let s = order.iter().map(|&k| dec.singular_values[k]).collect();
    Ok(Svd { u, s, v_t })
}

/// Unitary (or partial-isometry) factor of the polar decomposition, keeping
/// at most `rank` singular directions (all of them when `None`).
pub fn polar_factor(m: &CMatrix, rank: Option<usize>) -> Result<CMatrix> {
    let Svd { u, s, v_t } = svd(m)?;
    let keep = rank.unwrap_or(s.len()).min(s.len());
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for k in 0..keep {
        out += u.column(k) * v_t.row(k);
    }
    Ok(out)
}

/// Eigendecomposition with eigenvalues ascending and orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|x| x)
    }

    /// `U diag(f(λ)) U^dagger` over every eigenvalue.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            for i in 0..d {
                scaled[(i, k)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Threshold separating the support from the kernel.
    pub fn support_threshold(&self, tol: f64) -> f64 {
        tol * self.max_value().max(0.0)
    }

    /// Eigenvalues strictly above `tol · λ_max` paired with their column index.
    pub fn support(&self, tol: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
        let cut = self.support_threshold(tol);
        let positive = self.max_value() > 0.0;
        self.values
            .iter()
            .copied()
            .enumerate()
            .filter(move |&(_, x)| positive && x > cut)
    }

    /// Columns spanning the support, as a `dim × rank` isometry.
    pub fn support_basis(&self, tol: f64) -> CMatrix {
        let cols: Vec<_> = self.support(tol).map(|(k, _)| self.vectors.column(k).into_owned()).collect();
        if cols.is_empty() {
            CMatrix::zeros(self.dim(), 0)
        } else {
            CMatrix::from_columns(&cols)
        }
    }

    /// Support-restricted functional calculus: `f` on retained eigenvalues, 0 elsewhere.
    pub fn support_apply(&self, f: impl Fn(f64) -> f64, tol: f64) -> Result<CMatrix> {
        let d = self.dim();
        let mut weights = vec![0.0; d];
        for (k, lam) in self.support(tol) {
            let w = f(lam);
            if !w.is_finite() {
                return Err(Error::Domain { eigenvalue: lam });
            }
            weights[k] = w;
        }
        let mut scaled = self.vectors.clone();
        for (k, &w) in weights.iter().enumerate() {
            for i in 0..d {
                scaled[(i, k)] *= w;
            }
        }
        Ok(scaled * self.vectors.adjoint())
    }
}

/// Eigendecomposition of the Hermitian part of a square matrix.
pub fn eigh(m: &CMatrix) -> Result<Spectrum> {
    let dim = m.nrows();
    if dim != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: "eigh (square matrix)",
            expected: dim,
            found: m.ncols(),
        });
    }
    if dim == 0 {
        return Ok(Spectrum {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let dec = SymmetricEigen::try_new(hermitian_part(m), EIG_EPS, EIG_MAX_ITER)
        .ok_or(Error::EigenNoConvergence { dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[a].total_cmp(&dec.eigenvalues[b]));
    let values = order.iter().map(|&k| dec.eigenvalues[k]).collect();
    let vectors = CMatrix::from_columns(&order.iter().map(|&k| dec.eigenvectors.column(k).into_owned()).collect::<Vec<_>>());
    Ok(Spectrum { values, vectors })
}

/// Self-adjoint operator, stored symmetrized.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                context: "Hermitian operator (square matrix)",
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if !matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite { what: "Hermitian operator" });
        }
        let deviation = max_abs(&(&matrix - matrix.adjoint()));
        if deviation > HERMITIAN_TOL * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(&matrix))
    }

    /// Takes the Hermitian part without checking; for internally produced operators.
    pub(crate) fn symmetrized(matrix: &CMatrix) -> Self {
        Self {
            matrix: hermitian_part(matrix),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self { matrix: real_diag(values) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Real expectation `Tr[H ρ]`.
    pub fn expectation(&self, rho: &CMatrix) -> f64 {
        trace_product(&self.matrix, rho).re
    }
}

/// `H = U diag(λ) U^dagger` with ascending eigenvalues.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<Spectrum> {
    eigh(h.matrix())
}

/// Applies `f` to the eigenvalues of `h` strictly above `support_tol · λ_max`;
/// the remaining eigenvalues map to zero (pseudo-inverse convention).
pub fn op_func(h: &HermitianOperator, f: impl Fn(f64) -> f64, support_tol: f64) -> Result<HermitianOperator> {
    if !(support_tol >= 0.0) {
        return Err(Error::InvalidParameter {
            reason: format!("support tolerance must be nonnegative, got {support_tol}"),
        });
    }
    let spec = eig_hermitian(h)?;
    Ok(HermitianOperator::symmetrized(&spec.support_apply(f, support_tol)?))
}

/// Positive unit-trace operator with its spectrum computed once at construction.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    op: HermitianOperator,
    spectrum: Spectrum,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::from_hermitian(HermitianOperator::new(matrix)?)
    }

    pub fn from_hermitian(op: HermitianOperator) -> Result<Self> {
        let mut spectrum = eig_hermitian(&op)?;
        let min = spectrum.values.first().copied().unwrap_or(0.0);
        if min < -CLAMP_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        let tr = trace(op.matrix()).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace: tr });
        }
        let op = if min < 0.0 {
            for v in spectrum.values.iter_mut() {
                *v = v.max(0.0);
            }
            HermitianOperator::symmetrized(&spectrum.reconstruct())
        } else {
            op
        };
        Ok(Self { op, spectrum })
    }

    /// Normalizes a nonzero positive matrix produced internally (channel outputs etc.).
    pub(crate) fn from_positive(matrix: &CMatrix) -> Result<Self> {
        let tr = trace(matrix).re;
        if !(tr > 0.0) {
            return Err(Error::BadTrace { trace: tr });
        }
        let mut spectrum = eigh(&(matrix * re(1.0 / tr)))?;
        let min = spectrum.values.first().copied().unwrap_or(0.0);
        if min < -CLAMP_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        for v in spectrum.values.iter_mut() {
            *v = v.max(0.0);
        }
        let sum: f64 = spectrum.values.iter().sum();
        for v in spectrum.values.iter_mut() {
            *v /= sum;
        }
        let op = HermitianOperator::symmetrized(&spectrum.reconstruct());
        Ok(Self { op, spectrum })
    }

    pub fn pure(v: &PureStateVector) -> Self {
        let m = v.amplitudes() * v.amplitudes().adjoint();
        Self::from_positive(&m).expect("projector onto a unit vector is a state")
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::diagonal(&vec![1.0 / dim as f64; dim]).expect("uniform distribution")
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(real_diag(probs))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        Self::pure(&PureStateVector::basis(dim, index))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.values
    }

    /// Number of eigenvalues above `tol` (absolute).
    pub fn rank(&self, tol: f64) -> usize {
        self.spectrum.values.iter().filter(|&&x| x > tol).count()
    }

    pub fn is_full_rank(&self) -> bool {
        self.spectrum.support(SUPPORT_TOL).count() == self.dim()
    }

    /// Trace-norm distance `‖ρ - σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        trace_norm_hermitian(&(self.matrix() - other.matrix()))
    }

    /// Convex mixture `Σ w_k ρ_k`; weights must sum to 1.
    pub fn mixture<'a>(terms: impl IntoIterator<Item = (f64, &'a DensityMatrix)>) -> Result<Self> {
        let mut acc: Option<CMatrix> = None;
        for (w, rho) in terms {
            let add = rho.matrix() * re(w);
            acc = Some(match acc {
                None => add,
                Some(m) => {
                    if m.nrows() != add.nrows() {
                        return Err(Error::DimensionMismatch {
                            context: "mixture",
                            expected: m.nrows(),
                            found: add.nrows(),
                        });
                    }
                    m + add
                }
            });
        }
        let m = acc.ok_or_else(|| Error::InvalidEnsemble {
            reason: "empty mixture".into(),
        })?;
        Self::new(m)
    }
}

/// Unit vector in a finite-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStateVector {
    amps: CVector,
}

impl PureStateVector {
    pub fn new(amps: CVector) -> Result<Self> {
        if !amps.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite { what: "state vector" });
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amps })
    }

    /// Rescales a nonzero vector to unit length.
    pub fn normalized(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(amps / re(norm))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = re(1.0);
        Self { amps: v }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::pure(self)
    }
}

/// Kronecker product `A ⊗ B` (left factor slow).
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of an operator on `H_A ⊗ H_B`, keeping the tagged factor.
pub fn partial_trace(m: &CMatrix, dims: (usize, usize), keep: Subsystem) -> Result<CMatrix> {
    let (da, db) = dims;
    let n = da * db;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "partial trace",
            expected: n,
            found: m.nrows().max(m.ncols()),
        });
    }
    Ok(match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Subsystem::B => CMatrix::from_fn(db, db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()),
    })
}

#[derive(Clone, Debug)]
pub struct Schmidt {
    /// Nonincreasing, nonnegative.
    pub coefficients: Vec<f64>,
    /// Columns `a_k` in `H_A`.
    pub left: CMatrix,
    /// Columns `b_k` in `H_B`.
    pub right: CMatrix,
}

impl Schmidt {
    pub fn rank(&self) -> usize {
        self.coefficients.iter().filter(|&&c| c > SCHMIDT_TOL).count()
    }
}

/// Reshapes a vector on `H_A ⊗ H_B` into its `dA × dB` coefficient matrix.
pub fn coefficient_matrix(v: &CVector, dims: (usize, usize)) -> CMatrix {
    CMatrix::from_fn(dims.0, dims.1, |i, j| v[i * dims.1 + j])
}

/// `v = Σ_k c_k a_k ⊗ b_k`.
pub fn schmidt(v: &PureStateVector, dims: (usize, usize)) -> Result<Schmidt> {
    let (da, db) = dims;
    if v.dim() != da * db {
        return Err(Error::DimensionMismatch {
            context: "Schmidt decomposition",
            expected: da * db,
            found: v.dim(),
        });
    }
    let Svd { u, s, v_t } = svd(&coefficient_matrix(v.amplitudes(), dims))?;
    Ok(Schmidt {
        coefficients: s,
        left: u,
        right: v_t.transpose(),
    })
}

/// Canonical purification `(√ρ ⊗ I)|Ω⟩`: the reference factor carries the
/// conjugate eigenbasis of ρ.
pub fn purify(rho: &DensityMatrix) -> PureStateVector {
    let root = rho.spectrum().apply(|x| x.max(0.0).sqrt());
    let d = rho.dim();
    let v = CVector::from_iterator(d * d, (0..d * d).map(|k| root[(k / d, k % d)]));
    PureStateVector::normalized(v).expect("purification of a state is nonzero")
}
