//! Dense complex-matrix kernel: products, adjoints, tensor products, partial
//! traces, norms, entropy, and the Schmidt decomposition.
//!
//! All bipartite indexing in this crate is B-major: the composite index of
//! subsystem pair (b, e) is `b * d_e + e`. Every operation here and in the
//! channel/geometry modules shares that convention.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Max entrywise deviation tolerated when checking hermiticity and traces.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalues of a density matrix may undershoot zero by at most this much.
pub const EIGENVALUE_CLAMP: f64 = -1e-10;
/// Unit-norm tolerance for pure states.
pub const STATE_NORM_TOL: f64 = 1e-12;

/// Dense complex matrix with row-major construction order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("matrix dimensions must be positive".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidState("matrix entries must be finite".into()));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &entries),
        })
    }

    pub(crate) fn from_dmatrix(inner: DMatrix<C64>) -> Self {
        Self { inner }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.inner[(i, j)] = v;
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Self {
            inner: &self.inner * &other.inner,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(Error::Shape("matrix addition requires equal shapes".into()));
        }
        Ok(Self {
            inner: &self.inner + &other.inner,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(Error::Shape("matrix subtraction requires equal shapes".into()));
        }
        Ok(Self {
            inner: &self.inner - &other.inner,
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            inner: self.inner.map(|c| c * factor),
        }
    }

    pub fn trace(&self) -> C64 {
        self.inner.diagonal().sum()
    }

    /// Largest entrywise deviation from the other matrix.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.inner.shape(), other.inner.shape());
        (&self.inner - &other.inner)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows();
        for i in 0..n {
            for j in i..n {
                if (self.inner[(i, j)] - self.inner[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub(crate) fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn row_major_entries(&self) -> Vec<C64> {
        let (r, c) = self.inner.shape();
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }
}

/// Unit vector in a d-dimensional complex space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: DVector<C64>,
}

impl PureState {
    /// Validates unit norm within `STATE_NORM_TOL`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Shape("state dimension must be positive".into()));
        }
        if amplitudes
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidState("state amplitudes must be finite".into()));
        }
        let amps = DVector::from_vec(amplitudes);
        let norm = amps.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm {norm} deviates from 1 by more than {STATE_NORM_TOL}"
            )));
        }
        Ok(Self { amps })
    }

    /// Normalizes an arbitrary nonzero vector into a state.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-150 {
            return Err(Error::InvalidState(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Ok(Self { amps: v / C64::new(norm, 0.0) })
    }

    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("state dimension must be positive".into()));
        }
        if index >= dim {
            return Err(Error::Domain(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = DVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub(crate) fn from_dvector(amps: DVector<C64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, i: usize) -> C64 {
        self.amps[i]
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amps.as_slice()
    }

    /// ⟨self|other⟩ with the conjugation on `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "inner product dimensions differ: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Real Euclidean inner product under the identification C^d ≅ R^{2d}.
    pub fn real_inner(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.re)
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.dim();
        let mat = DMatrix::from_fn(d, d, |i, j| self.amps[i] * self.amps[j].conj());
        DensityMatrix { mat }
    }

    /// Tensor product of two pure states, B-major on the left factor.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in self.amps.iter() {
            for b in other.amps.iter() {
                out.push(a * b);
            }
        }
        Self {
            amps: DVector::from_vec(out),
        }
    }

    /// Reduced density matrix of |self⟩⟨self| on the kept factor, computed
    /// from the d_B × d_E amplitude matrix without forming the full density.
    pub fn reduced_density(&self, shape: BipartiteShape, keep: Keep) -> Result<DensityMatrix> {
        shape.check_dim(self.dim())?;
        let m = self.amplitude_matrix(shape);
        let mat = match keep {
            Keep::B => &m * m.adjoint(),
            Keep::E => (m.adjoint() * &m).transpose(),
        };
        Ok(DensityMatrix { mat })
    }

    /// Reshapes amplitudes into the d_B × d_E matrix M[b, e] = ψ[b·d_E + e].
    pub(crate) fn amplitude_matrix(&self, shape: BipartiteShape) -> DMatrix<C64> {
        DMatrix::from_fn(shape.d_b(), shape.d_e(), |b, e| {
            self.amps[b * shape.d_e() + e]
        })
    }

    pub(crate) fn as_dvector(&self) -> &DVector<C64> {
        &self.amps
    }
}

/// Hermitian, positive-semidefinite, unit-trace matrix.
///
/// The constructor enforces hermiticity and unit trace; positivity is checked
/// by `validate_psd` (and implicitly by `von_neumann_entropy`), since it
/// requires a full eigensolve.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::from_dmatrix(matrix.inner)
    }

    pub(crate) fn from_dmatrix(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Shape("density matrix must be square".into()));
        }
        let n = mat.nrows();
        if n == 0 {
            return Err(Error::Shape("density matrix dimension must be positive".into()));
        }
        for i in 0..n {
            for j in i..n {
                let dev = (mat[(i, j)] - mat[(j, i)].conj()).norm();
                if dev > HERMITICITY_TOL {
                    return Err(Error::InvalidState(format!(
                        "hermiticity violated at ({i},{j}) by {dev:.3e}"
                    )));
                }
            }
        }
        let tr = mat.diagonal().sum();
        if (tr.re - 1.0).abs() > HERMITICITY_TOL || tr.im.abs() > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "trace {tr} deviates from 1 beyond {HERMITICITY_TOL}"
            )));
        }
        Ok(Self { mat })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        let mat = DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0));
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn trace(&self) -> C64 {
        self.mat.diagonal().sum()
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix {
            inner: self.mat.clone(),
        }
    }

    pub(crate) fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    /// Eigenvalues in non-increasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .mat
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        ev
    }

    /// Checks all eigenvalues exceed `EIGENVALUE_CLAMP`.
    pub fn validate_psd(&self) -> Result<()> {
        let min = self
            .eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < EIGENVALUE_CLAMP {
            return Err(Error::InvalidState(format!(
                "eigenvalue {min:.3e} below clamp {EIGENVALUE_CLAMP:.0e}"
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Bipartite factorization d_B × d_E of a composite dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteShape {
    d_b: usize,
    d_e: usize,
}

impl BipartiteShape {
    pub fn new(d_b: usize, d_e: usize) -> Result<Self> {
        if d_b == 0 || d_e == 0 {
            return Err(Error::Domain("bipartite factors must be positive".into()));
        }
        Ok(Self { d_b, d_e })
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn d_e(&self) -> usize {
        self.d_e
    }

    pub fn total(&self) -> usize {
        self.d_b * self.d_e
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.total() != dim {
            return Err(Error::Shape(format!(
                "bipartite shape {}x{} does not factor dimension {dim}",
                self.d_b, self.d_e
            )));
        }
        Ok(())
    }
}

/// Which tensor factor survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    B,
    E,
}

/// Schmidt form Σ_i √λ_i |e_i⟩⊗|f_i⟩ with non-increasing coefficients.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_basis: Vec<PureState>,
    pub right_basis: Vec<PureState>,
}

impl SchmidtDecomposition {
    /// Rebuilds the bipartite state Σ_i c_i |e_i⟩⊗|f_i⟩.
    pub fn reconstruct(&self) -> Result<PureState> {
        if self.left_basis.is_empty() {
            return Err(Error::InvalidState("empty Schmidt decomposition".into()));
        }
        let d_b = self.left_basis[0].dim();
        let d_e = self.right_basis[0].dim();
        let mut amps = DVector::<C64>::zeros(d_b * d_e);
        for ((c, e), f) in self
            .coefficients
            .iter()
            .zip(&self.left_basis)
            .zip(&self.right_basis)
        {
            for b in 0..d_b {
                for k in 0..d_e {
                    amps[b * d_e + k] += C64::new(*c, 0.0) * e.amplitude(b) * f.amplitude(k);
                }
            }
        }
        PureState::normalized(amps.iter().cloned().collect())
    }
}

/// Partial trace over the discarded factor, B-major indexing.
pub fn partial_trace(
    rho: &DensityMatrix,
    shape: BipartiteShape,
    keep: Keep,
) -> Result<DensityMatrix> {
    shape.check_dim(rho.dim())?;
    let (d_b, d_e) = (shape.d_b(), shape.d_e());
    let m = rho.as_dmatrix();
    let mat = match keep {
        Keep::B => DMatrix::from_fn(d_b, d_b, |b, bp| {
            (0..d_e).map(|e| m[(b * d_e + e, bp * d_e + e)]).sum()
        }),
        Keep::E => DMatrix::from_fn(d_e, d_e, |e, ep| {
            (0..d_b).map(|b| m[(b * d_e + e, b * d_e + ep)]).sum()
        }),
    };
    DensityMatrix::from_dmatrix(mat)
}

/// Largest singular value; for Hermitian input, the largest |eigenvalue|.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Shape("operator norm requires a square matrix".into()));
    }
    if m.is_hermitian(HERMITICITY_TOL) {
        Ok(hermitian_operator_norm(m.as_dmatrix()))
    } else {
        let svd = m.inner.clone().svd(false, false);
        Ok(svd.singular_values.iter().cloned().fold(0.0, f64::max))
    }
}

/// Largest |eigenvalue| of a Hermitian matrix via a full eigensolve.
pub(crate) fn hermitian_operator_norm(m: &DMatrix<C64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|e| e.abs())
        .fold(0.0, f64::max)
}

/// Trace norm of the projector difference, 2√(1 − |⟨φ|ψ⟩|²).
pub fn trace_distance(phi: &PureState, psi: &PureState) -> Result<f64> {
    let overlap = phi.inner(psi)?.norm_sqr();
    Ok(2.0 * (1.0 - overlap).max(0.0).sqrt())
}

/// Von Neumann entropy −Σ λ log₂ λ in bits, with 0·log 0 = 0.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut s = 0.0;
    for ev in rho.eigenvalues() {
        if ev < EIGENVALUE_CLAMP {
            return Err(Error::InvalidState(format!(
                "eigenvalue {ev:.3e} below clamp {EIGENVALUE_CLAMP:.0e}"
            )));
        }
        if ev > 0.0 {
            s -= ev * ev.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Schmidt decomposition of a bipartite pure state via SVD of its
/// amplitude matrix.
pub fn schmidt(phi: &PureState, shape: BipartiteShape) -> Result<SchmidtDecomposition> {
    shape.check_dim(phi.dim())?;
    let m = phi.amplitude_matrix(shape);
    let svd = m.svd(true, true);
    let u = svd.u.as_ref().expect("svd requested u");
    let v_t = svd.v_t.as_ref().expect("svd requested v_t");
    let k = svd.singular_values.len();
    let mut coefficients = Vec::with_capacity(k);
    let mut left_basis = Vec::with_capacity(k);
    let mut right_basis = Vec::with_capacity(k);
    // nalgebra sorts singular values in non-increasing order.
    for i in 0..k {
        coefficients.push(svd.singular_values[i]);
        left_basis.push(PureState::from_dvector(DVector::from_iterator(
            shape.d_b(),
            (0..shape.d_b()).map(|b| u[(b, i)]),
        )));
        // M = U Σ V†, so the right Schmidt vectors are the rows of V†.
        right_basis.push(PureState::from_dvector(DVector::from_iterator(
            shape.d_e(),
            (0..shape.d_e()).map(|e| v_t[(i, e)]),
        )));
    }
    Ok(SchmidtDecomposition {
        coefficients,
        left_basis,
        right_basis,
    })
}

/// Kronecker product with B-major index layout.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix {
        inner: a.inner.kronecker(&b.inner),
    }
}
