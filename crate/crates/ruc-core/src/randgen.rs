//! Reproducible sampling of Haar unitaries, uniform pure states, and random
//! subspace isometries from seeded, splittable streams.
//!
//! Streams are ChaCha8 instances addressed by (master seed, stream index).
//! Derived streams mix the parent index through a SplitMix64 finalizer, so a
//! trial can own a private stream and still split further without colliding
//! with its siblings.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, PureState, C64};

/// Address of a reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededStream {
    master_seed: u64,
    stream_index: u64,
}

impl SeededStream {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            stream_index: 0,
        }
    }

    pub fn with_index(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Instantiates the generator for this stream address.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Deterministic child stream; distinct indices give independent streams.
pub fn derive_stream(master: &SeededStream, trial_index: u64) -> SeededStream {
    SeededStream {
        master_seed: master.master_seed,
        stream_index: mix_index(master.stream_index, trial_index),
    }
}

/// SplitMix64 finalizer over the (parent, child) pair.
fn mix_index(parent: u64, child: u64) -> u64 {
    let mut z = parent ^ child.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Unitary matrix, U†U = I within 1e-10.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    matrix: DMatrix<C64>,
}

impl Unitary {
    /// Validating constructor for externally supplied matrices.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape("unitary must be square".into()));
        }
        let m = matrix.as_dmatrix().clone();
        let gram = m.adjoint() * &m;
        let d = m.nrows();
        for i in 0..d {
            for j in 0..d {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - C64::new(expected, 0.0)).norm() > 1e-10 {
                    return Err(Error::InvalidState(format!(
                        "U†U deviates from identity at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { matrix: m })
    }

    /// Construction from sources that guarantee unitarity (QR output).
    pub(crate) fn from_dmatrix_trusted(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_dmatrix(self.matrix.clone())
    }

    pub(crate) fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        if state.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "unitary dimension {} does not match state dimension {}",
                self.dim(),
                state.dim()
            )));
        }
        Ok(PureState::from_dvector(&self.matrix * state.as_dvector()))
    }
}

/// Standard complex Gaussian CN(0, 1).
fn complex_gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix of i.i.d. CN(0,1) entries, filled row-major.
fn ginibre(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let mut entries = Vec::with_capacity(d * d);
    for _ in 0..d * d {
        entries.push(complex_gaussian(rng));
    }
    DMatrix::from_row_slice(d, d, &entries)
}

/// Haar-distributed unitary via QR of a Ginibre matrix.
///
/// The Q factor alone is not Haar under an arbitrary QR convention; the
/// R-diagonal phases must be divided out so the triangular factor has a
/// real positive diagonal (Mezzadri's correction).
pub fn haar_unitary(d: usize, stream: &SeededStream) -> Result<Unitary> {
    if d == 0 {
        return Err(Error::Domain("unitary dimension must be positive".into()));
    }
    let mut rng = stream.rng();
    let g = ginibre(d, &mut rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let modulus = rjj.norm();
        let phase = if modulus > 1e-300 {
            rjj / modulus
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(Unitary::from_dmatrix_trusted(q))
}

/// Uniform state on the unit sphere of C^d: normalized i.i.d. CN(0,1) vector.
pub fn random_pure_state(d: usize, stream: &SeededStream) -> Result<PureState> {
    if d == 0 {
        return Err(Error::Domain("state dimension must be positive".into()));
    }
    let mut rng = stream.rng();
    loop {
        let v = DVector::from_fn(d, |_, _| complex_gaussian(&mut rng));
        let norm = v.norm();
        if norm > 1e-150 {
            return Ok(PureState::from_dvector(v / C64::new(norm, 0.0)));
        }
    }
}

/// First s columns of a Haar unitary on C^{d_total}; columns orthonormal.
pub fn random_subspace_isometry(
    d_total: usize,
    s: usize,
    stream: &SeededStream,
) -> Result<ComplexMatrix> {
    if d_total == 0 || s == 0 {
        return Err(Error::Domain("isometry dimensions must be positive".into()));
    }
    if s > d_total {
        return Err(Error::Domain(format!(
            "subspace dimension {s} exceeds total dimension {d_total}"
        )));
    }
    let u = haar_unitary(d_total, stream)?;
    let cols = u.as_dmatrix().columns(0, s).into_owned();
    Ok(ComplexMatrix::from_dmatrix(cols))
}

/// Draws one uniform f64 in [0, 1); used by statistical stream tests.
pub fn unit_uniform(stream: &SeededStream) -> f64 {
    stream.rng().gen::<f64>()
}
