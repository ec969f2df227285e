//! Random unitary channels: construction from Haar samples, forward
//! application, the Stinespring isometry, and the conjugate channel.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, PureState, C64};
use crate::randgen::{derive_stream, haar_unitary, SeededStream, Unitary};

/// Mixture of unitary conjugations N(ρ) = Σ_i ω_i U_i ρ U_i†.
///
/// The number of Kraus terms doubles as the environment dimension d_E; the
/// environment basis |i⟩_E is the computational basis in definition order.
#[derive(Debug, Clone)]
pub struct RandomUnitaryChannel {
    d_a: usize,
    unitaries: Vec<Unitary>,
    weights: Vec<f64>,
}

impl RandomUnitaryChannel {
    pub fn new(unitaries: Vec<Unitary>, weights: Vec<f64>) -> Result<Self> {
        if unitaries.is_empty() || unitaries.len() != weights.len() {
            return Err(Error::Shape(
                "channel needs equally many unitaries and weights, at least one".into(),
            ));
        }
        let d_a = unitaries[0].dim();
        if unitaries.iter().any(|u| u.dim() != d_a) {
            return Err(Error::Shape("all channel unitaries must share one dimension".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Domain("channel weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "channel weights must sum to 1 within 1e-12, got {total}"
            )));
        }
        Ok(Self {
            d_a,
            unitaries,
            weights,
        })
    }

    /// The qubit Pauli twirl: {I, X, Y, Z} with weights 1/4.
    pub fn pauli_qubit() -> Self {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let mats = [
            vec![one, z, z, one],
            vec![z, one, one, z],
            vec![z, -i, i, z],
            vec![one, z, z, -one],
        ];
        let unitaries = mats
            .into_iter()
            .map(|m| Unitary::new(ComplexMatrix::from_row_major(2, 2, m).unwrap()).unwrap())
            .collect();
        Self {
            d_a: 2,
            unitaries,
            weights: vec![0.25; 4],
        }
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_e(&self) -> usize {
        self.unitaries.len()
    }

    pub fn unitaries(&self) -> &[Unitary] {
        &self.unitaries
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Forward action Σ_i ω_i U_i ρ U_i†.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.d_a {
            return Err(Error::Shape(format!(
                "channel acts on dimension {}, input has {}",
                self.d_a,
                rho.dim()
            )));
        }
        let mut out = DMatrix::<C64>::zeros(self.d_a, self.d_a);
        for (u, w) in self.unitaries.iter().zip(&self.weights) {
            let m = u.as_dmatrix();
            out += (m * rho.as_dmatrix() * m.adjoint()).scale(*w);
        }
        DensityMatrix::from_dmatrix(out)
    }

    /// Forward action on a pure input, Σ_i ω_i |U_i φ⟩⟨U_i φ|, computed as
    /// T T† for the d_A × d_E matrix T with columns √ω_i U_i|φ⟩.
    pub fn apply_to_pure(&self, phi: &PureState) -> Result<DensityMatrix> {
        let t = self.weighted_images(phi)?;
        DensityMatrix::from_dmatrix(&t * t.adjoint())
    }

    /// Columns √ω_i U_i|φ⟩; both channel outputs are Gram matrices of these.
    fn weighted_images(&self, phi: &PureState) -> Result<DMatrix<C64>> {
        if phi.dim() != self.d_a {
            return Err(Error::Shape(format!(
                "channel acts on dimension {}, input has {}",
                self.d_a,
                phi.dim()
            )));
        }
        let d_e = self.d_e();
        let mut t = DMatrix::<C64>::zeros(self.d_a, d_e);
        for (i, (u, w)) in self.unitaries.iter().zip(&self.weights).enumerate() {
            let v = u.as_dmatrix() * phi.as_dvector();
            let scale = C64::new(w.sqrt(), 0.0);
            for row in 0..self.d_a {
                t[(row, i)] = v[row] * scale;
            }
        }
        Ok(t)
    }

    /// Stinespring isometry V|φ⟩ = Σ_i √ω_i (U_i|φ⟩) ⊗ |i⟩_E, B-major rows.
    pub fn stinespring_isometry(&self) -> StinespringIsometry {
        let d_e = self.d_e();
        let rows = self.d_a * d_e;
        let mut v = DMatrix::<C64>::zeros(rows, self.d_a);
        for (i, (u, w)) in self.unitaries.iter().zip(&self.weights).enumerate() {
            let scale = C64::new(w.sqrt(), 0.0);
            let m = u.as_dmatrix();
            for b in 0..self.d_a {
                for a in 0..self.d_a {
                    v[(b * d_e + i, a)] = m[(b, a)] * scale;
                }
            }
        }
        StinespringIsometry { matrix: v }
    }

    /// Conjugate-channel output on a pure input, the d_E × d_E Gram matrix
    /// (N^C)_{ij} = √(ω_i ω_j) ⟨φ|U_j† U_i|φ⟩ = (T†T)ᵀ.
    pub fn apply_conjugate(&self, phi: &PureState) -> Result<DensityMatrix> {
        let t = self.weighted_images(phi)?;
        DensityMatrix::from_dmatrix((t.adjoint() * &t).transpose())
    }
}

/// Constructs the uniform-weight channel from d_E Haar unitaries drawn off
/// derived streams 0..d_E.
pub fn sample_uniform_ruc(
    d_a: usize,
    d_e: usize,
    stream: &SeededStream,
) -> Result<RandomUnitaryChannel> {
    if d_a == 0 || d_e == 0 {
        return Err(Error::Domain("channel dimensions must be positive".into()));
    }
    let unitaries: Result<Vec<Unitary>> = (0..d_e as u64)
        .map(|i| haar_unitary(d_a, &derive_stream(stream, i)))
        .collect();
    Ok(RandomUnitaryChannel {
        d_a,
        unitaries: unitaries?,
        weights: vec![1.0 / d_e as f64; d_e],
    })
}

/// Unitary embedding V : C^{d_A} → C^{d_A·d_E} with V†V = I.
#[derive(Debug, Clone)]
pub struct StinespringIsometry {
    matrix: DMatrix<C64>,
}

impl StinespringIsometry {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_dmatrix(self.matrix.clone())
    }

    /// V|φ⟩, the dilated pure state on C^{d_B d_E}.
    pub fn dilate(&self, phi: &PureState) -> Result<PureState> {
        if phi.dim() != self.cols() {
            return Err(Error::Shape(format!(
                "isometry maps dimension {}, input has {}",
                self.cols(),
                phi.dim()
            )));
        }
        Ok(PureState::from_dvector(&self.matrix * phi.as_dvector()))
    }

    /// VρV† on the dilated space.
    pub fn conjugate_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.cols() {
            return Err(Error::Shape(format!(
                "isometry maps dimension {}, input has {}",
                self.cols(),
                rho.dim()
            )));
        }
        let m = &self.matrix * rho.as_dmatrix() * self.matrix.adjoint();
        DensityMatrix::from_dmatrix(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        operator_norm, partial_trace, von_neumann_entropy, BipartiteShape, Keep,
    };
    use crate::randgen::random_pure_state;

    #[test]
    fn uniform_ruc_shape_and_determinism() {
        let s = SeededStream::new(21);
        let ch = sample_uniform_ruc(3, 5, &s).unwrap();
        assert_eq!(ch.d_e(), 5);
        assert!(ch.weights().iter().all(|w| (w - 0.2).abs() < 1e-15));
        let ch2 = sample_uniform_ruc(3, 5, &s).unwrap();
        for (a, b) in ch.unitaries().iter().zip(ch2.unitaries()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn single_unitary_channel_conjugates() {
        let s = SeededStream::new(4);
        let ch = sample_uniform_ruc(4, 1, &s).unwrap();
        let phi = random_pure_state(4, &derive_stream(&s, 9)).unwrap();
        let out = ch.apply(&phi.to_density()).unwrap();
        let u = ch.unitaries()[0].as_dmatrix();
        let direct = u * phi.to_density().as_dmatrix() * u.adjoint();
        let direct = DensityMatrix::from_dmatrix(direct).unwrap();
        assert!(out.max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn pauli_twirl_sends_everything_to_maximally_mixed() {
        let ch = RandomUnitaryChannel::pauli_qubit();
        for trial in 0..5u64 {
            let phi = random_pure_state(2, &SeededStream::with_index(8, trial)).unwrap();
            let out = ch.apply_to_pure(&phi).unwrap();
            assert!(out.max_abs_diff(&DensityMatrix::maximally_mixed(2).unwrap()) < 1e-14);
        }
    }

    #[test]
    fn pure_and_density_application_agree() {
        let s = SeededStream::new(33);
        let ch = sample_uniform_ruc(3, 6, &s).unwrap();
        let phi = random_pure_state(3, &derive_stream(&s, 100)).unwrap();
        let a = ch.apply_to_pure(&phi).unwrap();
        let b = ch.apply(&phi.to_density()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
    }

    #[test]
    fn stinespring_matches_forward_channel() {
        let s = SeededStream::new(55);
        let ch = sample_uniform_ruc(3, 4, &s).unwrap();
        let v = ch.stinespring_isometry();
        let gram = v.matrix().adjoint().mul(&v.matrix()).unwrap();
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-10);

        let phi = random_pure_state(3, &derive_stream(&s, 2)).unwrap();
        let dilated = v.conjugate_density(&phi.to_density()).unwrap();
        let shape = BipartiteShape::new(3, 4).unwrap();
        let via_dilation = partial_trace(&dilated, shape, Keep::B).unwrap();
        let direct = ch.apply_to_pure(&phi).unwrap();
        assert!(via_dilation.max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn stinespring_single_term_is_the_unitary() {
        let s = SeededStream::new(9);
        let ch = sample_uniform_ruc(3, 1, &s).unwrap();
        let v = ch.stinespring_isometry();
        assert!(v.matrix().max_abs_diff(&ch.unitaries()[0].matrix()) < 1e-15);
    }

    #[test]
    fn conjugate_diagonal_is_the_weights() {
        let s = SeededStream::new(12);
        let ch = sample_uniform_ruc(4, 6, &s).unwrap();
        let phi = random_pure_state(4, &derive_stream(&s, 3)).unwrap();
        let conj = ch.apply_conjugate(&phi).unwrap();
        for i in 0..6 {
            assert!((conj.get(i, i) - C64::new(1.0 / 6.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugate_single_term_is_scalar_one() {
        let s = SeededStream::new(13);
        let ch = sample_uniform_ruc(4, 1, &s).unwrap();
        let phi = random_pure_state(4, &derive_stream(&s, 3)).unwrap();
        let conj = ch.apply_conjugate(&phi).unwrap();
        assert_eq!(conj.dim(), 1);
        assert!((conj.get(0, 0) - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn conjugate_matches_environment_trace() {
        let s = SeededStream::new(71);
        for (d_a, d_e) in [(2usize, 3usize), (3, 2), (4, 4)] {
            let ch = sample_uniform_ruc(d_a, d_e, &derive_stream(&s, (d_a * 10 + d_e) as u64)).unwrap();
            let phi = random_pure_state(d_a, &derive_stream(&s, 1000)).unwrap();
            let v = ch.stinespring_isometry();
            let dilated = v.conjugate_density(&phi.to_density()).unwrap();
            let shape = BipartiteShape::new(d_a, d_e).unwrap();
            let via_trace = partial_trace(&dilated, shape, Keep::E).unwrap();
            let direct = ch.apply_conjugate(&phi).unwrap();
            assert!(via_trace.max_abs_diff(&direct) < 1e-12);
        }
    }

    #[test]
    fn dilated_state_marginals_share_entropy() {
        let s = SeededStream::new(88);
        let ch = sample_uniform_ruc(4, 3, &s).unwrap();
        let phi = random_pure_state(4, &derive_stream(&s, 5)).unwrap();
        let dilated = ch
            .stinespring_isometry()
            .conjugate_density(&phi.to_density())
            .unwrap();
        let shape = BipartiteShape::new(4, 3).unwrap();
        let s_b = von_neumann_entropy(&partial_trace(&dilated, shape, Keep::B).unwrap()).unwrap();
        let s_e = von_neumann_entropy(&partial_trace(&dilated, shape, Keep::E).unwrap()).unwrap();
        assert!((s_b - s_e).abs() < 1e-8);
    }

    #[test]
    fn channel_is_affine_and_unital() {
        let s = SeededStream::new(14);
        let ch = sample_uniform_ruc(3, 4, &s).unwrap();
        let phi = random_pure_state(3, &derive_stream(&s, 0)).unwrap();
        let psi = random_pure_state(3, &derive_stream(&s, 1)).unwrap();
        let lambda = 0.3;
        let mixed = DMatrix::from_fn(3, 3, |i, j| {
            phi.to_density().get(i, j) * C64::new(lambda, 0.0)
                + psi.to_density().get(i, j) * C64::new(1.0 - lambda, 0.0)
        });
        let mixed = DensityMatrix::from_dmatrix(mixed).unwrap();
        let lhs = ch.apply(&mixed).unwrap();
        let a = ch.apply_to_pure(&phi).unwrap();
        let b = ch.apply_to_pure(&psi).unwrap();
        let rhs = DMatrix::from_fn(3, 3, |i, j| {
            a.get(i, j) * C64::new(lambda, 0.0) + b.get(i, j) * C64::new(1.0 - lambda, 0.0)
        });
        let rhs = DensityMatrix::from_dmatrix(rhs).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-10);

        let id = DensityMatrix::maximally_mixed(3).unwrap();
        assert!(ch.apply(&id).unwrap().max_abs_diff(&id) < 1e-10);
    }

    #[test]
    fn trace_preserved_within_tolerance() {
        let s = SeededStream::new(15);
        let ch = sample_uniform_ruc(5, 7, &s).unwrap();
        let phi = random_pure_state(5, &derive_stream(&s, 2)).unwrap();
        let out = ch.apply_to_pure(&phi).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-10);
        assert!(out.trace().im.abs() < 1e-10);
        assert!(out.validate_psd().is_ok());
    }

    #[test]
    fn channel_constructor_validations() {
        let u = haar_unitary(2, &SeededStream::new(1)).unwrap();
        assert!(RandomUnitaryChannel::new(vec![u.clone()], vec![0.5]).is_err());
        assert!(RandomUnitaryChannel::new(vec![u.clone(), u.clone()], vec![0.5]).is_err());
        assert!(RandomUnitaryChannel::new(vec![], vec![]).is_err());
        assert!(RandomUnitaryChannel::new(vec![u], vec![1.0]).is_ok());
    }

    #[test]
    fn shape_errors_on_mismatched_input() {
        let ch = RandomUnitaryChannel::pauli_qubit();
        let phi = random_pure_state(3, &SeededStream::new(2)).unwrap();
        assert!(ch.apply_to_pure(&phi).is_err());
        assert!(ch.apply_conjugate(&phi).is_err());
        assert!(matches!(
            operator_norm(&ComplexMatrix::zeros(2, 3)),
            Err(Error::Shape(_))
        ));
    }
}
