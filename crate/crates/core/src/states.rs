//! Density matrices, pure states, and the state families used throughout the
//! analyses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    herm_eig, partial_trace, permute_factors, tensor, tensor_all, CMatrix, TensorShape, C64,
    TOL_PSD,
};
use crate::random::{self, Rng};

/// Trace tolerance for density-matrix validation.
pub const TOL_TRACE: f64 = 1e-9;
/// Norm tolerance for pure states.
pub const TOL_NORM: f64 = 1e-10;

/// A validated density matrix over a declared tensor factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    shape: TensorShape,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(mat: CMatrix, shape: TensorShape) -> Result<Self> {
        shape.check_matrix(&mat)?;
        let residual = mat.hermiticity_residual();
        if residual > crate::linalg::TOL_HERM {
            return Err(Error::InvalidState(format!(
                "not Hermitian (relative residual {residual:e})"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let eig = herm_eig(&mat)?;
        let min = *eig.values.last().unwrap();
        if min < -TOL_PSD {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self {
            mat: mat.hermitian_part(),
            shape,
        })
    }

    /// Skips validation; for constructions that are valid by algebra.
    pub(crate) fn from_trusted(mat: CMatrix, shape: TensorShape) -> Self {
        debug_assert_eq!(mat.rows(), shape.dim());
        Self {
            mat: mat.hermitian_part(),
            shape,
        }
    }

    pub fn maximally_mixed(shape: TensorShape) -> Self {
        let d = shape.dim();
        Self::from_trusted(CMatrix::identity(d).scale_re(1.0 / d as f64), shape)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// Reinterprets the factorization, e.g. grouping `[2,2,2,2]` as `[4,4]`.
    pub fn with_shape(&self, shape: TensorShape) -> Result<Self> {
        shape.check_matrix(&self.mat)?;
        Ok(Self {
            mat: self.mat.clone(),
            shape,
        })
    }

    pub fn purity(&self) -> f64 {
        self.mat.matmul(&self.mat).trace().re
    }

    /// Reduced state on the listed factors.
    pub fn reduced(&self, keep: &[usize]) -> Result<Self> {
        let mat = partial_trace(&self.mat, &self.shape, keep)?;
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        let shape = TensorShape::new(kept.iter().map(|&k| self.shape.dims()[k]).collect())?;
        Ok(Self::from_trusted(mat, shape))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.shape.dims().to_vec();
        dims.extend_from_slice(other.shape.dims());
        Self::from_trusted(
            tensor(&self.mat, &other.mat),
            TensorShape::new(dims).expect("factor dims already validated"),
        )
    }

    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let (mat, shape) = permute_factors(&self.mat, &self.shape, perm)?;
        Ok(Self::from_trusted(mat, shape))
    }

    /// Convex combination `Σ w_k ρ_k`. Weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Domain("empty mixture".into()))?;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > TOL_TRACE {
            return Err(Error::Domain(
                "mixture weights must be a probability vector".into(),
            ));
        }
        let mut acc = CMatrix::zeros(first.1.dim(), first.1.dim());
        for (w, rho) in parts {
            if rho.shape != first.1.shape {
                return Err(Error::Dimension(
                    "mixture components differ in shape".into(),
                ));
            }
            acc = &acc + &rho.mat.scale_re(*w);
        }
        Ok(Self::from_trusted(acc, first.1.shape.clone()))
    }

    pub fn to_json(&self) -> StateJson {
        StateJson {
            dims: self.shape.dims().to_vec(),
            matrix: matrix_to_pairs(&self.mat),
        }
    }

    pub fn from_json(json: &StateJson) -> Result<Self> {
        let shape = TensorShape::new(json.dims.clone())?;
        let d = shape.dim();
        let mat = matrix_from_pairs(d, d, &json.matrix)?;
        Self::new(mat, shape)
    }
}

/// A unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vec: Vec<C64>,
    shape: TensorShape,
}

impl PureState {
    pub fn new(vec: Vec<C64>, shape: TensorShape) -> Result<Self> {
        if vec.len() != shape.dim() {
            return Err(Error::Dimension(format!(
                "vector of length {} does not match shape {:?}",
                vec.len(),
                shape.dims()
            )));
        }
        let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { vec, shape })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.vec
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    /// `|ψ><ψ|`.
    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(CMatrix::outer(&self.vec, &self.vec), self.shape.clone())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.shape.dims().to_vec();
        dims.extend_from_slice(other.shape.dims());
        Self {
            vec: crate::linalg::tensor_vec(&self.vec, &other.vec),
            shape: TensorShape::new(dims).expect("factor dims already validated"),
        }
    }

    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let (vec, shape) = crate::linalg::permute_vec_factors(&self.vec, &self.shape, perm)?;
        Ok(Self { vec, shape })
    }

    /// Applies a unitary (or any matrix) to the amplitude vector and renormalizes.
    pub fn transformed(&self, u: &CMatrix) -> Result<Self> {
        if u.cols() != self.vec.len() || u.rows() != self.vec.len() {
            return Err(Error::Dimension(
                "operator does not match state dimension".into(),
            ));
        }
        let v = u.mul_vec(&self.vec);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok(Self {
            vec: v.into_iter().map(|z| z / norm).collect(),
            shape: self.shape.clone(),
        })
    }
}

/// JSON interchange form: `{ "dims": [...], "matrix": [[re, im], ...] }`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub dims: Vec<usize>,
    pub matrix: Vec<[f64; 2]>,
}

pub fn matrix_to_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    m.as_slice().iter().map(|z| [z.re, z.im]).collect()
}

pub fn matrix_from_pairs(rows: usize, cols: usize, pairs: &[[f64; 2]]) -> Result<CMatrix> {
    CMatrix::from_vec(
        rows,
        cols,
        pairs.iter().map(|[re, im]| C64::new(*re, *im)).collect(),
    )
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `(1/√d) Σ_i |ii>` on `d ⊗ d`.
pub fn max_entangled(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::Domain(format!("dimension {d} < 2")));
    }
    let amp = real(1.0 / (d as f64).sqrt());
    let mut vec = vec![real(0.0); d * d];
    for i in 0..d {
        vec[i * d + i] = amp;
    }
    PureState::new(vec, TensorShape::new(vec![d, d])?)
}

/// Projector onto `|ψ+>` for two qubits.
pub fn pplus() -> DensityMatrix {
    max_entangled(2).expect("d = 2 is valid").density()
}

/// `q P+ + (1 - q) I/4`.
pub fn werner(q: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!(
            "Werner parameter {q} outside [0, 1]"
        )));
    }
    let mixed = CMatrix::identity(4).scale_re((1.0 - q) / 4.0);
    let mat = &pplus().into_matrix().scale_re(q) + &mixed;
    Ok(DensityMatrix::from_trusted(mat, TensorShape::qubits(2)))
}

/// `α|00> + β|11>` with `β = √(1 - α²)` real and non-negative.
pub fn schmidt_pure(alpha: f64) -> Result<PureState> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!(
            "Schmidt amplitude {alpha} outside [0, 1]"
        )));
    }
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    PureState::new(
        vec![real(alpha), real(0.0), real(0.0), real(beta)],
        TensorShape::qubits(2),
    )
}

/// `(|000> + |111>)/√2`.
pub fn ghz() -> PureState {
    let s = real(0.5f64.sqrt());
    let mut vec = vec![real(0.0); 8];
    vec[0] = s;
    vec[7] = s;
    PureState::new(vec, TensorShape::qubits(3)).expect("GHZ is normalized")
}

/// Reorders `[A, B, A', B']` into `[A, A', B, B']`.
const AB_PAIRS_TO_SIDES: [usize; 4] = [0, 2, 1, 3];

/// `|0><0|_A ⊗ |0><0|_B ⊗ P+_{A'B'}`, factors ordered `[A, A', B, B']`.
pub fn four_qubit_rho1() -> DensityMatrix {
    let p0 = CMatrix::basis_projector(2, 0);
    let mat = tensor_all([&p0, &p0, pplus().matrix()]);
    DensityMatrix::from_trusted(mat, TensorShape::qubits(4))
        .permute(&AB_PAIRS_TO_SIDES)
        .expect("valid permutation")
}

/// `P+_{AB} ⊗ P+_{A'B'}`, factors ordered `[A, A', B, B']`.
pub fn four_qubit_rho2() -> DensityMatrix {
    pplus()
        .tensor(&pplus())
        .permute(&AB_PAIRS_TO_SIDES)
        .expect("valid permutation")
}

/// Closed form of the checked state: `½ρ1 + ½|1><1|_A ⊗ |1><1|_B ⊗ I/4`, ordered `[A, A', B, B']`.
pub fn four_qubit_rho2_after_check() -> DensityMatrix {
    let p1 = CMatrix::basis_projector(2, 1);
    let quarter = CMatrix::identity(4).scale_re(0.25);
    let second =
        DensityMatrix::from_trusted(tensor_all([&p1, &p1, &quarter]), TensorShape::qubits(4))
            .permute(&AB_PAIRS_TO_SIDES)
            .expect("valid permutation");
    DensityMatrix::mixture(&[(0.5, &four_qubit_rho1()), (0.5, &second)]).expect("valid mixture")
}

pub fn random_pure_with(shape: &TensorShape, rng: &mut Rng) -> PureState {
    PureState {
        vec: random::haar_vector(shape.dim(), rng),
        shape: shape.clone(),
    }
}

/// Haar-random pure state, deterministic in `seed`.
pub fn random_pure(shape: &TensorShape, seed: u64) -> PureState {
    random_pure_with(shape, &mut random::rng_for(seed, 0))
}

/// Induced-measure mixed state: a Haar pure state on `dim ⊗ rank` with the
/// ancilla traced out.
pub fn random_density_with(
    shape: &TensorShape,
    rank: usize,
    rng: &mut Rng,
) -> Result<DensityMatrix> {
    let d = shape.dim();
    if rank == 0 || rank > d {
        return Err(Error::Domain(format!("rank {rank} outside [1, {d}]")));
    }
    let g = random::ginibre(d, rank, rng);
    let w = g.matmul(&g.adjoint());
    let tr = w.trace().re;
    Ok(DensityMatrix::from_trusted(
        w.scale_re(1.0 / tr),
        shape.clone(),
    ))
}

pub fn random_density(shape: &TensorShape, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(shape, rank, &mut random::rng_for(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_entangled_two_qubits() {
        let psi = max_entangled(2).unwrap();
        let s = 0.5f64.sqrt();
        let want = [s, 0.0, 0.0, s];
        for (a, b) in psi.amplitudes().iter().zip(want) {
            assert!((a - real(b)).norm() < 1e-15);
        }
    }

    #[test]
    fn max_entangled_reduced_states_are_maximally_mixed() {
        for d in [2, 3, 4] {
            let rho = max_entangled(d).unwrap().density();
            let id = CMatrix::identity(d).scale_re(1.0 / d as f64);
            assert!(rho.reduced(&[0]).unwrap().matrix().distance(&id) < 1e-14);
            assert!(rho.reduced(&[1]).unwrap().matrix().distance(&id) < 1e-14);
        }
        assert!(max_entangled(1).is_err());
    }

    #[test]
    fn werner_endpoints() {
        let w0 = werner(0.0).unwrap();
        assert!(w0.matrix().distance(&CMatrix::identity(4).scale_re(0.25)) < 1e-15);
        assert!(werner(1.0).unwrap().matrix().distance(pplus().matrix()) < 1e-15);
        assert!(werner(1.2).is_err());
        assert!(werner(-0.1).is_err());
    }

    #[test]
    fn werner_fidelity_with_pplus() {
        let psi = max_entangled(2).unwrap();
        for q in [0.0, 0.2, 0.5, 0.9] {
            let w = werner(q).unwrap();
            let v = w.matrix().mul_vec(psi.amplitudes());
            let f: C64 = psi
                .amplitudes()
                .iter()
                .zip(&v)
                .map(|(a, b)| a.conj() * b)
                .sum();
            assert!((f.re - (q + (1.0 - q) / 4.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn schmidt_pure_reduced_state() {
        for alpha in [0.0, 0.3, 0.8, 1.0] {
            let rho = schmidt_pure(alpha)
                .unwrap()
                .density()
                .reduced(&[0])
                .unwrap();
            let want = CMatrix::diag(&[alpha * alpha, 1.0 - alpha * alpha]);
            assert!(rho.matrix().distance(&want) < 1e-12);
        }
        assert!(schmidt_pure(1.01).is_err());
    }

    #[test]
    fn ghz_reductions() {
        let rho = ghz().density();
        let ab = rho.reduced(&[0, 1]).unwrap();
        assert!(ab.matrix().distance(&CMatrix::diag(&[0.5, 0.0, 0.0, 0.5])) < 1e-15);
        let a = rho.reduced(&[0]).unwrap();
        assert!(a.matrix().distance(&CMatrix::diag(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn four_qubit_states() {
        let r1 = four_qubit_rho1();
        let r2 = four_qubit_rho2();
        assert!((r1.matrix().trace().re - 1.0).abs() < 1e-14);
        assert!((r2.matrix().trace().re - 1.0).abs() < 1e-14);
        let side = r2.reduced(&[0, 1]).unwrap();
        assert!(side.matrix().distance(&CMatrix::identity(4).scale_re(0.25)) < 1e-14);
        // validation passes for all three
        DensityMatrix::new(r1.matrix().clone(), r1.shape().clone()).unwrap();
        DensityMatrix::new(r2.matrix().clone(), r2.shape().clone()).unwrap();
        let m = four_qubit_rho2_after_check();
        DensityMatrix::new(m.matrix().clone(), m.shape().clone()).unwrap();
    }

    #[test]
    fn four_qubit_rho1_has_product_ab_part() {
        // tracing A'B' (factors 1, 3) leaves |00><00| on AB
        let ab = four_qubit_rho1().reduced(&[0, 2]).unwrap();
        assert!(ab.matrix().distance(&CMatrix::basis_projector(4, 0)) < 1e-15);
        let apbp = four_qubit_rho1().reduced(&[1, 3]).unwrap();
        assert!(apbp.matrix().distance(pplus().matrix()) < 1e-15);
    }

    #[test]
    fn random_states_are_deterministic_and_valid() {
        let shape = TensorShape::qubits(2);
        assert_eq!(random_pure(&shape, 5), random_pure(&shape, 5));
        assert_ne!(random_pure(&shape, 5), random_pure(&shape, 6));
        for rank in 1..=4 {
            let a = random_density(&shape, rank, 11).unwrap();
            let b = random_density(&shape, rank, 11).unwrap();
            assert_eq!(a, b);
            DensityMatrix::new(a.matrix().clone(), shape.clone()).unwrap();
        }
        assert!(random_density(&shape, 0, 1).is_err());
        assert!(random_density(&shape, 5, 1).is_err());
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let shape = TensorShape::qubits(1);
        assert!(DensityMatrix::new(CMatrix::diag(&[0.7, 0.7]), shape.clone()).is_err());
        assert!(DensityMatrix::new(CMatrix::diag(&[1.5, -0.5]), shape.clone()).is_err());
        let mut m = CMatrix::diag(&[0.5, 0.5]);
        m[(0, 1)] = real(0.2);
        assert!(DensityMatrix::new(m, shape.clone()).is_err());
        assert!(DensityMatrix::new(CMatrix::identity(4).scale_re(0.25), shape).is_err());
    }

    #[test]
    fn json_round_trip() {
        let w = werner(0.4).unwrap();
        let back = DensityMatrix::from_json(&w.to_json()).unwrap();
        assert!(back.matrix().distance(w.matrix()) < 1e-15);
        let text = serde_json::to_string(&w.to_json()).unwrap();
        assert!(text.starts_with("{\"dims\":[2,2],\"matrix\":[["));
    }
}
