//! Completely positive trace-preserving maps in Kraus form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, partial_transpose, tensor, tensor_all, CMatrix, TensorShape, C64};
use crate::random::{self, Rng};
use crate::states::{matrix_from_pairs, matrix_to_pairs, max_entangled, DensityMatrix};

/// Trace-preservation tolerance on `||Σ K^dag K - I||_F`.
pub const TOL_TP: f64 = 1e-9;

/// Minimal partial-transpose eigenvalue accepted as PPT.
pub const TOL_PPT: f64 = crate::linalg::TOL_PSD;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kraus: Vec<CMatrix>,
    d_in: usize,
    d_out: usize,
}

impl KrausChannel {
    /// Builds a channel, checking shapes and trace preservation.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let ch = Self::unchecked(kraus)?;
        let residual = ch.tp_residual();
        if residual > TOL_TP {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving (residual {residual:e})"
            )));
        }
        Ok(ch)
    }

    /// Builds a Kraus list with consistent shapes but no trace-preservation
    /// check. Use [`validate_cptp`] to inspect it.
    pub fn unchecked(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (d_out, d_in) = (first.rows(), first.cols());
        if kraus.iter().any(|k| k.rows() != d_out || k.cols() != d_in) {
            return Err(Error::InvalidChannel(
                "Kraus operators differ in shape".into(),
            ));
        }
        Ok(Self { kraus, d_in, d_out })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            kraus: vec![CMatrix::identity(d)],
            d_in: d,
            d_out: d,
        }
    }

    /// Conjugation by `u`; fails unless `u` is unitary.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::InvalidChannel("unitary must be square".into()));
        }
        Self::new(vec![u])
    }

    /// Qubit depolarizing channel `ρ ↦ p ρ + (1 - p) I/2` via the Pauli twirl.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!(
                "depolarizing parameter {p} outside [0, 1]"
            )));
        }
        let w0 = ((1.0 + 3.0 * p) / 4.0).sqrt();
        let w = ((1.0 - p) / 4.0).sqrt();
        Ok(Self {
            kraus: vec![
                CMatrix::identity(2).scale_re(w0),
                CMatrix::pauli_x().scale_re(w),
                CMatrix::pauli_y().scale_re(w),
                CMatrix::pauli_z().scale_re(w),
            ],
            d_in: 2,
            d_out: 2,
        })
    }

    /// `X ↦ Tr(X) I/d`.
    pub fn completely_depolarizing(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let kraus = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| {
                let mut e = CMatrix::zeros(d, d);
                e[(i, j)] = C64::new(s, 0.0);
                e
            })
            .collect();
        Self {
            kraus,
            d_in: d,
            d_out: d,
        }
    }

    /// Two-qubit channel on `A A'`: reads `A` in the computational basis,
    /// leaves `A'` alone on outcome 0 and replaces it by `I/2` on outcome 1.
    pub fn selective_check() -> Self {
        let p0 = CMatrix::basis_projector(2, 0);
        let p1 = CMatrix::basis_projector(2, 1);
        let mut kraus = vec![tensor(&p0, &CMatrix::identity(2))];
        for k in Self::completely_depolarizing(2).kraus {
            kraus.push(tensor(&p1, &k));
        }
        Self {
            kraus,
            d_in: 4,
            d_out: 4,
        }
    }

    /// Haar-random channel with `n_kraus` operators from a random isometry.
    pub fn random(d: usize, n_kraus: usize, rng: &mut Rng) -> Self {
        let stacked = random::ginibre(n_kraus * d, d, rng);
        let iso = random::orthonormalize_columns(&stacked);
        let kraus = (0..n_kraus)
            .map(|k| CMatrix::from_fn(d, d, |r, c| iso[(k * d + r, c)]))
            .collect();
        Self {
            kraus,
            d_in: d,
            d_out: d,
        }
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn tp_residual(&self) -> f64 {
        let mut acc = CMatrix::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            acc = &acc + &k.adjoint().matmul(k);
        }
        acc.distance(&CMatrix::identity(self.d_in))
    }

    /// `Σ K X K^dag` on a raw matrix.
    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.rows() != self.d_in || x.cols() != self.d_in {
            return Err(Error::Dimension(format!(
                "channel input dimension {} does not match {}x{} operand",
                self.d_in,
                x.rows(),
                x.cols()
            )));
        }
        let mut acc = CMatrix::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            acc = &acc + &x.conjugate_by(k);
        }
        Ok(acc)
    }

    /// Applies the channel and validates the output state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_matrix(rho.matrix())?;
        let shape = if self.d_out == self.d_in {
            rho.shape().clone()
        } else {
            TensorShape::new(vec![self.d_out])?
        };
        DensityMatrix::new(out, shape)
    }

    /// `ch2 ∘ self`.
    pub fn then(&self, next: &KrausChannel) -> Result<Self> {
        if self.d_out != next.d_in {
            return Err(Error::Dimension(
                "cannot compose channels of mismatched dimension".into(),
            ));
        }
        let kraus = next
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b.matmul(a)))
            .collect();
        Ok(Self {
            kraus,
            d_in: self.d_in,
            d_out: next.d_out,
        })
    }

    pub fn to_json(&self) -> ChannelJson {
        ChannelJson {
            d_in: self.d_in,
            d_out: self.d_out,
            kraus: self.kraus.iter().map(matrix_to_pairs).collect(),
        }
    }

    pub fn from_json(json: &ChannelJson) -> Result<Self> {
        let kraus = json
            .kraus
            .iter()
            .map(|m| matrix_from_pairs(json.d_out, json.d_in, m))
            .collect::<Result<Vec<_>>>()?;
        let ch = Self::new(kraus)?;
        if ch.d_in != json.d_in || ch.d_out != json.d_out {
            return Err(Error::InvalidChannel(
                "declared dimensions do not match Kraus shapes".into(),
            ));
        }
        Ok(ch)
    }
}

/// JSON form: `{ "d_in": n, "d_out": m, "kraus": [ matrix, ... ] }`, each
/// matrix a row-major list of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<Vec<[f64; 2]>>,
}

/// Extends `ch` to act on factor `target` of `shape`, identity elsewhere.
pub fn unilocal(ch: &KrausChannel, target: usize, shape: &TensorShape) -> Result<KrausChannel> {
    let dims = shape.dims();
    if target >= dims.len() {
        return Err(Error::Dimension(format!(
            "target factor {target} out of range"
        )));
    }
    if ch.d_in != dims[target] || ch.d_out != dims[target] {
        return Err(Error::Dimension(format!(
            "channel dimension {}->{} does not match factor dimension {}",
            ch.d_in, ch.d_out, dims[target]
        )));
    }
    let before = CMatrix::identity(dims[..target].iter().product());
    let after = CMatrix::identity(dims[target + 1..].iter().product());
    let kraus = ch
        .kraus
        .iter()
        .map(|k| tensor_all([&before, k, &after]))
        .collect();
    let d = shape.dim();
    Ok(KrausChannel {
        kraus,
        d_in: d,
        d_out: d,
    })
}

/// Choi state `(E ⊗ I)[P+]`, factors ordered `[output, reference]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub state: DensityMatrix,
    pub d_in: usize,
    pub d_out: usize,
}

fn raw_choi(ch: &KrausChannel) -> CMatrix {
    let omega = max_entangled(ch.d_in)
        .expect("channel dimension >= 1")
        .density();
    let mut acc = CMatrix::zeros(ch.d_out * ch.d_in, ch.d_out * ch.d_in);
    let id = CMatrix::identity(ch.d_in);
    for k in &ch.kraus {
        acc = &acc + &omega.matrix().conjugate_by(&tensor(k, &id));
    }
    acc
}

pub fn choi(ch: &KrausChannel) -> Result<ChoiMatrix> {
    let shape = TensorShape::new(vec![ch.d_out, ch.d_in])?;
    Ok(ChoiMatrix {
        state: DensityMatrix::new(raw_choi(ch), shape)?,
        d_in: ch.d_in,
        d_out: ch.d_out,
    })
}

/// Rebuilds a Kraus representation from a Choi state.
pub fn channel_from_choi(choi: &ChoiMatrix) -> Result<KrausChannel> {
    let eig = herm_eig(choi.state.matrix())?;
    let (d_in, d_out) = (choi.d_in, choi.d_out);
    let mut kraus = Vec::new();
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= 1e-14 {
            continue;
        }
        let w = (d_in as f64 * lam).sqrt();
        kraus.push(CMatrix::from_fn(d_out, d_in, |a, i| {
            eig.vectors[(a * d_in + i, k)] * w
        }));
    }
    KrausChannel::new(kraus)
}

/// Outcome of the entanglement-breaking test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EbVerdict {
    pub entanglement_breaking: bool,
    /// Smallest eigenvalue of the partially transposed Choi state.
    pub min_pt_eigenvalue: f64,
    /// True when PPT is equivalent to separability for the Choi state
    /// (total dimension at most 6); otherwise the verdict is PPT-necessary-only.
    pub exact: bool,
}

/// A channel breaks entanglement iff its Choi state is separable; decided by
/// the PPT test.
pub fn is_entanglement_breaking(ch: &KrausChannel) -> Result<EbVerdict> {
    let c = choi(ch)?;
    let pt = partial_transpose(c.state.matrix(), c.state.shape(), &[1])?;
    let min = *herm_eig(&pt)?.values.last().unwrap();
    Ok(EbVerdict {
        entanglement_breaking: min >= -TOL_PPT,
        min_pt_eigenvalue: min,
        exact: ch.d_in * ch.d_out <= 6,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    /// `||Σ K^dag K - I||_F`.
    pub tp_residual: f64,
    pub trace_preserving: bool,
    /// Smallest eigenvalue of the (unnormalized) Choi matrix.
    pub choi_min_eigenvalue: f64,
    pub completely_positive: bool,
}

impl CptpReport {
    pub fn passed(&self) -> bool {
        self.trace_preserving && self.completely_positive
    }
}

pub fn validate_cptp(ch: &KrausChannel) -> Result<CptpReport> {
    let tp_residual = ch.tp_residual();
    let raw = raw_choi(ch);
    let choi_min_eigenvalue = *herm_eig(&raw)?.values.last().unwrap();
    Ok(CptpReport {
        tp_residual,
        trace_preserving: tp_residual <= TOL_TP,
        choi_min_eigenvalue,
        completely_positive: choi_min_eigenvalue >= -TOL_PPT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{pplus, werner};

    fn any_qubit_state() -> DensityMatrix {
        let mut m = CMatrix::diag(&[0.7, 0.3]);
        m[(0, 1)] = C64::new(0.1, 0.2);
        m[(1, 0)] = C64::new(0.1, -0.2);
        DensityMatrix::new(m, TensorShape::qubits(1)).unwrap()
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let rho = any_qubit_state();
        let out = KrausChannel::identity(2).apply(&rho).unwrap();
        assert!(out.matrix().distance(rho.matrix()) < 1e-15);
    }

    #[test]
    fn depolarizing_fixed_point_and_contraction() {
        let mixed = DensityMatrix::maximally_mixed(TensorShape::qubits(1));
        for p in [0.0, 0.3, 1.0] {
            let out = KrausChannel::depolarizing(p)
                .unwrap()
                .apply(&mixed)
                .unwrap();
            assert!(out.matrix().distance(mixed.matrix()) < 1e-15);
        }
        let out = KrausChannel::depolarizing(0.0)
            .unwrap()
            .apply(&any_qubit_state())
            .unwrap();
        assert!(out.matrix().distance(mixed.matrix()) < 1e-15);
        let rho = any_qubit_state();
        let out = KrausChannel::depolarizing(1.0)
            .unwrap()
            .apply(&rho)
            .unwrap();
        assert!(out.matrix().distance(rho.matrix()) < 1e-15);
        assert!(KrausChannel::depolarizing(1.5).is_err());
    }

    #[test]
    fn depolarizing_action_formula() {
        let rho = any_qubit_state();
        let p = 0.37;
        let out = KrausChannel::depolarizing(p).unwrap().apply(&rho).unwrap();
        let want = &rho.matrix().scale_re(p) + &CMatrix::identity(2).scale_re((1.0 - p) / 2.0);
        assert!(out.matrix().distance(&want) < 1e-14);
    }

    #[test]
    fn unilocal_depolarizing_on_werner() {
        let shape = TensorShape::qubits(2);
        for (p, q) in [(0.5, 0.8), (0.2, 1.0), (0.9, 0.4)] {
            let ch = unilocal(&KrausChannel::depolarizing(p).unwrap(), 0, &shape).unwrap();
            let out = ch.apply(&werner(q).unwrap()).unwrap();
            assert!(out.matrix().distance(werner(p * q).unwrap().matrix()) < 1e-14);
        }
    }

    #[test]
    fn unilocal_identity_is_identity() {
        let shape = TensorShape::new(vec![2, 3]).unwrap();
        let ch = unilocal(&KrausChannel::identity(3), 1, &shape).unwrap();
        assert_eq!(ch.kraus()[0], CMatrix::identity(6));
        assert!(unilocal(&KrausChannel::identity(2), 1, &shape).is_err());
        assert!(unilocal(&KrausChannel::identity(2), 2, &shape).is_err());
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let ch = KrausChannel::depolarizing(0.5).unwrap();
        assert!(matches!(ch.apply(&pplus()), Err(Error::Dimension(_))));
    }

    #[test]
    fn selective_check_is_trace_preserving() {
        let ch = KrausChannel::selective_check();
        assert!(ch.tp_residual() < 1e-12);
        assert!(validate_cptp(&ch).unwrap().passed());
    }

    #[test]
    fn selective_check_action() {
        // |0><0| ⊗ X stays, |1><1| ⊗ X becomes Tr(X) |1><1| ⊗ I/2, coherences vanish
        let ch = KrausChannel::selective_check();
        let x = CMatrix::from_fn(4, 4, |r, c| {
            C64::new((r * 4 + c) as f64, (r as f64) - (c as f64))
        });
        let out = ch.apply_matrix(&x).unwrap();
        let tr_lower = x[(2, 2)] + x[(3, 3)];
        for r in 0..4 {
            for c in 0..4 {
                let want = match (r / 2, c / 2) {
                    (0, 0) => x[(r, c)],
                    (1, 1) if r == c => tr_lower * 0.5,
                    _ => C64::new(0.0, 0.0),
                };
                assert!((out[(r, c)] - want).norm() < 1e-13, "({r},{c})");
            }
        }
    }

    #[test]
    fn choi_examples() {
        let c = choi(&KrausChannel::identity(2)).unwrap();
        assert!(c.state.matrix().distance(pplus().matrix()) < 1e-15);
        for p in [0.0, 0.25, 0.6, 1.0] {
            let c = choi(&KrausChannel::depolarizing(p).unwrap()).unwrap();
            assert!(c.state.matrix().distance(werner(p).unwrap().matrix()) < 1e-14);
        }
        let c = choi(&KrausChannel::completely_depolarizing(2)).unwrap();
        assert!(
            c.state
                .matrix()
                .distance(&CMatrix::identity(4).scale_re(0.25))
                < 1e-15
        );
    }

    #[test]
    fn choi_reference_marginal_is_maximally_mixed() {
        let mut rng = random::rng_for(3, 0);
        let ch = KrausChannel::random(2, 3, &mut rng);
        let c = choi(&ch).unwrap();
        let reference = c.state.reduced(&[1]).unwrap();
        assert!(
            reference
                .matrix()
                .distance(&CMatrix::identity(2).scale_re(0.5))
                < 1e-9
        );
    }

    #[test]
    fn entanglement_breaking_examples() {
        let v = is_entanglement_breaking(&KrausChannel::depolarizing(0.2).unwrap()).unwrap();
        assert!(v.entanglement_breaking && v.exact);
        let v = is_entanglement_breaking(&KrausChannel::depolarizing(0.9).unwrap()).unwrap();
        assert!(!v.entanglement_breaking);
        // (1 - 3p)/4 is the smallest eigenvalue of the transposed Werner state
        assert!((v.min_pt_eigenvalue - (1.0 - 2.7) / 4.0).abs() < 1e-12);
        let h = CMatrix::from_vec(
            2,
            2,
            vec![
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(-1.0, 0.0),
            ],
        )
        .unwrap()
        .scale_re(0.5f64.sqrt());
        let v = is_entanglement_breaking(&KrausChannel::unitary(h).unwrap()).unwrap();
        assert!(!v.entanglement_breaking);
    }

    #[test]
    fn entanglement_breaking_above_qubits_is_flagged() {
        let v = is_entanglement_breaking(&KrausChannel::selective_check()).unwrap();
        assert!(!v.exact);
        assert!(!v.entanglement_breaking);
        let v = is_entanglement_breaking(&KrausChannel::completely_depolarizing(4)).unwrap();
        assert!(v.entanglement_breaking && !v.exact);
    }

    #[test]
    fn validate_cptp_detects_corruption() {
        let report = validate_cptp(&KrausChannel::depolarizing(0.5).unwrap()).unwrap();
        assert!(report.tp_residual < 1e-12 && report.passed());

        let ch = KrausChannel::depolarizing(0.5).unwrap();
        let mut kraus = ch.kraus().to_vec();
        kraus[0] = kraus[0].scale_re(1.01);
        let k0tk0 = kraus[0].adjoint().matmul(&kraus[0]).scale_re(1.0 / 1.0201);
        let bad = KrausChannel::unchecked(kraus.clone()).unwrap();
        let report = validate_cptp(&bad).unwrap();
        // residual = (1.01² - 1) ||K0^dag K0||_F
        assert!((report.tp_residual - 0.0201 * k0tk0.frobenius_norm()).abs() < 1e-12);
        assert!(!report.trace_preserving && !report.passed());
        assert!(KrausChannel::new(kraus).is_err());
    }

    #[test]
    fn channel_json_round_trip() {
        let ch = KrausChannel::depolarizing(0.3).unwrap();
        let back = KrausChannel::from_json(&ch.to_json()).unwrap();
        assert_eq!(back, ch);
        let mut bad = ch.to_json();
        bad.d_in = 3;
        assert!(KrausChannel::from_json(&bad).is_err());
    }

    #[test]
    fn compose_depolarizing() {
        let a = KrausChannel::depolarizing(0.5).unwrap();
        let b = KrausChannel::depolarizing(0.4).unwrap();
        let ab = a.then(&b).unwrap();
        let rho = any_qubit_state();
        let want = KrausChannel::depolarizing(0.2)
            .unwrap()
            .apply(&rho)
            .unwrap();
        assert!(ab.apply(&rho).unwrap().matrix().distance(want.matrix()) < 1e-14);
    }
}
