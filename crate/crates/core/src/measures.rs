//! Entropies and entanglement measures.
//!
//! All logarithms are base 2, so entanglement of formation and pure-state
//! entanglement are in ebits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channels::TOL_PPT;
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, partial_transpose, tensor, CMatrix, TensorShape, C64};
use crate::random::{self, Rng};
use crate::states::{ghz, DensityMatrix, PureState};

/// Eigenvalues of ρ at or below this are treated as round-off when forming
/// √ρ for the concurrence.
const CONCURRENCE_RANK_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Concurrence,
    Tangle,
    Eof,
    Negativity,
    Delta,
    PureEntropy,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 6] = [
        MeasureKind::Concurrence,
        MeasureKind::Tangle,
        MeasureKind::Eof,
        MeasureKind::Negativity,
        MeasureKind::Delta,
        MeasureKind::PureEntropy,
    ];

    /// Measures defined for every two-qubit mixed state.
    pub const TWO_QUBIT: [MeasureKind; 5] = [
        MeasureKind::Concurrence,
        MeasureKind::Tangle,
        MeasureKind::Eof,
        MeasureKind::Negativity,
        MeasureKind::Delta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Concurrence => "concurrence",
            MeasureKind::Tangle => "tangle",
            MeasureKind::Eof => "eof",
            MeasureKind::Negativity => "negativity",
            MeasureKind::Delta => "delta",
            MeasureKind::PureEntropy => "pure_entropy",
        }
    }

    /// Whether the measure is restricted to `2 ⊗ 2`.
    pub fn two_qubit_only(self) -> bool {
        matches!(
            self,
            MeasureKind::Concurrence | MeasureKind::Tangle | MeasureKind::Eof
        )
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown measure '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub kind: MeasureKind,
    pub value: f64,
}

/// A bipartition of the tensor factors: `side_a` against the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    side_a: Vec<usize>,
}

impl Cut {
    pub fn new(side_a: Vec<usize>) -> Self {
        let mut side_a = side_a;
        side_a.sort_unstable();
        side_a.dedup();
        Self { side_a }
    }

    /// First factor against the second.
    pub fn first() -> Self {
        Self::new(vec![0])
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    /// Factors on side B, validated against the shape.
    pub fn side_b(&self, shape: &TensorShape) -> Result<Vec<usize>> {
        let n = shape.len();
        if self.side_a.is_empty() || self.side_a.iter().any(|&k| k >= n) || self.side_a.len() >= n {
            return Err(Error::Dimension(format!(
                "cut {:?} is not a bipartition of {n} factors",
                self.side_a
            )));
        }
        Ok((0..n).filter(|k| !self.side_a.contains(k)).collect())
    }

    fn side_dims(&self, shape: &TensorShape) -> Result<(usize, usize)> {
        let b = self.side_b(shape)?;
        let da = self.side_a.iter().map(|&k| shape.dims()[k]).product();
        let db = b.iter().map(|&k| shape.dims()[k]).product();
        Ok((da, db))
    }
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `h(x) = -x log2 x - (1 - x) log2 (1 - x)`.
pub fn binary_entropy(x: f64) -> f64 {
    -xlog2x(x) - xlog2x(1.0 - x)
}

/// `-Tr ρ log2 ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let eig = herm_eig(rho.matrix()).expect("density matrices are Hermitian");
    eig.values.iter().map(|&l| -xlog2x(l)).sum::<f64>().max(0.0)
}

/// `2 (1 - Tr ρ²)`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    2.0 * (1.0 - rho.purity())
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.shape().dims() != [2, 2] {
        return Err(Error::Dimension(format!(
            "two-qubit measure applied to shape {:?}",
            rho.shape().dims()
        )));
    }
    Ok(())
}

fn spin_flip() -> CMatrix {
    tensor(&CMatrix::pauli_y(), &CMatrix::pauli_y())
}

/// Square roots of the eigenvalues of `ρ (σy⊗σy) ρ* (σy⊗σy)`, descending.
///
/// They are the singular values of `X = √ρ (σy⊗σy) √ρ*`, read off from the
/// spectrum of the Hermitian dilation `[[0, X], [X^dag, 0]]`.
pub fn wootters_roots(rho: &DensityMatrix) -> Result<[f64; 4]> {
    check_two_qubit(rho)?;
    let eig = herm_eig(rho.matrix())?;
    let sqrt_rho = eig.reconstruct_with(|l| {
        if l > CONCURRENCE_RANK_FLOOR {
            l.sqrt()
        } else {
            0.0
        }
    });
    let x = sqrt_rho.matmul(&spin_flip()).matmul(&sqrt_rho.conj());
    let dilation = CMatrix::from_fn(8, 8, |r, c| match (r < 4, c < 4) {
        (true, false) => x[(r, c - 4)],
        (false, true) => x[(c, r - 4)].conj(),
        _ => C64::new(0.0, 0.0),
    });
    let values = herm_eig(&dilation)?.values;
    Ok([
        values[0].max(0.0),
        values[1].max(0.0),
        values[2].max(0.0),
        values[3].max(0.0),
    ])
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let s = wootters_roots(rho)?;
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}

pub fn tangle(rho: &DensityMatrix) -> Result<f64> {
    Ok(concurrence(rho)?.powi(2))
}

/// `E_f = h(½[1 + √(1 - C²)])`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let tau = (c * c).min(1.0);
    binary_entropy(0.5 * (1.0 + (1.0 - tau).sqrt()))
}

pub fn eof(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

fn partial_transpose_spectrum(rho: &DensityMatrix, cut: &Cut) -> Result<Vec<f64>> {
    let side_b = cut.side_b(rho.shape())?;
    let pt = partial_transpose(rho.matrix(), rho.shape(), &side_b)?;
    Ok(herm_eig(&pt)?.values)
}

/// Smallest eigenvalue of the partial transpose across `cut`.
pub fn min_pt_eigenvalue(rho: &DensityMatrix, cut: &Cut) -> Result<f64> {
    Ok(*partial_transpose_spectrum(rho, cut)?.last().unwrap())
}

/// Twice the absolute sum of negative partial-transpose eigenvalues, so a
/// two-qubit maximally entangled state has negativity 1.
pub fn negativity(rho: &DensityMatrix, cut: &Cut) -> Result<f64> {
    let spectrum = partial_transpose_spectrum(rho, cut)?;
    Ok(2.0
        * spectrum
            .iter()
            .filter(|&&l| l < 0.0)
            .map(|l| -l)
            .sum::<f64>())
}

/// Entropy of entanglement of a pure state across `cut`, in ebits.
pub fn pure_entanglement(psi: &PureState, cut: &Cut) -> Result<f64> {
    cut.side_b(psi.shape())?;
    let reduced = psi.density().reduced(cut.side_a())?;
    Ok(von_neumann_entropy(&reduced))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaVerdict {
    /// 1 if entangled, 0 if judged separable.
    pub value: u8,
    /// False when the cut exceeds `2 ⊗ 3` and PPT is only necessary for separability.
    pub exact: bool,
}

/// The trivial entangled / not-entangled measure, decided by PPT.
pub fn delta_measure(rho: &DensityMatrix, cut: &Cut) -> Result<DeltaVerdict> {
    let (da, db) = cut.side_dims(rho.shape())?;
    let min = min_pt_eigenvalue(rho, cut)?;
    Ok(DeltaVerdict {
        value: u8::from(min < -TOL_PPT),
        exact: da * db <= 6,
    })
}

/// Evaluates any measure on a state. Two-qubit measures ignore `cut` but
/// require shape `[2, 2]`; `PureEntropy` requires a pure input.
pub fn measure(kind: MeasureKind, rho: &DensityMatrix, cut: &Cut) -> Result<MeasureValue> {
    let value = match kind {
        MeasureKind::Concurrence => concurrence(rho)?,
        MeasureKind::Tangle => tangle(rho)?,
        MeasureKind::Eof => eof(rho)?,
        MeasureKind::Negativity => negativity(rho, cut)?,
        MeasureKind::Delta => f64::from(delta_measure(rho, cut)?.value),
        MeasureKind::PureEntropy => {
            let purity = rho.purity();
            if purity < 1.0 - 1e-9 {
                return Err(Error::Domain(format!(
                    "pure-state entropy needs a pure input (purity {purity})"
                )));
            }
            cut.side_b(rho.shape())?;
            von_neumann_entropy(&rho.reduced(cut.side_a())?)
        }
    };
    Ok(MeasureValue { kind, value })
}

/// Result of sharing a GHZ state and letting C measure in the `|±>` basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhzAssistanceReport {
    pub concurrence_rho_ab: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub concurrence_omega_plus: f64,
    pub concurrence_omega_minus: f64,
    /// `Σ p_± C(ω_±)`.
    pub average_assisted: f64,
    /// `||p+ ω+ + p- ω- - ρ_AB||_F`.
    pub mixture_residual: f64,
    /// Distance of `ω_±` from `½(|00> ± |11>)(<00| ± <11|)`.
    pub omega_form_residual: f64,
}

impl GhzAssistanceReport {
    pub fn passed(&self) -> bool {
        self.concurrence_rho_ab.abs() < 1e-9
            && (self.concurrence_omega_plus - 1.0).abs() < 1e-9
            && (self.concurrence_omega_minus - 1.0).abs() < 1e-9
            && (self.average_assisted - 1.0).abs() < 1e-9
            && self.mixture_residual < 1e-12
            && self.omega_form_residual < 1e-12
    }
}

pub fn ghz_assistance_demo() -> Result<GhzAssistanceReport> {
    let omega_abc = ghz().density();
    let rho_ab = omega_abc.reduced(&[0, 1])?;
    let s = 0.5f64.sqrt();
    let ab = TensorShape::qubits(2);
    let mut outcomes = Vec::new();
    for sign in [1.0, -1.0] {
        let c_vec = [C64::new(s, 0.0), C64::new(sign * s, 0.0)];
        let proj = tensor(&CMatrix::identity(4), &CMatrix::outer(&c_vec, &c_vec));
        let post = omega_abc.matrix().conjugate_by(&proj);
        let p = post.trace().re;
        let post = DensityMatrix::new(post.scale_re(1.0 / p), TensorShape::qubits(3))?;
        let omega = post.reduced(&[0, 1])?;
        let expected_vec = [
            C64::new(s, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(sign * s, 0.0),
        ];
        let expected = CMatrix::outer(&expected_vec, &expected_vec);
        let form = omega.matrix().distance(&expected);
        outcomes.push((
            p,
            DensityMatrix::new(omega.into_matrix(), ab.clone())?,
            form,
        ));
    }
    let (p_plus, omega_plus, form_plus) = &outcomes[0];
    let (p_minus, omega_minus, form_minus) = &outcomes[1];
    let c_plus = concurrence(omega_plus)?;
    let c_minus = concurrence(omega_minus)?;
    let mix = DensityMatrix::mixture(&[(*p_plus, omega_plus), (*p_minus, omega_minus)])?;
    Ok(GhzAssistanceReport {
        concurrence_rho_ab: concurrence(&rho_ab)?,
        p_plus: *p_plus,
        p_minus: *p_minus,
        concurrence_omega_plus: c_plus,
        concurrence_omega_minus: c_minus,
        average_assisted: p_plus * c_plus + p_minus * c_minus,
        mixture_residual: mix.matrix().distance(rho_ab.matrix()),
        omega_form_residual: form_plus.max(*form_minus),
    })
}

/// Sampled lower bound on the concurrence of assistance of a two-qubit
/// state: purify ρ, measure the purifying system in random bases, keep the
/// best average concurrence. Never claimed to be the maximum.
pub fn assistance_lower_bound(rho: &DensityMatrix, samples: usize, seed: u64) -> Result<f64> {
    check_two_qubit(rho)?;
    let eig = herm_eig(rho.matrix())?;
    let kept: Vec<usize> = (0..4).filter(|&k| eig.values[k] > 1e-14).collect();
    let rank = kept.len();
    // sub-normalized ensemble vectors √λ_k |v_k>
    let ensemble: Vec<Vec<C64>> = kept
        .iter()
        .map(|&k| {
            eig.vectors
                .column(k)
                .into_iter()
                .map(|z| z * eig.values[k].sqrt())
                .collect()
        })
        .collect();
    let ab = TensorShape::qubits(2);
    let evaluate = |u: &CMatrix| -> Result<f64> {
        let mut total = 0.0;
        for j in 0..rank {
            let mut v = vec![C64::new(0.0, 0.0); 4];
            for (k, e) in ensemble.iter().enumerate() {
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi += u[(j, k)] * ei;
                }
            }
            let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if p <= 1e-15 {
                continue;
            }
            let unit: Vec<C64> = v.into_iter().map(|z| z / p.sqrt()).collect();
            let psi = PureState::new(unit, ab.clone())?;
            total += p * concurrence(&psi.density())?;
        }
        Ok(total)
    };
    let mut best = evaluate(&CMatrix::identity(rank))?;
    for i in 0..samples {
        let mut rng: Rng = random::rng_for(seed, i as u64);
        let u = random::haar_unitary(rank, &mut rng);
        best = best.max(evaluate(&u)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{max_entangled, pplus, random_density, schmidt_pure, werner};

    #[test]
    fn entropies() {
        let pure = schmidt_pure(0.6).unwrap().density();
        assert!(von_neumann_entropy(&pure).abs() < 1e-12);
        assert!(linear_entropy(&pure).abs() < 1e-12);
        let half = DensityMatrix::maximally_mixed(TensorShape::qubits(1));
        assert!((von_neumann_entropy(&half) - 1.0).abs() < 1e-14);
        assert!((linear_entropy(&half) - 1.0).abs() < 1e-14);
        let quarter = DensityMatrix::maximally_mixed(TensorShape::qubits(2));
        assert!((linear_entropy(&quarter) - 1.5).abs() < 1e-14);
        let d = DensityMatrix::new(CMatrix::diag(&[0.75, 0.25]), TensorShape::qubits(1)).unwrap();
        // h(1/4) = 2 - (3/4) log2 3
        let h = 2.0 - 0.75 * 3f64.log2();
        assert!((von_neumann_entropy(&d) - h).abs() < 1e-14);
        assert!((h - 0.811_278_124_459_132_8).abs() < 1e-15);
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence(&pplus()).unwrap() - 1.0).abs() < 1e-12);
        assert!(concurrence(&werner(1.0 / 3.0).unwrap()).unwrap() < 1e-12);
        assert!((concurrence(&werner(0.8).unwrap()).unwrap() - 0.7).abs() < 1e-12);
        let c = concurrence(&schmidt_pure(0.8).unwrap().density()).unwrap();
        assert!((c - 0.96).abs() < 1e-12);
        assert!(concurrence(&schmidt_pure(1.0).unwrap().density()).unwrap() < 1e-15);
    }

    #[test]
    fn concurrence_rejects_wrong_dimension() {
        let rho = max_entangled(3).unwrap().density();
        assert!(matches!(concurrence(&rho), Err(Error::Dimension(_))));
    }

    #[test]
    fn tangle_and_eof() {
        assert!((eof_from_concurrence(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(eof_from_concurrence(0.0), 0.0);
        // h(0.9) = -0.9 log2 0.9 - 0.1 log2 0.1
        let h09 = -0.9 * 0.9f64.log2() - 0.1 * 0.1f64.log2();
        assert!((eof_from_concurrence(0.6) - h09).abs() < 1e-15);
        assert!((h09 - 0.468_995_593_589_281).abs() < 1e-12);
        assert!((tangle(&werner(0.8).unwrap()).unwrap() - 0.49).abs() < 1e-12);
        assert!((eof(&pplus()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eof_is_monotone_in_concurrence() {
        let mut last = 0.0;
        for i in 1..=100 {
            let e = eof_from_concurrence(i as f64 / 100.0);
            assert!(e > last);
            last = e;
        }
    }

    #[test]
    fn negativity_examples() {
        let cut = Cut::first();
        let product = DensityMatrix::new(
            tensor(&CMatrix::diag(&[0.3, 0.7]), &CMatrix::diag(&[0.6, 0.4])),
            TensorShape::qubits(2),
        )
        .unwrap();
        assert!(negativity(&product, &cut).unwrap() < 1e-14);
        assert!((negativity(&pplus(), &cut).unwrap() - 1.0).abs() < 1e-12);
        for q in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.9] {
            let want = ((3.0 * q - 1.0) / 2.0f64).max(0.0);
            assert!((negativity(&werner(q).unwrap(), &cut).unwrap() - want).abs() < 1e-12);
        }
        assert!(negativity(&pplus(), &Cut::new(vec![0, 1])).is_err());
        assert!(negativity(&pplus(), &Cut::new(vec![2])).is_err());
    }

    #[test]
    fn pure_entanglement_examples() {
        for d in [2, 3, 4] {
            let e = pure_entanglement(&max_entangled(d).unwrap(), &Cut::first()).unwrap();
            assert!((e - (d as f64).log2()).abs() < 1e-12);
        }
        let e = pure_entanglement(&schmidt_pure(1.0).unwrap(), &Cut::first()).unwrap();
        assert!(e.abs() < 1e-14);
        let a = 0.3f64;
        let e = pure_entanglement(&schmidt_pure(a).unwrap(), &Cut::first()).unwrap();
        assert!((e - binary_entropy(a * a)).abs() < 1e-10);
    }

    #[test]
    fn pure_entanglement_is_additive_on_known_pair() {
        let psi = schmidt_pure(0.3).unwrap();
        let phi = max_entangled(2).unwrap();
        // [A, B, A', B'] -> [A, A', B, B']
        let joint = psi.tensor(&phi).permute(&[0, 2, 1, 3]).unwrap();
        let e = pure_entanglement(&joint, &Cut::new(vec![0, 1])).unwrap();
        assert!((e - binary_entropy(0.09) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn delta_examples() {
        let cut = Cut::first();
        assert_eq!(delta_measure(&werner(0.3).unwrap(), &cut).unwrap().value, 0);
        let v = delta_measure(&werner(0.5).unwrap(), &cut).unwrap();
        assert_eq!(v.value, 1);
        assert!(v.exact);
        let rho_ab = ghz().density().reduced(&[0, 1]).unwrap();
        assert_eq!(delta_measure(&rho_ab, &cut).unwrap().value, 0);
        let big = max_entangled(3).unwrap().density();
        assert!(!delta_measure(&big, &cut).unwrap().exact);
    }

    #[test]
    fn measure_dispatch() {
        let cut = Cut::first();
        let w = werner(0.8).unwrap();
        assert_eq!(
            measure(MeasureKind::Concurrence, &w, &cut).unwrap().kind,
            MeasureKind::Concurrence
        );
        assert!(measure(MeasureKind::PureEntropy, &w, &cut).is_err());
        let v = measure(MeasureKind::PureEntropy, &pplus(), &cut).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
        assert_eq!("eof".parse::<MeasureKind>().unwrap(), MeasureKind::Eof);
        assert!("squashed".parse::<MeasureKind>().is_err());
    }

    #[test]
    fn ghz_demo() {
        let r = ghz_assistance_demo().unwrap();
        assert!(r.concurrence_rho_ab.abs() < 1e-12);
        assert!((r.concurrence_omega_plus - 1.0).abs() < 1e-12);
        assert!((r.concurrence_omega_minus - 1.0).abs() < 1e-12);
        assert!((r.p_plus - 0.5).abs() < 1e-15 && (r.p_minus - 0.5).abs() < 1e-15);
        assert!(r.mixture_residual < 1e-12);
        assert!(r.passed());
    }

    #[test]
    fn assistance_bound_reaches_one_for_classical_mixture() {
        let rho_ab = ghz().density().reduced(&[0, 1]).unwrap();
        let rho_ab = DensityMatrix::new(rho_ab.into_matrix(), TensorShape::qubits(2)).unwrap();
        let bound = assistance_lower_bound(&rho_ab, 200, 1).unwrap();
        assert!(bound > 0.99 && bound <= 1.0 + 1e-12);
        // never below the concurrence itself for a random state
        let rho = random_density(&TensorShape::qubits(2), 2, 8).unwrap();
        assert!(assistance_lower_bound(&rho, 50, 2).unwrap() >= concurrence(&rho).unwrap() - 1e-9);
    }
}
