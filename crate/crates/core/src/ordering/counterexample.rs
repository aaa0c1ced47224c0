use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extend_to_pair;
use crate::channels::{unilocal, KrausChannel};
use crate::error::Result;
use crate::linalg::{tensor, TensorShape};
use crate::measures::{measure, negativity, Cut, MeasureKind};
use crate::random;
use crate::states::{
    four_qubit_rho1, four_qubit_rho2, four_qubit_rho2_after_check, max_entangled, PureState,
};

/// Outcome of the four-qubit example in which the selective channel on
/// `AA'` turns the maximally entangled input into the less entangled output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourQubitReport {
    /// `||ρ1' - ρ1||_F`.
    pub rho1_invariance: f64,
    /// `||ρ2' - (½ρ1 + ½|11><11| ⊗ I/4)||_F`.
    pub rho2_mixture_residual: f64,
    pub negativity_rho1_in: f64,
    pub negativity_rho2_in: f64,
    pub negativity_rho1_out: f64,
    pub negativity_rho2_out: f64,
    /// `N(ρ2') <= ½ N(ρ1') + 1e-9`.
    pub convexity_bound: bool,
    /// `N(ρ2) > N(ρ1)` but `N(ρ2') < N(ρ1')`.
    pub ordering_reversed: bool,
}

impl FourQubitReport {
    pub fn passed(&self) -> bool {
        self.rho1_invariance < 1e-10
            && self.rho2_mixture_residual < 1e-10
            && self.convexity_bound
            && self.ordering_reversed
    }
}

/// Factors are ordered `[A, A', B, B']`, so grouping them as `[4, 4]` puts the
/// channel on the first group and the entanglement cut between the groups.
pub fn four_qubit_counterexample() -> Result<FourQubitReport> {
    let grouped = TensorShape::new(vec![4, 4])?;
    let ch = unilocal(&KrausChannel::selective_check(), 0, &grouped)?;
    let rho1 = four_qubit_rho1();
    let rho2 = four_qubit_rho2();
    let out1 = ch
        .apply(&rho1.with_shape(grouped.clone())?)?
        .with_shape(TensorShape::qubits(4))?;
    let out2 = ch
        .apply(&rho2.with_shape(grouped)?)?
        .with_shape(TensorShape::qubits(4))?;

    let cut = Cut::new(vec![0, 1]);
    let n1_in = negativity(&rho1, &cut)?;
    let n2_in = negativity(&rho2, &cut)?;
    let n1_out = negativity(&out1, &cut)?;
    let n2_out = negativity(&out2, &cut)?;
    Ok(FourQubitReport {
        rho1_invariance: out1.matrix().distance(rho1.matrix()),
        rho2_mixture_residual: out2
            .matrix()
            .distance(four_qubit_rho2_after_check().matrix()),
        negativity_rho1_in: n1_in,
        negativity_rho2_in: n2_in,
        negativity_rho1_out: n1_out,
        negativity_rho2_out: n2_out,
        convexity_bound: n2_out <= 0.5 * n1_out + 1e-9,
        ordering_reversed: n2_in > n1_in && n2_out < n1_out,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpread {
    pub measure: MeasureKind,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxEntReport {
    pub trials: usize,
    pub measures: Vec<MeasureSpread>,
}

/// Spread tolerance for the equivalence of maximally entangled outputs.
pub const MAXENT_SPREAD_TOL: f64 = 1e-7;

impl MaxEntReport {
    pub fn passed(&self) -> bool {
        self.measures.iter().all(|m| m.spread < MAXENT_SPREAD_TOL)
    }

    pub fn spread(&self, kind: MeasureKind) -> Option<&MeasureSpread> {
        self.measures.iter().find(|m| m.measure == kind)
    }
}

/// Sends `trials` Haar-random maximally entangled states `(U_A ⊗ U_B)|ψ+>`
/// through the unilocal channel and records how much each two-qubit measure
/// varies across the outputs.
pub fn max_entangled_equivalence(
    channel: &KrausChannel,
    trials: usize,
    seed: u64,
) -> Result<MaxEntReport> {
    let pair = extend_to_pair(channel)?;
    let psi = max_entangled(2)?;
    let cut = Cut::first();
    let kinds = MeasureKind::TWO_QUBIT;
    let values = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = random::rng_for(seed, i);
            let ua = random::haar_unitary(2, &mut rng);
            let ub = random::haar_unitary(2, &mut rng);
            let input: PureState = psi.transformed(&tensor(&ua, &ub))?;
            let out = pair.apply(&input.density())?;
            kinds
                .iter()
                .map(|&k| measure(k, &out, &cut).map(|v| v.value))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let measures = kinds
        .iter()
        .enumerate()
        .map(|(j, &kind)| {
            let (min, max) = values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v[j]), hi.max(v[j]))
                });
            let spread = if values.is_empty() { 0.0 } else { max - min };
            MeasureSpread {
                measure: kind,
                min,
                max,
                spread,
            }
        })
        .collect();
    Ok(MaxEntReport { trials, measures })
}
