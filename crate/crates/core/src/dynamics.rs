//! Entanglement decay under the one-sided depolarizing semigroup
//! `E_t[ρ] = e^{-t/T} ρ + (1 - e^{-t/T}) I/2`.

use serde::{Deserialize, Serialize};

use crate::channels::{unilocal, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::TensorShape;
use crate::measures::{concurrence, measure, Cut, MeasureKind, MeasureValue};
use crate::states::DensityMatrix;

/// Concurrence below this counts as zero when locating `t_sep`.
pub const ZERO_CONCURRENCE: f64 = 1e-9;
/// Upper bisection bracket in units of `T`.
pub const BRACKET_FACTOR: f64 = 50.0;

/// Depolarizing semigroup with decay constant `T`, at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemigroupChannel {
    pub decay_time: f64,
    pub t: f64,
}

impl SemigroupChannel {
    pub fn new(decay_time: f64, t: f64) -> Result<Self> {
        check_decay_time(decay_time)?;
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time {t} must be non-negative")));
        }
        Ok(Self { decay_time, t })
    }

    /// Depolarizing parameter `p = e^{-t/T}`.
    pub fn p(&self) -> f64 {
        (-self.t / self.decay_time).exp()
    }

    pub fn channel(&self) -> KrausChannel {
        KrausChannel::depolarizing(self.p()).expect("e^{-t/T} lies in [0, 1]")
    }
}

fn check_decay_time(decay_time: f64) -> Result<()> {
    if !(decay_time > 0.0) || !decay_time.is_finite() {
        return Err(Error::Domain(format!(
            "decay time {decay_time} must be positive"
        )));
    }
    Ok(())
}

/// Single-qubit channel of the semigroup at time `t`.
pub fn channel_at(decay_time: f64, t: f64) -> Result<KrausChannel> {
    Ok(SemigroupChannel::new(decay_time, t)?.channel())
}

/// `T ln 3`: the time at which `P+` under one-sided depolarization becomes
/// separable.
pub fn tsep_analytic(decay_time: f64) -> Result<f64> {
    check_decay_time(decay_time)?;
    Ok(decay_time * 3f64.ln())
}

fn evolve(decay_time: f64, t: f64, initial: &DensityMatrix) -> Result<DensityMatrix> {
    let ch = unilocal(&channel_at(decay_time, t)?, 0, &TensorShape::qubits(2))?;
    ch.apply(initial)
}

fn concurrence_at(decay_time: f64, t: f64, initial: &DensityMatrix) -> Result<f64> {
    concurrence(&evolve(decay_time, t, initial)?)
}

/// Bisection for the first time the concurrence of the evolved two-qubit
/// state drops to zero, bracketed by `[0, 50 T]`.
pub fn tsep_numeric(decay_time: f64, initial: &DensityMatrix, tol: f64) -> Result<f64> {
    tsep_numeric_bracketed(decay_time, initial, tol, BRACKET_FACTOR * decay_time)
}

/// [`tsep_numeric`] with an explicit upper bracket.
pub fn tsep_numeric_bracketed(
    decay_time: f64,
    initial: &DensityMatrix,
    tol: f64,
    upper: f64,
) -> Result<f64> {
    check_decay_time(decay_time)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    if concurrence(initial)? < ZERO_CONCURRENCE {
        return Err(Error::NoDecay);
    }
    if concurrence_at(decay_time, upper, initial)? >= ZERO_CONCURRENCE {
        return Err(Error::Bracket { upper });
    }
    let (mut lo, mut hi) = (0.0, upper);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if concurrence_at(decay_time, mid, initial)? >= ZERO_CONCURRENCE {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: DensityMatrix,
    pub value: MeasureValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    /// CSV rows `t,measure_kind,value`, optionally with the serialized state.
    pub fn csv_rows(&self, with_state: bool) -> Vec<Vec<String>> {
        self.samples
            .iter()
            .map(|s| {
                let mut row = vec![
                    s.t.to_string(),
                    s.value.kind.to_string(),
                    s.value.value.to_string(),
                ];
                if with_state {
                    row.push(serde_json::to_string(&s.state.to_json()).expect("state JSON"));
                }
                row
            })
            .collect()
    }
}

/// Samples the evolved state and `kind` at each time in `times`, which must be
/// strictly increasing and non-negative.
pub fn trajectory(
    decay_time: f64,
    initial: &DensityMatrix,
    times: &[f64],
    kind: MeasureKind,
) -> Result<Trajectory> {
    check_decay_time(decay_time)?;
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(
            "time grid must be strictly increasing".into(),
        ));
    }
    let cut = Cut::first();
    let samples = times
        .iter()
        .map(|&t| {
            let state = evolve(decay_time, t, initial)?;
            let value = measure(kind, &state, &cut)?;
            Ok(TrajectorySample { t, state, value })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { samples })
}
