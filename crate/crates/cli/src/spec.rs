//! Channel and initial-state specifications given on the command line.

use std::path::Path;

use entlab_core::channels::{ChannelJson, KrausChannel};
use entlab_core::linalg::{CMatrix, C64};
use entlab_core::states::{pplus, schmidt_pure, werner, DensityMatrix, StateJson};

use crate::error::CliError;

pub const CHANNEL_NAMES: &str =
    "identity, depolarizing, hadamard, completely-depolarizing, selective";

fn hadamard() -> CMatrix {
    let s = C64::new(0.5f64.sqrt(), 0.0);
    CMatrix::from_vec(2, 2, vec![s, s, s, -s]).expect("2x2")
}

/// Resolves `--channel` (a built-in name or a JSON file) plus `--p`.
/// Unreadable or malformed input exits with 2; a well-formed channel that
/// breaks the CPTP contract exits with 3.
pub fn channel(spec: &str, p: Option<f64>) -> Result<KrausChannel, CliError> {
    let bad = |e| CliError::with_context(&format!("bad channel spec '{spec}'"), e);
    match spec {
        "identity" => Ok(KrausChannel::identity(2)),
        "depolarizing" => {
            let p = p.ok_or_else(|| CliError::input("channel 'depolarizing' needs --p"))?;
            KrausChannel::depolarizing(p).map_err(bad)
        }
        "hadamard" => KrausChannel::unitary(hadamard()).map_err(bad),
        "completely-depolarizing" => Ok(KrausChannel::completely_depolarizing(2)),
        "selective" => Ok(KrausChannel::selective_check()),
        path if path.ends_with(".json") || Path::new(path).is_file() => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("cannot read channel file '{path}': {e}")))?;
            let json: ChannelJson = serde_json::from_str(&text)
                .map_err(|e| CliError::input(format!("malformed channel JSON '{path}': {e}")))?;
            KrausChannel::from_json(&json).map_err(bad)
        }
        other => Err(CliError::input(format!(
            "unknown channel '{other}' (expected one of {CHANNEL_NAMES}, or a .json file)"
        ))),
    }
}

/// Resolves `--initial`: `pplus`, `werner:<q>`, `pure:<alpha>`, or a state JSON file.
pub fn initial_state(spec: &str) -> Result<DensityMatrix, CliError> {
    let bad = |e| CliError::with_context(&format!("bad initial state '{spec}'"), e);
    let number = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| CliError::input(format!("bad number in initial state '{spec}'")))
    };
    if spec == "pplus" {
        return Ok(pplus());
    }
    if let Some(q) = spec.strip_prefix("werner:") {
        return werner(number(q)?).map_err(bad);
    }
    if let Some(a) = spec.strip_prefix("pure:") {
        return Ok(schmidt_pure(number(a)?).map_err(bad)?.density());
    }
    if spec.ends_with(".json") || Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec)
            .map_err(|e| CliError::input(format!("cannot read state file '{spec}': {e}")))?;
        let json: StateJson = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("malformed state JSON '{spec}': {e}")))?;
        return DensityMatrix::from_json(&json).map_err(bad);
    }
    Err(CliError::input(format!(
        "unknown initial state '{spec}' (expected pplus, werner:<q>, pure:<alpha> or a .json file)"
    )))
}
