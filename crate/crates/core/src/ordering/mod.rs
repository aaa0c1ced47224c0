//! How unilocal channels reshuffle the entanglement-induced ordering of
//! states: input/output diagrams, horizontal fibers, searches for
//! order-violating pairs, and the four-qubit maximal-entanglement example.

mod axioms;
mod counterexample;
mod diagram;
mod violation;

pub use axioms::{run_axioms, AxiomConfig, AxiomReport, MeasureAxioms};
pub use counterexample::{
    four_qubit_counterexample, max_entangled_equivalence, FourQubitReport, MaxEntReport,
    MeasureSpread,
};
pub use diagram::{
    fibers, scan_diagram, DiagramPoint, Family, FiberOverlap, FiberReport, HorizontalFiber,
    FIBER_BIN_WIDTH,
};
pub use violation::{find_violation, SearchStrategy, ViolationCertificate, VIOLATION_MARGIN};

use crate::channels::{unilocal, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::TensorShape;

/// Lifts a qubit channel to act on `A` of a two-qubit system.
pub fn extend_to_pair(ch: &KrausChannel) -> Result<KrausChannel> {
    match (ch.d_in(), ch.d_out()) {
        (2, 2) => unilocal(ch, 0, &TensorShape::qubits(2)),
        (i, o) => Err(Error::Dimension(format!(
            "expected a qubit channel, got {i}->{o}"
        ))),
    }
}
