//! Entanglement measures, unilocal channels and entanglement-ordering
//! analyses for systems of a few qubits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod ordering;
pub mod random;
pub mod states;

pub use error::{Error, Result};
