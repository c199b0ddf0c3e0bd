//! Two-crystal induced-coherence interferometer: closed-form predictions,
//! an exact Gaussian moment engine, a truncated Fock-space oracle and a
//! photon-counting Monte Carlo.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod counting;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod params;
pub mod validation;

pub use closed_form::G2Pair;
pub use counting::{CoincidenceHistogram, EventStream, SignalArm};
pub use error::{Error, Result};
pub use fock::{OracleReport, TruncatedFockState, TruncatedOperator};
pub use gaussian::{LinearBosonicMap, ModeLabel, MomentState};
pub use params::{DetectionParams, ExperimentParams, GateMode};
