//! Two-qubit concurrence under bang-bang π-pulse control in a pure-dephasing
//! spin-boson model, with an exact truncated-Fock propagator to check the
//! closed-form exponents.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dephasing;
pub mod entanglement;
pub mod oracle;
pub mod schedule;
pub mod spectral;

pub use dephasing::{
    AmplitudeForm, Bath, BathKind, ConcurrenceSeries, ModelParams, PrefactorMode,
    SpectrumEvaluation,
};
pub use entanglement::TwoQubitDensityMatrix;
pub use schedule::PulseSchedule;
pub use spectral::{DiscreteSpectrum, GaussianSpectrum, Mode};

/// Shortest-round-trip scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
