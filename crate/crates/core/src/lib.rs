//! Information balance of quantum measurements.
//!
//! Given a quantum instrument and an input state, the crate computes the
//! information gain ι, disturbance δ, missing information Δ and the
//! Groenewold–Ozawa gain ι_G, together with outcome-conditioned recovery
//! (Petz transpose channels, entanglement fidelity) and randomized checks of
//! the Holevo bound on classical encodings. Entropies are in bits.

pub mod dilation;
pub mod encodings;
pub mod error;
pub mod families;
pub mod io;
pub mod measures;
pub mod objects;
pub mod random;
pub mod recovery;
pub mod tensor;

pub use error::{Error, Result};
pub use measures::{balance_report, BalanceReport, MeasurementAnalysis};
pub use objects::{purify, Channel, Instrument, OutcomeMap, Povm, PurifiedInput};
pub use tensor::{ComplexMatrix, LabeledState, Subsystem};
