//! Bell tests for pairs of two-mode bosonic states under the particle-number
//! superselection rule.
//!
//! Two copies of a two-mode state are shared so that each party holds one
//! mode of each copy. Each party mixes its modes on a beamsplitter with a
//! tunable phase, counts particles in the outputs and bins the count to ±1.
//! The crate builds the states ([`states`]), the beamsplitter action on Fock
//! space ([`optics`]), the correlations and Bell term ([`bell`]) and the
//! optimizers and diagnostics ([`analysis`]).

pub mod analysis;
pub mod bell;
pub mod error;
pub mod fock;
pub mod optics;
pub mod states;

pub use bell::{
    bell_term, correlation, epsilon, joint_distribution, postselected_bell_term, BellEvaluator, BellSettings,
    Binning, JointDistribution, MeasurementSetting,
};
pub use error::{Error, Result};
pub use fock::{DensityMatrix, FockBasis, FockVector, MixedState, PureState};
pub use num_complex::Complex64;
pub use optics::{apply_beamsplitter, BeamsplitterParams, LiftCache, ModeTransform};
pub use states::{bec_state, noon_state, squeezed_state, toy_mixed_state, two_copy, TwoCopyArrangement};
