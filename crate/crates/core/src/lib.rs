//! Resonator-shaped laser control for selective excitation of similar
//! quantum systems: propagation and exact-gradient pulse optimization,
//! intracavity field synthesis, absorption spectroscopy and transport
//! kinetics.

// Negated float comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod constants;
pub mod control;
pub mod error;
pub mod kinetics;
pub mod numerics;
pub mod quantum;
pub mod spectroscopy;

pub use error::{Error, Result};
pub use num_complex;
