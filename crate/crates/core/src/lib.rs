//! Device-independent certification of quantum black boxes.
//!
//! Swap operators written in terms of the boxes' measurement operators turn
//! the fidelity of the swapped state (or a measurement figure of merit) into a
//! linear function of moments. Minimizing it over an NPA moment relaxation
//! gives a lower bound that holds for every quantum realization compatible
//! with the observed Bell value.

pub mod algebra;
pub mod checks;
pub mod error;
pub mod moments;
pub mod oracle;
pub mod sdp;
pub mod swap;

pub use error::{Error, Result};
