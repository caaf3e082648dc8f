//! Desk-scale analog filter workbench.
//!
//! Simulates memristor-augmented RLC / op-amp circuits via modified nodal
//! analysis, characterizes rational approximations of the ideal Gaussian
//! low-pass, synthesizes the reference ladder network and Sallen-Key
//! cascades, and fits the logarithmic magnitude model to response data.

pub mod gaussian;
mod linalg;
pub mod memristor;
pub mod mna;
pub mod netlist;
pub mod poly;
pub mod regression;
pub mod synth;
pub mod tf;

pub use poly::Polynomial;
pub use tf::{FrequencyResponse, RationalTf, Waveform};
