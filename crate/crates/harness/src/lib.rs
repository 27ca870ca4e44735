//! Experiment harness for spectral stability certificates.

pub use stabcert_core as core;

pub mod compare;
pub mod experiment;
pub mod instances;
pub mod report;
