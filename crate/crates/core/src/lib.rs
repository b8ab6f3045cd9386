//! Error rates models for quantum benchmarking data.
//!
//! An [`ErmModel`] assigns a process polarization to each basis element
//! (gate class, located gate, readout) and predicts a circuit's polarization
//! as the product over its counted elements. [`fit`] estimates those
//! parameters from benchmark datasets; [`simgen`] produces synthetic mirror
//! circuit data with known truth.

pub mod analysis;
pub mod basis;
pub mod circuit;
pub mod cli;
pub mod encoding;
pub mod error;
pub mod fit;
pub mod model;
mod optim;
pub mod rng;
pub mod simgen;

pub use basis::{BasisElementId, BasisRule, CountVector, RuleKind};
pub use circuit::{
    CapabilityKind, Circuit, CircuitRecord, Dataset, GateApplication, GateArities, FORMAT_VERSION,
};
pub use error::{Error, Result};
pub use fit::{fit, FitConfig, FitResult, Objective};
pub use model::{
    fidelity_from_polarization, polarization_from_fidelity, CapabilityPrediction, ErmModel,
};
