//! Dense feedforward networks with a ten-function activation zoo (including
//! the trainable-hinge PFTS), plus the benchmark statistics and numerical
//! analysis tools used to compare them.

pub mod activations;
pub mod analysis;
pub mod data;
pub mod error;
pub mod experiment;
pub mod network;
pub mod numerics;

pub use activations::{ActivationKind, ActivationSpec, ActivationState};
pub use data::{Dataset, DatasetSpec};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, RankReport, ResultTable};
pub use network::{Network, NetworkConfig, TrainConfig};
pub use numerics::{Matrix, RandomStream};
