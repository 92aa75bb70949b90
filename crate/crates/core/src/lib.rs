// SPDX-License-Identifier: Apache-2.0

//! Inference of time-varying diffusion networks from observed cascades.
//!
//! * [`model`]: transmission likelihoods, cascade log-likelihoods and gradients.
//! * [`synth`]: Kronecker ground truth with evolving edge rates and cascade simulation.
//! * [`inference`]: projected stochastic-gradient solvers, dynamic and static.
//! * [`evaluation`]: precision, recall, accuracy, MSE and network analytics.
//! * [`io`] and [`cli`]: file formats and the `diffpath` command.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod evaluation;
pub mod inference;
pub mod io;
pub mod model;
pub mod synth;

pub use error::{Error, Result};
pub use evaluation::{Label, SnapshotScore};
pub use inference::{CascadeStore, InferenceConfig, Sampling, StepSchedule};
pub use model::{Cascade, Edge, Event, Family, NodeId, RateSnapshot, TransmissionModel};
pub use synth::{EvolutionPattern, GroundTruthNetwork, KroneckerSpec, PatternKind};
