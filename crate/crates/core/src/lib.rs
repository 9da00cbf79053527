//! Explicit finite-difference solver for the 2D wave equation in stratified
//! waveguides, with time-dependent Tappert and Higdon absorbing boundaries
//! and a truncated-versus-extended benchmark harness.

pub mod abc;
pub mod config;
pub mod error;
pub mod grid;
pub mod harness;
pub mod medium;
pub mod scheme;
pub mod simulation;
pub mod snapshot;
pub mod source;
pub mod state;

pub use abc::{BoundaryKind, BoundarySpec, FluxForm};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use grid::Grid;
pub use harness::{ErrorSeries, ExperimentSpec, SourceMode};
pub use medium::{SoundSpeedModel, SpeedSample};
pub use simulation::Simulation;
pub use snapshot::Snapshot;
pub use source::{SourceSpec, Waveform};
pub use state::{Side, WaveState};
