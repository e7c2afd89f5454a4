//! Waveform design for a colocated MIMO array that tracks a target while
//! simultaneously delivering prescribed signals (communication symbols or
//! jamming) toward other directions.

pub mod array_model;
pub mod disturbance;
pub mod energy_solver;
pub mod error;
pub mod linalg;
pub mod operator;
pub mod papr_solver;
pub mod scenario;
pub mod signals;
pub mod structured_solver;
pub mod waveform;

pub use array_model::{ArrayGeometry, DirectionSet};
pub use disturbance::{Covariance, GeneralCovariance, Jammer, StructuredCovariance};
pub use error::{Error, Result};
pub use linalg::C64;
pub use operator::HermitianOp;
pub use scenario::Scenario;
pub use waveform::{IterationRecord, SolverReport, WaveformMatrix};
