//! Numerics for gate teleportation of GKP qubits through a damped rotation:
//! Jacobi theta functions with modular reduction, output coefficients,
//! zero-damping Gauss-sum classification, Bloch-sphere densities and
//! magic-state statistics.

pub mod analysis;
pub mod error;
pub mod export;
pub mod gauss_sums;
pub mod hermite;
pub mod par;
pub mod pushforward;
pub mod teleport;
pub mod theta;
pub mod verify;

pub use error::{Error, Result};
pub use par::Execution;
pub use pushforward::{BlochDensity, OutcomeGrid};
pub use teleport::{BlochPoint, MeasurementOutcome, OutputCoefficients, ProtocolParams};
pub use theta::{RationalAngle, ThetaArgs, ThetaConfig};
