//! Modeling, channel generation and sum-rate optimization for
//! beyond-diagonal reconfigurable intelligent surfaces (BD-RIS).
//!
//! * [`config`] and [`state`]: the mode/architecture configuration space and
//!   the feasible scattering matrices of each point in it.
//! * [`complexity`]: impedance-component counts.
//! * [`channel`]: Rician multi-user scenario generation.
//! * [`optimizer`]: joint precoder / scattering-matrix design.
//! * [`harness`]: seeded Monte-Carlo experiments and presets.

pub mod channel;
pub mod complexity;
pub mod config;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod optimizer;
pub mod state;

pub use channel::{ChannelRealization, SceneConfig};
pub use complexity::circuit_complexity;
pub use config::{Architecture, Mode, RisConfig};
pub use error::{Error, Result};
pub use optimizer::{OptimizerParams, Precoder, SolveResult};
pub use state::{EffectiveMatrices, ScatteringState, ValidationReport};
