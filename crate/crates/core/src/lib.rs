//! Generalized frequency division multiplexing (GFDM) laboratory.

pub mod bccb;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiment;
pub mod frame;
pub mod linalg;
pub mod metrics;
pub mod modulator;
pub mod pulse;
pub mod precoders;
pub mod qam;
pub mod receivers;
pub mod stats;
pub mod validation;

pub use config::GfdmConfig;
pub use experiment::ExperimentConfig;
pub use metrics::Scheme;
pub use error::{GfdmError, Result};
pub use modulator::{build_modulation_matrix, GfdmModem, ModulationMatrix, Ordering};
pub use pulse::{make_rrc_pulse, PulseShape};
pub use qam::Constellation;
