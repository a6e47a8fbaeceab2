//! File formats, experiment configuration and the command layer around
//! `toruspot-core`. The `toruspot` binary is a thin clap front end over
//! [`commands::run`].

pub mod calibration;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod oracle;
pub mod output;
pub mod verify;

pub use error::{AppError, AppResult};
