//! Sphere–plate Casimir force rig: material optics, Lifshitz theory, force models,
//! time-domain signal synthesis, lock-in demodulation and the calibration/extraction chain.

pub mod analysis;
pub mod dielectric;
pub mod error;
pub mod forces;
pub mod io;
pub mod lifshitz;
pub mod lockin;
pub mod numeric;
pub mod optics;
pub mod rig;
pub mod runner;
pub mod units;

pub use error::{Error, Result};
