//! Extraction mathematics: α, the (d₀, κ) calibration fit, force-gradient and hydrodynamic
//! extraction, the spring-constant fit, drift trending and residual statistics.
//!
//! Signals are lock-in outputs in the amplitude convention and carry the sign of the
//! deflection they represent (attraction gives negative S_2ω1 and S_4ω1).

mod calibration;
mod extraction;
mod records;
mod stats;

pub use calibration::{alpha_of, alpha_of_bending_corrected, fit_calibration, fit_records, CalibrationFit};
pub use extraction::{
    casimir_gradient, electrostatic_gradient, gamma_from, gradient_curve, gradient_difference_check, hydro_force_over_r,
    mean_ratio, spring_fit, total_gradient, DifferencePoint, GradientCurve, GradientKind, GradientPoint, SpringFit,
};
pub use records::{read_fits, read_records, write_fits, write_records, DemodRecord, FitRow};
pub use stats::{gaussian_fit_sigma, residual_stats, savgol_center_weight, smooth_trend, ResidualStats};
