//! Physical constants (SI) and the eV conversions used throughout.

use std::f64::consts::PI;

pub const EPS0: f64 = 8.854_187_812_8e-12;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const C_LIGHT: f64 = 299_792_458.0;
pub const K_B: f64 = 1.380_649e-23;
/// Joules per electron-volt.
pub const EV: f64 = 1.602_176_634e-19;
/// ħ in eV·s.
pub const HBAR_EV: f64 = 6.582_119_569e-16;
/// Boltzmann constant in eV/K.
pub const K_B_EV: f64 = 8.617_333_262e-5;
/// hc in eV·nm.
pub const HC_EV_NM: f64 = 1_239.841_984;

/// Angular frequency (rad/s) of a photon energy in eV.
pub fn ev_to_rad_per_s(e_ev: f64) -> f64 {
    e_ev / HBAR_EV
}

/// Wavenumber ξ/c (1/m) for an imaginary energy in eV.
pub fn ev_to_wavenumber(e_ev: f64) -> f64 {
    e_ev / (HBAR_EV * C_LIGHT)
}

pub fn nm(x: f64) -> f64 {
    x * 1e-9
}

pub fn to_nm(x_m: f64) -> f64 {
    x_m * 1e9
}

/// Electrostatic prefactor ε₀π, the conversion between α-type signals and force per radius.
pub fn eps0_pi() -> f64 {
    EPS0 * PI
}
