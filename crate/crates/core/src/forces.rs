//! Closed-form sphere–plate forces: electrostatics (PFA, bending-corrected, exact sphere),
//! squeeze-film hydrodynamics with slip, and the compressibility number.

use crate::error::{Error, Result};
use crate::units::EPS0;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePlateGeometry {
    pub radius_m: f64,
    pub gap_m: f64,
}

impl SpherePlateGeometry {
    pub fn new(radius_m: f64, gap_m: f64) -> Result<Self> {
        if !(radius_m > 0.0) || !(gap_m > 0.0) {
            return Err(Error::Domain(format!("need R > 0 and d > 0 (R={radius_m}, d={gap_m})")));
        }
        Ok(Self { radius_m, gap_m })
    }

    /// d/R small enough for the proximity-force approximation.
    pub fn pfa_valid(&self) -> bool {
        self.gap_m / self.radius_m < 0.02
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasProperties {
    pub viscosity_pa_s: f64,
    pub pressure_pa: f64,
    pub slip_length_m: f64,
}

impl Default for GasProperties {
    /// Air at 300 K and one atmosphere, no slip.
    fn default() -> Self {
        Self { viscosity_pa_s: 1.85e-5, pressure_pa: 1.013e5, slip_length_m: 0.0 }
    }
}

impl GasProperties {
    pub fn with_slip(mut self, b_m: f64) -> Self {
        self.slip_length_m = b_m;
        self
    }
}

/// F = −ε₀πR(V + V₀)²/d.
pub fn electrostatic_force(geom: &SpherePlateGeometry, v: f64, v0: f64) -> Result<f64> {
    if !(geom.gap_m > 0.0) {
        return Err(Error::Domain(format!("gap must be > 0, got {}", geom.gap_m)));
    }
    let u = v + v0;
    Ok(-EPS0 * PI * geom.radius_m * u * u / geom.gap_m)
}

/// Electrostatic force with the cantilever deflection solved self-consistently:
/// F = −½[k·d − √(k²d² − 4kε₀πRV²)] for unbent gap d.
pub fn electrostatic_force_with_bending(radius_m: f64, unbent_gap_m: f64, v: f64, k: f64) -> Result<f64> {
    if !(unbent_gap_m > 0.0) || !(k > 0.0) || !(radius_m > 0.0) {
        return Err(Error::Domain("need unbent gap, k and R all > 0".into()));
    }
    let kd = k * unbent_gap_m;
    let c = 4.0 * k * EPS0 * PI * radius_m * v * v;
    let disc = kd * kd - c;
    if disc < 0.0 {
        return Err(Error::SnapIn { gap_nm: unbent_gap_m * 1e9, discriminant: disc });
    }
    // stable form of ½[kd − √(kd² − c)] = c / (2[kd + √disc])
    Ok(-c / (2.0 * (kd + disc.sqrt())))
}

/// Slip correction f*(d, b) for equal slip lengths on both surfaces; f*(d, 0) = 1.
pub fn slip_factor(d: f64, b: f64) -> f64 {
    if b <= 0.0 {
        return 1.0;
    }
    let x = 6.0 * b / d;
    if x < 1e-4 {
        return 1.0 - x / 3.0 + x * x / 6.0;
    }
    (2.0 / x) * ((1.0 + 1.0 / x) * x.ln_1p() - 1.0)
}

/// F_H = −6πηR²v/d · f*(d, b); v is the rate of change of the gap.
pub fn hydrodynamic_force(geom: &SpherePlateGeometry, velocity: f64, gas: &GasProperties) -> f64 {
    let r = geom.radius_m;
    -6.0 * PI * gas.viscosity_pa_s * r * r * velocity / geom.gap_m * slip_factor(geom.gap_m, gas.slip_length_m)
}

/// σ = 4ηω₂R/(pd); the elastic part of the squeeze film is negligible for σ ≪ 1.
pub fn sigma_sphere(gas: &GasProperties, omega2: f64, geom: &SpherePlateGeometry) -> f64 {
    4.0 * gas.viscosity_pa_s * omega2 * geom.radius_m / (gas.pressure_pa * geom.gap_m)
}

/// dC/dd of an isolated sphere above a grounded plane (bispherical series), F/m.
fn exact_capacitance_derivative(radius_m: f64, gap_m: f64) -> f64 {
    let beta = (1.0 + gap_m / radius_m).acosh();
    let (sb, cb) = (beta.sinh(), beta.cosh());
    let mut s = 0.0;
    let mut n = 1.0;
    loop {
        let nb = n * beta;
        let (snb, cnb) = (nb.sinh(), nb.cosh());
        let t = cb / snb - sb * n * cnb / (snb * snb);
        s += t;
        if nb > 40.0 && t.abs() < 1e-17 * s.abs() {
            break;
        }
        n += 1.0;
    }
    4.0 * PI * EPS0 * radius_m * s / (radius_m * sb)
}

/// Exact sphere–plane electrostatic force at voltage V (always ≤ 0).
pub fn electrostatic_force_exact_sphere(radius_m: f64, gap_m: f64, v: f64) -> Result<f64> {
    if !(gap_m > 0.0) || !(radius_m > 0.0) {
        return Err(Error::Domain("need R > 0 and d > 0".into()));
    }
    Ok(0.5 * v * v * exact_capacitance_derivative(radius_m, gap_m))
}

/// Ratio of exact-sphere to PFA electrostatic force, tabulated on a log grid of gaps.
#[derive(Debug, Clone)]
pub struct ExactSphereCorrection {
    ln_gap0: f64,
    step: f64,
    ratio: Vec<f64>,
}

impl ExactSphereCorrection {
    pub fn new(radius_m: f64, gap_lo_m: f64, gap_hi_m: f64, nodes: usize) -> Result<Self> {
        if !(gap_lo_m > 0.0 && gap_hi_m > gap_lo_m) || nodes < 2 {
            return Err(Error::InvalidParameter("correction table needs 0 < lo < hi and >= 2 nodes".into()));
        }
        let ln0 = gap_lo_m.ln();
        let step = (gap_hi_m / gap_lo_m).ln() / (nodes - 1) as f64;
        let ratio = (0..nodes)
            .map(|i| {
                let g = (ln0 + step * i as f64).exp();
                let pfa = -EPS0 * PI * radius_m / g;
                0.5 * exact_capacitance_derivative(radius_m, g) / pfa
            })
            .collect();
        Ok(Self { ln_gap0: ln0, step, ratio })
    }

    /// F_exact / F_PFA at the gap (clamped to the table).
    pub fn ratio(&self, gap_m: f64) -> f64 {
        let x = ((gap_m.ln() - self.ln_gap0) / self.step).clamp(0.0, (self.ratio.len() - 1) as f64);
        let i = (x.floor() as usize).min(self.ratio.len() - 2);
        let f = x - i as f64;
        self.ratio[i] * (1.0 - f) + self.ratio[i + 1] * f
    }
}
