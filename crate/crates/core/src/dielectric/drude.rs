use crate::error::{Error, Result};
use num_complex::Complex64;

/// Free-electron Drude response ε = 1 − ω_p²/(E(E + iΓ)), energies in eV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeParams {
    pub plasma_energy_ev: f64,
    pub relaxation_energy_ev: f64,
}

/// Point on the real or imaginary frequency axis, in eV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frequency {
    Real(f64),
    Imaginary(f64),
}

impl DrudeParams {
    pub fn new(plasma_energy_ev: f64, relaxation_energy_ev: f64) -> Result<Self> {
        if !(plasma_energy_ev > 0.0) || !(relaxation_energy_ev >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "drude: need plasma > 0 and relaxation >= 0, got {plasma_energy_ev}, {relaxation_energy_ev}"
            )));
        }
        Ok(Self { plasma_energy_ev, relaxation_energy_ev })
    }

    /// Drude parameters of gold.
    pub fn gold() -> Self {
        Self { plasma_energy_ev: 9.0, relaxation_energy_ev: 0.035 }
    }

    pub fn eps_real_axis(&self, e: f64) -> Complex64 {
        let wp2 = self.plasma_energy_ev * self.plasma_energy_ev;
        Complex64::new(1.0, 0.0) - wp2 / (Complex64::new(e, 0.0) * Complex64::new(e, self.relaxation_energy_ev))
    }

    pub fn eps_imag_axis(&self, xi: f64) -> f64 {
        1.0 + self.plasma_energy_ev * self.plasma_energy_ev / (xi * (xi + self.relaxation_energy_ev))
    }

    /// ε″(E) = ω_p²Γ / (E(E² + Γ²)).
    pub fn eps2(&self, e: f64) -> f64 {
        let g = self.relaxation_energy_ev;
        self.plasma_energy_ev * self.plasma_energy_ev * g / (e * (e * e + g * g))
    }

    /// E·ε″(E), regular at E = 0.
    pub fn e_times_eps2(&self, e: f64) -> f64 {
        let g = self.relaxation_energy_ev;
        self.plasma_energy_ev * self.plasma_energy_ev * g / (e * e + g * g)
    }

    /// (2/π)∫₀^a E ε″(E)/(E² + ξ²) dE in closed form.
    pub fn imag_axis_partial(&self, a: f64, xi: f64) -> f64 {
        let g = self.relaxation_energy_ev;
        let wp2 = self.plasma_energy_ev * self.plasma_energy_ev;
        if g == 0.0 {
            return 0.0;
        }
        let f = |s: f64| (a / s).atan() / s;
        let bracket = if (xi - g).abs() < 1e-6 * g {
            // limit ξ → Γ: −f'(Γ)/(2Γ)
            let fp = -a / (g * (g * g + a * a)) - (a / g).atan() / (g * g);
            -fp / (2.0 * g)
        } else {
            (f(g) - f(xi)) / (xi * xi - g * g)
        };
        std::f64::consts::FRAC_2_PI * wp2 * g * bracket
    }
}

/// Drude permittivity on either axis; the origin is a pole.
pub fn drude_eps(params: &DrudeParams, energy: Frequency) -> Result<Complex64> {
    match energy {
        Frequency::Real(e) if e != 0.0 && e.is_finite() => Ok(params.eps_real_axis(e)),
        Frequency::Imaginary(xi) if xi > 0.0 && xi.is_finite() => Ok(Complex64::new(params.eps_imag_axis(xi), 0.0)),
        other => Err(Error::Domain(format!("drude pole or invalid frequency: {other:?}"))),
    }
}
