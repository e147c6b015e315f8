use super::drude::DrudeParams;
use super::table::kk_principal_value;
use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, integrate_panels, log_breakpoints};
use num_complex::Complex64;
use std::f64::consts::FRAC_2_PI;

const E_TOP: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaucLorentzParams {
    pub amplitude_ev: f64,
    pub peak_energy_ev: f64,
    pub broadening_ev: f64,
    pub gap_energy_ev: f64,
}

impl TaucLorentzParams {
    pub fn new(amplitude_ev: f64, peak_energy_ev: f64, broadening_ev: f64, gap_energy_ev: f64) -> Result<Self> {
        if !(amplitude_ev > 0.0 && peak_energy_ev > 0.0 && broadening_ev > 0.0 && gap_energy_ev >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tauc-lorentz: A, E0, C must be > 0 and Eg >= 0 (got {amplitude_ev}, {peak_energy_ev}, {broadening_ev}, {gap_energy_ev})"
            )));
        }
        Ok(Self { amplitude_ev, peak_energy_ev, broadening_ev, gap_energy_ev })
    }
}

/// ε″(E) = (1/E)·A·E₀·C·(E − E_g)² / [(E² − E₀²)² + C²E²] above the gap, zero below.
pub fn tauc_lorentz_eps2(p: &TaucLorentzParams, e: f64) -> f64 {
    if e <= p.gap_energy_ev {
        return 0.0;
    }
    let (a, e0, c, eg) = (p.amplitude_ev, p.peak_energy_ev, p.broadening_ev, p.gap_energy_ev);
    let de = e - eg;
    let q = e * e - e0 * e0;
    a * e0 * c * de * de / (e * (q * q + c * c * e * e))
}

/// ε∞ + Drude + Σ Tauc–Lorentz; real parts of the oscillators by Kramers–Kronig.
#[derive(Debug, Clone, PartialEq)]
pub struct TaucLorentzSum {
    pub eps_inf: f64,
    pub oscillators: Vec<TaucLorentzParams>,
    pub drude: Option<DrudeParams>,
}

impl TaucLorentzSum {
    pub fn new(eps_inf: f64, oscillators: Vec<TaucLorentzParams>, drude: Option<DrudeParams>) -> Result<Self> {
        if !(eps_inf >= 1.0) {
            return Err(Error::InvalidParameter(format!("eps_inf must be >= 1, got {eps_inf}")));
        }
        Ok(Self { eps_inf, oscillators, drude })
    }

    fn tl_eps2(&self, e: f64) -> f64 {
        self.oscillators.iter().map(|p| tauc_lorentz_eps2(p, e)).sum()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let lo = self
            .oscillators
            .iter()
            .map(|p| p.gap_energy_ev)
            .fold(f64::INFINITY, f64::min)
            .max(1e-3);
        let mut b = log_breakpoints(lo, E_TOP, 12);
        for p in &self.oscillators {
            for x in [p.gap_energy_ev, p.peak_energy_ev] {
                if x > lo && x < E_TOP {
                    let k = b.partition_point(|&y| y < x);
                    if b[k] != x {
                        b.insert(k, x);
                    }
                }
            }
        }
        b
    }

    pub fn eps2(&self, e: f64) -> f64 {
        self.tl_eps2(e) + self.drude.map_or(0.0, |d| d.eps2(e))
    }

    pub fn eps_real_axis(&self, e: f64) -> Result<Complex64> {
        if !(e > 0.0) {
            return Err(Error::Domain(format!("real-axis energy must be > 0, got {e}")));
        }
        let re_tl = if self.oscillators.is_empty() {
            0.0
        } else {
            kk_principal_value(|x| x * self.tl_eps2(x), &self.breakpoints(), e)
        };
        let drude = self.drude.map_or(Complex64::new(1.0, 0.0), |d| d.eps_real_axis(e));
        Ok(Complex64::new(self.eps_inf + re_tl + drude.re - 1.0, self.tl_eps2(e) + drude.im))
    }

    pub fn eps_imag_axis(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(Error::Domain(format!("imaginary-axis energy must be > 0, got {xi}")));
        }
        let osc = if self.oscillators.is_empty() {
            0.0
        } else {
            FRAC_2_PI * integrate_panels(gauss_legendre(16), &self.breakpoints(), |x| x * self.tl_eps2(x) / (x * x + xi * xi))
        };
        Ok(self.eps_inf + osc + self.drude.map_or(0.0, |d| d.eps_imag_axis(xi) - 1.0))
    }
}
