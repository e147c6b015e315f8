use super::drude::DrudeParams;
use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, integrate_panels, log_breakpoints};
use std::f64::consts::FRAC_2_PI;

/// Lower integration limit of the dispersion integrals (eV).
const E_FLOOR: f64 = 1e-6;

/// Tabulated ε″(E) with optional Drude extrapolation below the first node.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedEps2 {
    energies_ev: Vec<f64>,
    eps2_values: Vec<f64>,
    low_energy_tail: Option<DrudeParams>,
}

impl TabulatedEps2 {
    pub fn new(energies_ev: Vec<f64>, eps2_values: Vec<f64>, low_energy_tail: Option<DrudeParams>) -> Result<Self> {
        if energies_ev.len() < 2 || energies_ev.len() != eps2_values.len() {
            return Err(Error::InvalidParameter("table needs >= 2 (energy, eps2) pairs".into()));
        }
        if energies_ev[0] <= 0.0 || energies_ev.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("table energies must be positive and strictly ascending".into()));
        }
        if eps2_values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("table eps2 values must be finite and non-negative".into()));
        }
        Ok(Self { energies_ev, eps2_values, low_energy_tail })
    }

    /// Samples `f` on a grid; convenient for building tables from analytic models.
    pub fn from_fn<F: Fn(f64) -> f64>(energies_ev: Vec<f64>, f: F, tail: Option<DrudeParams>) -> Result<Self> {
        let v = energies_ev.iter().map(|&e| f(e)).collect();
        Self::new(energies_ev, v, tail)
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies_ev
    }

    pub fn values(&self) -> &[f64] {
        &self.eps2_values
    }

    pub fn tail(&self) -> Option<&DrudeParams> {
        self.low_energy_tail.as_ref()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.energies_ev[0], *self.energies_ev.last().unwrap())
    }

    /// Copy with all nodes above `e_max` removed (cutoff sensitivity studies).
    pub fn truncated(&self, e_max: f64) -> Result<Self> {
        let n = self.energies_ev.partition_point(|&e| e <= e_max);
        Self::new(self.energies_ev[..n].to_vec(), self.eps2_values[..n].to_vec(), self.low_energy_tail)
    }

    /// ε″ at E: Drude tail below the table, log-log interpolation inside, zero above.
    pub fn eps2(&self, e: f64) -> f64 {
        let (lo, hi) = self.support();
        if e < lo {
            return match &self.low_energy_tail {
                Some(d) => d.eps2(e),
                None => 0.0,
            };
        }
        if e > hi {
            return 0.0;
        }
        let i = (self.energies_ev.partition_point(|&x| x <= e)).clamp(1, self.energies_ev.len() - 1) - 1;
        let (x0, x1) = (self.energies_ev[i], self.energies_ev[i + 1]);
        let (y0, y1) = (self.eps2_values[i], self.eps2_values[i + 1]);
        if y0 <= 0.0 || y1 <= 0.0 {
            return y0 + (y1 - y0) * (e - x0) / (x1 - x0);
        }
        let t = (e / x0).ln() / (x1 / x0).ln();
        (y0.ln() + t * (y1 / y0).ln()).exp()
    }

    fn g(&self, e: f64) -> f64 {
        if e < self.energies_ev[0] {
            match &self.low_energy_tail {
                Some(d) => d.e_times_eps2(e),
                None => 0.0,
            }
        } else {
            e * self.eps2(e)
        }
    }

    fn breakpoints(&self, lo: f64) -> Vec<f64> {
        let first = self.energies_ev[0];
        let mut b = if lo < first { log_breakpoints(lo, first, 4) } else { vec![] };
        b.pop();
        for w in self.energies_ev.windows(2) {
            let sub = log_breakpoints(w[0], w[1], 8);
            b.extend_from_slice(&sub[..sub.len() - 1]);
        }
        b.push(*self.energies_ev.last().unwrap());
        b
    }

    /// ε′(E) = 1 + (2/π) P∫ E′ε″(E′)/(E′² − E²) dE′ over [E_floor, E_max].
    pub fn kramers_kronig_real(&self, e: f64) -> Result<f64> {
        if !(e > 0.0) {
            return Err(Error::Domain(format!("kramers-kronig needs E > 0, got {e}")));
        }
        let lo = if self.low_energy_tail.is_some() { E_FLOOR } else { self.energies_ev[0] };
        let breaks = self.breakpoints(lo);
        Ok(1.0 + kk_principal_value(|x| self.g(x), &breaks, e))
    }

    /// ε(iξ) = 1 + (2/π)∫ E ε″(E)/(E² + ξ²) dE with the Drude tail below the table in closed form.
    pub fn eps_imag_axis(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(Error::Domain(format!("imaginary-axis energy must be > 0, got {xi}")));
        }
        let rule = gauss_legendre(16);
        let first = self.energies_ev[0];
        let breaks = self.breakpoints(first);
        let body = integrate_panels(rule, &breaks, |x| x * self.eps2(x) / (x * x + xi * xi));
        let tail = self.low_energy_tail.map_or(0.0, |d| d.imag_axis_partial(first, xi));
        Ok(1.0 + FRAC_2_PI * body + tail)
    }
}

/// Inserts `x` into the sorted breakpoints; a neighbour closer than 1e-9 relative is moved
/// onto `x` when `snap`, otherwise the insertion is skipped.
fn insert_break(b: &mut Vec<f64>, x: f64, snap: bool) {
    let k = b.partition_point(|&y| y < x);
    let tol = 1e-9 * x.abs();
    for j in [k.wrapping_sub(1), k] {
        if let Some(y) = b.get_mut(j) {
            if (*y - x).abs() <= tol {
                if snap {
                    *y = x;
                }
                return;
            }
        }
    }
    b.insert(k, x);
}

/// (2/π)·P∫ g(E′)/(E′² − E²) dE′ over [breaks[0], breaks[last]] by subtracting g(E) over the
/// whole interval; `g` must be smooth inside each panel.
pub(crate) fn kk_principal_value<G: Fn(f64) -> f64>(g: G, breaks: &[f64], e: f64) -> f64 {
    let lo = breaks[0];
    let hi = *breaks.last().unwrap();
    let rule = gauss_legendre(16);
    let inside = e > lo && e < hi;
    let ge = if inside { g(e) } else { 0.0 };
    let mut b: Vec<f64> = breaks.to_vec();
    if inside {
        insert_break(&mut b, e, true);
        // refine around E so the difference quotient is resolved on a scale of E
        for x in [e * 0.9, e * 0.99, e * 1.01, e * 1.1] {
            if x > lo && x < hi {
                insert_break(&mut b, x, false);
            }
        }
    }
    let integral = integrate_panels(rule, &b, |x| (g(x) - ge) / ((x - e) * (x + e)));
    let log_term = if inside && ge != 0.0 {
        ge * (((hi - e) * (lo + e)) / ((hi + e) * (e - lo))).ln() / (2.0 * e)
    } else {
        0.0
    };
    FRAC_2_PI * (integral + log_term)
}
