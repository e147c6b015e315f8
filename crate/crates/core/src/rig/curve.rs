//! Casimir force curve F_C(d)/R for the rig, from Lifshitz pressures via PFA.

use crate::error::{Error, Result};
use crate::lifshitz::{LifshitzCalculator, Plate, ZeroFrequency};
use crate::numeric::{gauss_legendre, CubicSpline};
use std::f64::consts::PI;

/// Separation range a truth curve must cover.
pub const REQUIRED_RANGE_M: (f64, f64) = (20e-9, 2000e-9);

/// F_C/R (N/m, negative for attraction) and its gradient, interpolated in ln-ln.
#[derive(Debug, Clone)]
pub struct CasimirCurve {
    inner: Option<Inner>,
}

#[derive(Debug, Clone)]
struct Inner {
    ln_force: CubicSpline,
    ln_pressure: CubicSpline,
    lo: f64,
    hi: f64,
}

impl CasimirCurve {
    pub fn zero() -> Self {
        Self { inner: None }
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_none()
    }

    /// Builds the curve from parallel-plate pressures P(d) (Pa, attractive < 0) on an
    /// ascending grid: F_C/R = 2π∫_d^∞ P, the tail beyond the grid as a power law.
    pub fn from_pressures(d_m: &[f64], p_pa: &[f64]) -> Result<Self> {
        if d_m.len() != p_pa.len() || d_m.len() < 4 {
            return Err(Error::InsufficientData("pressure table needs >= 4 matching points".into()));
        }
        if p_pa.iter().all(|&p| p == 0.0) {
            return Ok(Self::zero());
        }
        if p_pa.iter().any(|&p| !(p < 0.0)) {
            return Err(Error::InvalidParameter("truth curve must be attractive (P < 0) at every node".into()));
        }
        let u: Vec<f64> = d_m.iter().map(|d| d.ln()).collect();
        let lp: Vec<f64> = p_pa.iter().map(|p| (-p).ln()).collect();
        let ln_pressure = CubicSpline::new(u.clone(), lp)?;
        let n = u.len();
        let (lp_end, slope_end) = ln_pressure.eval_with_derivative(u[n - 1]);
        let exponent = -slope_end;
        if exponent <= 1.0 {
            return Err(Error::InvalidParameter(format!("pressure tail decays too slowly (d^-{exponent:.2})")));
        }
        let rule = gauss_legendre(16);
        // ∫|P| dd over [d_i, ∞)
        let mut cum = vec![0.0; n];
        cum[n - 1] = lp_end.exp() * d_m[n - 1] / (exponent - 1.0);
        for i in (0..n - 1).rev() {
            let seg = rule.integrate(u[i], u[i + 1], |s| (ln_pressure.eval(s) + s).exp());
            cum[i] = cum[i + 1] + seg;
        }
        let lf: Vec<f64> = cum.iter().map(|c| (2.0 * PI * c).ln()).collect();
        Ok(Self {
            inner: Some(Inner { ln_force: CubicSpline::new(u, lf)?, ln_pressure, lo: d_m[0], hi: d_m[n - 1] }),
        })
    }

    pub fn from_lifshitz(calc: &LifshitzCalculator, d_m: &[f64]) -> Result<Self> {
        let p = calc.pressures(d_m)?;
        Self::from_pressures(d_m, &p)
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        self.inner.as_ref().map(|i| (i.lo, i.hi))
    }

    /// (F_C/R, (1/R)∂F_C/∂d) at separation d.
    #[inline]
    pub fn eval(&self, d: f64) -> Result<(f64, f64)> {
        let Some(c) = &self.inner else { return Ok((0.0, 0.0)) };
        if !(d >= c.lo && d <= c.hi) {
            return Err(Error::Extrapolation { d_nm: d * 1e9, lo_nm: c.lo * 1e9, hi_nm: c.hi * 1e9 });
        }
        let u = d.ln();
        let f = -c.ln_force.eval(u).exp();
        let g = 2.0 * PI * c.ln_pressure.eval(u).exp();
        Ok((f, g))
    }

    pub fn force_over_r(&self, d: f64) -> Result<f64> {
        Ok(self.eval(d)?.0)
    }

    /// (1/R)∂F_C/∂d = −2πP, positive for an attractive force that weakens with distance.
    pub fn gradient_over_r(&self, d: f64) -> Result<f64> {
        Ok(self.eval(d)?.1)
    }
}

/// Log-spaced separation grid spanning the required truth range.
pub fn truth_grid(points: usize) -> Vec<f64> {
    let (lo, hi) = REQUIRED_RANGE_M;
    let r = (hi / lo).ln();
    (0..points).map(|i| lo * (r * i as f64 / (points - 1) as f64).exp()).collect()
}

/// PFA truth curve for a plate pair at temperature T.
pub fn casimir_truth_curve(a: &Plate, b: &Plate, temperature_k: f64, zero: ZeroFrequency, d_grid_m: &[f64]) -> Result<CasimirCurve> {
    let (lo, hi) = REQUIRED_RANGE_M;
    let first = d_grid_m.first().copied().unwrap_or(f64::NAN);
    let last = d_grid_m.last().copied().unwrap_or(f64::NAN);
    if !(first <= lo * (1.0 + 1e-9) && last >= hi * (1.0 - 1e-9)) {
        return Err(Error::InvalidParameter(format!(
            "truth grid must cover [20, 2000] nm, got [{:.1}, {:.1}] nm",
            first * 1e9,
            last * 1e9
        )));
    }
    let calc = LifshitzCalculator::new(a, b, temperature_k, zero, first)?;
    CasimirCurve::from_lifshitz(&calc, d_grid_m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifshitz::{gradient_over_r, ideal_pressure_magnitude};

    #[test]
    fn ideal_power_law_integrates_exactly() {
        let d = truth_grid(40);
        let p: Vec<f64> = d.iter().map(|&x| -ideal_pressure_magnitude(x)).collect();
        let c = CasimirCurve::from_pressures(&d, &p).unwrap();
        for &x in &[25e-9, 100e-9, 733e-9, 1900e-9] {
            let (f, g) = c.eval(x).unwrap();
            // F/R = 2π∫P = −2π·P(d)·d/3 for P ∝ d⁻⁴
            let want_f = -2.0 * PI * ideal_pressure_magnitude(x) * x / 3.0;
            assert!(((f - want_f) / want_f).abs() < 1e-5, "{f} {want_f}");
            assert!(((g + gradient_over_r(-ideal_pressure_magnitude(x))) / g).abs() < 1e-6);
        }
        let g100 = c.gradient_over_r(100e-9).unwrap();
        assert!((g100 - 81.7).abs() < 0.1);
    }

    #[test]
    fn gradient_is_derivative_of_force() {
        let d = truth_grid(40);
        let p: Vec<f64> = d.iter().map(|&x| -ideal_pressure_magnitude(x) * (1.0 + x / 300e-9).recip()).collect();
        let c = CasimirCurve::from_pressures(&d, &p).unwrap();
        for &x in &[60e-9, 200e-9, 900e-9] {
            let h = x * 1e-4;
            let num = (c.force_over_r(x + h).unwrap() - c.force_over_r(x - h).unwrap()) / (2.0 * h);
            let g = c.gradient_over_r(x).unwrap();
            assert!(((num - g) / g).abs() < 1e-3, "{num} vs {g}");
        }
    }

    #[test]
    fn extrapolation_and_zero() {
        let d = truth_grid(20);
        let p: Vec<f64> = d.iter().map(|&x| -ideal_pressure_magnitude(x)).collect();
        let c = CasimirCurve::from_pressures(&d, &p).unwrap();
        assert!(matches!(c.eval(10e-9), Err(Error::Extrapolation { .. })));
        assert!(matches!(c.eval(3e-6), Err(Error::Extrapolation { .. })));
        let z = CasimirCurve::from_pressures(&d, &vec![0.0; d.len()]).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.eval(1e-3).unwrap(), (0.0, 0.0));
        let bad: Vec<f64> = p.iter().enumerate().map(|(i, &v)| if i == 3 { 1.0 } else { v }).collect();
        assert!(CasimirCurve::from_pressures(&d, &bad).is_err());
    }

    #[test]
    fn grid_must_cover_required_range() {
        let vac = Plate::HalfSpace(crate::dielectric::DielectricModel::vacuum());
        let short: Vec<f64> = truth_grid(10).into_iter().map(|d| d * 2.0).collect();
        assert!(casimir_truth_curve(&vac, &vac, 300.0, ZeroFrequency::Drude, &short).is_err());
        let c = casimir_truth_curve(&vac, &vac, 300.0, ZeroFrequency::Drude, &truth_grid(10)).unwrap();
        assert!(c.is_zero());
    }
}
