use super::{CalibrationFit, DemodRecord};
use crate::error::{Error, Result};
use crate::units::eps0_pi;
use std::f64::consts::FRAC_1_SQRT_2;

/// (1/R)∂F/∂d = −(ε₀π/κ)·S_ω2^I/Δd.
pub fn total_gradient(rec: &DemodRecord, fit: &CalibrationFit, delta_d: f64) -> f64 {
    -eps0_pi() / fit.kappa * rec.s_w2_i / delta_d
}

/// (1/R)∂F_E/∂d = −(ε₀π/κ)·S_2ω1/(d₀ − d_pz).
pub fn electrostatic_gradient(rec: &DemodRecord, fit: &CalibrationFit) -> f64 {
    -eps0_pi() / fit.kappa * rec.s_2w1 / (fit.d0 - rec.d_pz)
}

/// (1/R)∂F_C/∂d = (ε₀π/κ)·[S_2ω1/(d₀ − d_pz) − S_ω2^I/Δd].
pub fn casimir_gradient(rec: &DemodRecord, fit: &CalibrationFit, delta_d: f64) -> f64 {
    eps0_pi() / fit.kappa * (rec.s_2w1 / (fit.d0 - rec.d_pz) - rec.s_w2_i / delta_d)
}

/// RMS hydrodynamic force over radius, F_H/R = (ε₀π/κ)·|S_ω2^Q|/√2 (N/m).
pub fn hydro_force_over_r(rec: &DemodRecord, fit: &CalibrationFit) -> f64 {
    eps0_pi() / fit.kappa * rec.s_w2_q.abs() * FRAC_1_SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientKind {
    Total,
    Electrostatic,
    Casimir,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientPoint {
    pub d: f64,
    pub value: f64,
    pub sigma: f64,
}

/// Force gradient over R versus separation for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientCurve {
    pub run_id: usize,
    pub t_unix: f64,
    pub points: Vec<GradientPoint>,
}

impl GradientCurve {
    /// Points sorted by ascending d.
    pub fn sorted(&self) -> Vec<GradientPoint> {
        let mut p = self.points.clone();
        p.sort_by(|a, b| a.d.total_cmp(&b.d));
        p
    }

    pub fn nearest(&self, d: f64) -> Option<GradientPoint> {
        self.points.iter().copied().min_by(|a, b| (a.d - d).abs().total_cmp(&(b.d - d).abs()))
    }

    /// Log-log interpolation between the bracketing points (values must share a sign).
    pub fn interpolate_loglog(&self, d: f64) -> Result<f64> {
        let p = self.sorted();
        let i = p.partition_point(|q| q.d <= d);
        if p.last().is_some_and(|q| q.d == d) && p.len() >= 2 {
            return Ok(p[p.len() - 1].value);
        }
        if i == 0 || i == p.len() {
            return Err(Error::Extrapolation {
                d_nm: d * 1e9,
                lo_nm: p.first().map_or(f64::NAN, |q| q.d * 1e9),
                hi_nm: p.last().map_or(f64::NAN, |q| q.d * 1e9),
            });
        }
        let (a, b) = (p[i - 1], p[i]);
        if a.value * b.value <= 0.0 {
            let f = (d - a.d) / (b.d - a.d);
            return Ok(a.value + f * (b.value - a.value));
        }
        let f = (d / a.d).ln() / (b.d / a.d).ln();
        Ok(a.value.signum() * (a.value.abs().ln() + f * (b.value.abs() / a.value.abs()).ln()).exp())
    }
}

/// Builds a gradient curve at d = d₀ − d_pz; σ follows from the channel noise.
pub fn gradient_curve(records: &[DemodRecord], fit: &CalibrationFit, delta_d: f64, kind: GradientKind) -> GradientCurve {
    let scale = eps0_pi() / fit.kappa;
    let points = records
        .iter()
        .map(|r| {
            let d = fit.d0 - r.d_pz;
            let s_tot = scale * r.noise_ac / delta_d;
            let s_el = scale * r.noise_ac / d;
            let (value, sigma) = match kind {
                GradientKind::Total => (total_gradient(r, fit, delta_d), s_tot),
                GradientKind::Electrostatic => (electrostatic_gradient(r, fit), s_el),
                GradientKind::Casimir => (casimir_gradient(r, fit, delta_d), s_tot.hypot(s_el)),
            };
            GradientPoint { d, value, sigma }
        })
        .collect();
    GradientCurve {
        run_id: records.first().map_or(0, |r| r.run_id),
        t_unix: records.first().map_or(0.0, |r| r.t_unix),
        points,
    }
}

/// Spring-constant fit result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringFit {
    pub k_over_r: f64,
    pub k_over_r_err: f64,
    pub slope: f64,
    pub intercept: f64,
    pub chi2_reduced: f64,
    pub used: usize,
    pub rejected: usize,
    /// Largest relative size of the neglected bending term, 4|S_4ω1/S_2ω1|.
    pub bending_term_max: f64,
}

/// Weighted straight-line fit of y = V_AC·√(S_2ω1/S_4ω1) against d_pz; slope −2√((k/R)/(ε₀π)).
/// Records whose S_4ω1 disagrees in sign with S_2ω1 or lies below twice the noise are dropped.
pub fn spring_fit(records: &[DemodRecord]) -> Result<SpringFit> {
    let mut pts = Vec::new();
    let mut rejected = 0;
    let mut bending = 0.0f64;
    for r in records {
        let sigma = r.noise_ac;
        if !(r.v_ac > 0.0) || r.s_2w1 * r.s_4w1 <= 0.0 || r.s_4w1.abs() < 2.0 * sigma {
            rejected += 1;
            continue;
        }
        let y = r.v_ac * (r.s_2w1 / r.s_4w1).sqrt();
        let sy = 0.5 * y * ((sigma / r.s_2w1).powi(2) + (sigma / r.s_4w1).powi(2)).sqrt();
        bending = bending.max(4.0 * (r.s_4w1 / r.s_2w1).abs());
        pts.push((r.d_pz, y, sy.max(f64::MIN_POSITIVE)));
    }
    if pts.len() < 5 {
        return Err(Error::Fit(format!("spring fit needs >= 5 valid records, got {}", pts.len())));
    }
    // x in nm for conditioning
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, s) in &pts {
        let w = 1.0 / (s * s);
        let x = x * 1e9;
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    if !(det > 0.0) {
        return Err(Error::FitDegenerate("spring fit needs distinct d_pz values".into()));
    }
    let slope_nm = (sw * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let slope_err_nm = (sw / det).sqrt();
    let chi2: f64 = pts.iter().map(|&(x, y, s)| ((y - intercept - slope_nm * x * 1e9) / s).powi(2)).sum();
    let chi2_reduced = chi2 / (pts.len() - 2) as f64;
    let slope = slope_nm * 1e9;
    let k_over_r = eps0_pi() * slope * slope / 4.0;
    // uncertainty with the reduced χ² set to one
    let k_over_r_err = eps0_pi() * slope.abs() / 2.0 * slope_err_nm * 1e9 * chi2_reduced.sqrt();
    Ok(SpringFit { k_over_r, k_over_r_err, slope, intercept, chi2_reduced, used: pts.len(), rejected, bending_term_max: bending })
}

/// γ = κ·(k/R)/(ε₀π) with uncorrelated relative errors added in quadrature.
pub fn gamma_from(kappa: f64, kappa_err: f64, k_over_r: f64, k_over_r_err: f64) -> (f64, f64) {
    let g = kappa * k_over_r / eps0_pi();
    (g, g * (kappa_err / kappa).hypot(k_over_r_err / k_over_r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferencePoint {
    pub d: f64,
    pub measured: f64,
    pub predicted: f64,
    pub ratio: f64,
    pub sigma: f64,
}

/// Measured (high − low) total gradient against the electrostatic prediction, evaluated at
/// the high-drive separations inside the overlap (low-drive curves resampled log-log).
pub fn gradient_difference_check(
    high_total: &GradientCurve,
    low_total: &GradientCurve,
    high_elec: &GradientCurve,
    low_elec: &GradientCurve,
) -> Result<Vec<DifferencePoint>> {
    let mut out = Vec::new();
    for (p, pe) in high_total.points.iter().zip(&high_elec.points) {
        let (Ok(lt), Ok(le)) = (low_total.interpolate_loglog(p.d), low_elec.interpolate_loglog(p.d)) else {
            continue;
        };
        let measured = p.value - lt;
        let predicted = pe.value - le;
        let sigma = p.sigma.hypot(low_total.nearest(p.d).map_or(0.0, |q| q.sigma)) / predicted.abs();
        out.push(DifferencePoint { d: p.d, measured, predicted, ratio: measured / predicted, sigma });
    }
    if out.is_empty() {
        return Err(Error::NoOverlap("high- and low-drive curves share no separation range".into()));
    }
    Ok(out)
}

/// Inverse-variance weighted mean of the ratios and its standard error.
pub fn mean_ratio(points: &[DifferencePoint]) -> (f64, f64) {
    let (mut sw, mut s) = (0.0, 0.0);
    for p in points {
        let w = 1.0 / (p.sigma * p.sigma).max(1e-300);
        sw += w;
        s += w * p.ratio;
    }
    (s / sw, sw.sqrt().recip())
}
