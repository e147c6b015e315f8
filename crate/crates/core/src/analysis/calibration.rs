use super::DemodRecord;
use crate::error::{Error, Result};
use nalgebra::{Matrix2, Vector2};

/// α = 2|S_2ω1|/V_AC² and its standard error.
pub fn alpha_of(rec: &DemodRecord) -> Result<(f64, f64)> {
    if !(rec.v_ac > 0.0) {
        return Err(Error::Domain(format!("alpha needs V_AC > 0, got {}", rec.v_ac)));
    }
    let v2 = rec.v_ac * rec.v_ac;
    Ok((2.0 * rec.s_2w1.abs() / v2, 2.0 * rec.noise_ac / v2))
}

/// α with the bending term removed using the simultaneously measured S_4ω1:
/// S_2ω1 − 4S_4ω1 is the first-order electrostatic amplitude.
pub fn alpha_of_bending_corrected(rec: &DemodRecord) -> Result<(f64, f64)> {
    if !(rec.v_ac > 0.0) {
        return Err(Error::Domain(format!("alpha needs V_AC > 0, got {}", rec.v_ac)));
    }
    let v2 = rec.v_ac * rec.v_ac;
    let s = rec.s_2w1 - 4.0 * rec.s_4w1;
    Ok((2.0 * s.abs() / v2, 2.0 * rec.noise_ac * 17f64.sqrt() / v2))
}

/// Result of the α = κ/(d₀ − d_pz) fit (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationFit {
    pub d0: f64,
    pub d0_err: f64,
    pub kappa: f64,
    pub kappa_err: f64,
    pub chi2_reduced: f64,
    pub iterations: usize,
}

/// Weighted Levenberg–Marquardt fit of α = κ/(d₀ − d_pz) to (d_pz, α, σ_α) triples.
pub fn fit_calibration(points: &[(f64, f64, f64)]) -> Result<CalibrationFit> {
    if points.len() < 5 {
        return Err(Error::InsufficientData(format!("calibration fit needs >= 5 records, got {}", points.len())));
    }
    if points.iter().any(|p| !(p.2 > 0.0) || !p.1.is_finite()) {
        return Err(Error::InvalidParameter("calibration points need finite α and σ_α > 0".into()));
    }
    let (amin, amax) = points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    if !(amin > 0.0) || amax / amin < 3.0 {
        return Err(Error::InsufficientData("calibration records must span a factor >= 3 in α".into()));
    }
    // work in nm and nm/V
    let pts: Vec<(f64, f64, f64)> = points.iter().map(|&(x, a, s)| (x * 1e9, a, s)).collect();
    let xmax = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let lo = pts.iter().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
    let hi = pts.iter().max_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
    let mut kappa = if (lo.1 - hi.1).abs() > 0.0 {
        let d0 = (lo.1 * lo.0 - hi.1 * hi.0) / (lo.1 - hi.1);
        lo.1 * (d0 - lo.0)
    } else {
        f64::NAN
    };
    if !(kappa > 0.0) {
        kappa = hi.1 * (xmax - lo.0).max(1.0);
    }
    let mut p = Vector2::new(xmax + kappa / hi.1, kappa);

    let chi2 = |p: &Vector2<f64>| -> f64 {
        pts.iter().map(|&(x, a, s)| ((a - p[1] / (p[0] - x)) / s).powi(2)).sum()
    };
    let normal = |p: &Vector2<f64>| -> (Matrix2<f64>, Vector2<f64>) {
        let mut jtj = Matrix2::zeros();
        let mut jtr = Vector2::zeros();
        for &(x, a, s) in &pts {
            let u = p[0] - x;
            let j = Vector2::new(-p[1] / (u * u), 1.0 / u) / s;
            let r = (a - p[1] / u) / s;
            jtj += j * j.transpose();
            jtr += j * r;
        }
        (jtj, jtr)
    };

    let mut lambda = 1e-3;
    let mut c = chi2(&p);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < 500 {
        iterations += 1;
        let (jtj, jtr) = normal(&p);
        let mut a = jtj;
        a[(0, 0)] *= 1.0 + lambda;
        a[(1, 1)] *= 1.0 + lambda;
        let Some(step) = a.lu().solve(&jtr) else {
            return Err(Error::Fit("singular normal matrix in calibration fit".into()));
        };
        let trial = p + step;
        let small = step[0].abs() <= 1e-12 * trial[0].abs() && step[1].abs() <= 1e-12 * trial[1].abs();
        if trial[0] > xmax && trial[1] > 0.0 {
            let ct = chi2(&trial);
            if ct <= c {
                p = trial;
                c = ct;
                lambda = (lambda * 0.1).max(1e-12);
                if small {
                    converged = true;
                    break;
                }
                continue;
            }
        }
        if small {
            converged = true;
            break;
        }
        lambda *= 10.0;
        if lambda > 1e16 {
            break;
        }
    }
    if !converged {
        return Err(Error::Fit(format!("calibration fit did not converge after {iterations} iterations")));
    }
    if p[0] <= xmax {
        return Err(Error::Fit("fitted d0 does not exceed the largest piezo extension".into()));
    }
    let (jtj, _) = normal(&p);
    let cov = jtj.try_inverse().ok_or_else(|| Error::Fit("singular covariance".into()))?;
    let dof = (pts.len() - 2) as f64;
    Ok(CalibrationFit {
        d0: p[0] * 1e-9,
        d0_err: cov[(0, 0)].sqrt() * 1e-9,
        kappa: p[1] * 1e-9,
        kappa_err: cov[(1, 1)].sqrt() * 1e-9,
        chi2_reduced: c / dof,
        iterations,
    })
}

/// α from every record with V_AC > 0, then the calibration fit.
pub fn fit_records(records: &[DemodRecord]) -> Result<CalibrationFit> {
    let pts: Vec<(f64, f64, f64)> = records
        .iter()
        .filter(|r| r.v_ac > 0.0)
        .map(|r| alpha_of(r).map(|(a, s)| (r.d_pz, a, s)))
        .collect::<Result<_>>()?;
    fit_calibration(&pts)
}
