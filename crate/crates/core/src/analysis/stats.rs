use crate::error::{Error, Result};
use crate::numeric::brent_minimize;
use statrs::distribution::{ContinuousCDF, Normal};

/// Second-order (or other `order`) Savitzky–Golay smoothing; near the ends the window
/// is truncated to the available points.
pub fn smooth_trend(series: &[f64], window: usize, order: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if window % 2 == 0 || window == 0 {
        return Err(Error::InvalidParameter(format!("smoothing window must be odd, got {window}")));
    }
    if window > n {
        return Err(Error::InsufficientData(format!("window {window} longer than series ({n})")));
    }
    if order + 1 > window {
        return Err(Error::InvalidParameter("polynomial order must be below the window length".into()));
    }
    let half = window / 2;
    let p = order + 1;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        let mut ata = nalgebra::DMatrix::<f64>::zeros(p, p);
        let mut atb = nalgebra::DVector::<f64>::zeros(p);
        for j in lo..=hi {
            let x = j as f64 - i as f64;
            let mut pows = vec![1.0; p];
            for k in 1..p {
                pows[k] = pows[k - 1] * x;
            }
            for a in 0..p {
                atb[a] += pows[a] * series[j];
                for b in 0..p {
                    ata[(a, b)] += pows[a] * pows[b];
                }
            }
        }
        let coef = ata
            .lu()
            .solve(&atb)
            .ok_or_else(|| Error::FitDegenerate("singular smoothing system".into()))?;
        out.push(coef[0]);
    }
    Ok(out)
}

/// Weight of the centre point in a quadratic Savitzky–Golay window of half-width m;
/// this is also the variance-reduction factor for white noise.
pub fn savgol_center_weight(m: usize) -> f64 {
    let m = m as f64;
    3.0 * (3.0 * m * m + 3.0 * m - 1.0) / ((2.0 * m - 1.0) * (2.0 * m + 1.0) * (2.0 * m + 3.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
    /// σ of a maximum-likelihood Gaussian fitted to the binned residuals.
    pub gaussian_std: f64,
}

/// Residuals series − trend, summarized by sample statistics and a binned Gaussian fit.
pub fn residual_stats(series: &[f64], trend: &[f64]) -> Result<ResidualStats> {
    if series.len() != trend.len() {
        return Err(Error::InvalidParameter("series and trend lengths differ".into()));
    }
    if series.len() < 30 {
        return Err(Error::InsufficientData(format!("residual statistics need >= 30 points, got {}", series.len())));
    }
    let r: Vec<f64> = series.iter().zip(trend).map(|(s, t)| s - t).collect();
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    let std = (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(ResidualStats { n: r.len(), mean, std, gaussian_std: gaussian_fit_sigma(&r, mean, std) })
}

/// Binned maximum-likelihood σ of a Gaussian centred at `mean`; `guess` sets the histogram range.
pub fn gaussian_fit_sigma(values: &[f64], mean: f64, guess: f64) -> f64 {
    if !(guess > 0.0) {
        return 0.0;
    }
    let bins = ((values.len() as f64).sqrt().ceil() as usize).clamp(5, 60);
    let (lo, hi) = (mean - 4.0 * guess, mean + 4.0 * guess);
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0.0; bins + 2];
    for &v in values {
        let k = if v < lo { 0 } else if v >= hi { bins + 1 } else { 1 + ((v - lo) / w) as usize };
        counts[k.min(bins + 1)] += 1.0;
    }
    let nll = |ln_sigma: f64| -> f64 {
        let Ok(g) = Normal::new(mean, ln_sigma.exp()) else { return f64::INFINITY };
        let mut s = 0.0;
        for (k, &c) in counts.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let p = if k == 0 {
                g.cdf(lo)
            } else if k == bins + 1 {
                g.sf(hi)
            } else {
                let a = lo + (k - 1) as f64 * w;
                g.cdf(a + w) - g.cdf(a)
            };
            s -= c * p.max(1e-300).ln();
        }
        s
    };
    let (x, _) = brent_minimize(nll, (guess / 5.0).ln(), (guess * 5.0).ln(), 1e-8, 200);
    x.exp()
}
