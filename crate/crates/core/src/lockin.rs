//! Software lock-in amplifiers, RC filter cascades, the V₀ compensation loop and the
//! V_AC set-point controller.
//!
//! Amplitude convention: an input A·cos(ωt + φ) demodulates to I = A, Q = 0.
//! Instrument displays in RMS units read A/√2.

use crate::error::{Error, Result};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Divergence threshold of the compensation loop.
pub const V_DC_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockinConfig {
    pub reference_omega: f64,
    pub phase: f64,
    pub rc_time: f64,
    pub poles: usize,
}

impl LockinConfig {
    pub fn new(reference_omega: f64, phase: f64, rc_time: f64, poles: usize) -> Result<Self> {
        if !(rc_time > 0.0) || poles == 0 || !(reference_omega >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lock-in needs rc_time > 0, poles >= 1, omega >= 0 (got {rc_time}, {poles}, {reference_omega})"
            )));
        }
        Ok(Self { reference_omega, phase, rc_time, poles })
    }

    /// 24 dB/octave, 1 s time constant.
    pub fn standard(reference_omega: f64) -> Self {
        Self { reference_omega, phase: 0.0, rc_time: 1.0, poles: 4 }
    }

    /// Equivalent noise bandwidth (Hz) of the cascade: (1/4τ)·(2n−3)!!/(2n−2)!!.
    pub fn enbw(&self) -> f64 {
        let mut ratio = 1.0;
        for k in 1..self.poles {
            ratio *= (2 * k - 1) as f64 / (2 * k) as f64;
        }
        ratio / (4.0 * self.rc_time)
    }

    /// Standard deviation of I (or Q), amplitude convention, for white input noise of
    /// one-sided density `density` (V/√Hz).
    pub fn output_noise(&self, density: f64) -> f64 {
        density * (2.0 * self.enbw()).sqrt()
    }

    /// |H| of the cascade at a frequency offset (Hz) from the reference.
    pub fn magnitude(&self, offset_hz: f64) -> f64 {
        let x = 2.0 * PI * offset_hz * self.rc_time;
        (1.0 + x * x).powf(-(self.poles as f64) / 2.0)
    }

    /// Analytic step response of the cascade at time t.
    pub fn step_response(&self, t: f64) -> f64 {
        let u = t / self.rc_time;
        let mut term = 1.0;
        let mut s = 1.0;
        for k in 1..self.poles {
            term *= u / k as f64;
            s += term;
        }
        1.0 - (-u).exp() * s
    }

    /// Time for the step response to come within `tol` of its final value.
    pub fn settling_time(&self, tol: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 100.0 * self.rc_time * self.poles as f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 1.0 - self.step_response(mid) > tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Data length required before the batch `demodulate` accepts a record.
    pub fn required_duration(&self) -> f64 {
        10.0 * self.rc_time * self.poles as f64
    }

    /// Largest stable integrator loop gain λ (1/s) around this filter: λ_max = ω_c/|H(ω_c)|
    /// with n·atan(ω_cτ) = π/2.
    pub fn loop_gain_bound(&self) -> f64 {
        let n = self.poles as f64;
        let wc = (PI / (2.0 * n)).tan() / self.rc_time;
        wc * (1.0 + (wc * self.rc_time).powi(2)).powf(n / 2.0)
    }
}

pub fn to_rms(amplitude: f64) -> f64 {
    amplitude * FRAC_1_SQRT_2
}

/// Cascade of identical discrete single-pole RC stages.
#[derive(Debug, Clone)]
pub struct RcCascade {
    a: f64,
    state: Vec<f64>,
}

impl RcCascade {
    pub fn new(rc_time: f64, poles: usize, dt: f64) -> Self {
        Self { a: 1.0 - (-dt / rc_time).exp(), state: vec![0.0; poles] }
    }

    #[inline]
    pub fn push(&mut self, x: f64) -> f64 {
        let mut v = x;
        for s in self.state.iter_mut() {
            *s += self.a * (v - *s);
            v = *s;
        }
        v
    }

    pub fn output(&self) -> f64 {
        *self.state.last().unwrap()
    }

    pub fn reset(&mut self, value: f64) {
        self.state.iter_mut().for_each(|s| *s = value);
    }
}

/// Stateful I/Q demodulator at one reference.
#[derive(Debug, Clone)]
pub struct Demodulator {
    pub cfg: LockinConfig,
    i: RcCascade,
    q: RcCascade,
}

impl Demodulator {
    pub fn new(cfg: LockinConfig, sample_rate: f64) -> Self {
        let dt = 1.0 / sample_rate;
        Self { cfg, i: RcCascade::new(cfg.rc_time, cfg.poles, dt), q: RcCascade::new(cfg.rc_time, cfg.poles, dt) }
    }

    /// Push one sample taken at time t.
    pub fn push(&mut self, x: f64, t: f64) -> (f64, f64) {
        let (s, c) = (self.cfg.reference_omega * t + self.cfg.phase).sin_cos();
        self.push_with_reference(x, c, s)
    }

    /// Push with a precomputed reference cos(ωt + φ), sin(ωt + φ).
    #[inline]
    pub fn push_with_reference(&mut self, x: f64, cos_ref: f64, sin_ref: f64) -> (f64, f64) {
        (self.i.push(2.0 * x * cos_ref), self.q.push(2.0 * x * sin_ref))
    }

    pub fn output(&self) -> (f64, f64) {
        (self.i.output(), self.q.output())
    }
}

/// Demodulates a whole record sampled from t = 0 and returns the final (I, Q).
pub fn demodulate(samples: &[f64], sample_rate: f64, cfg: &LockinConfig) -> Result<(f64, f64)> {
    let duration = samples.len() as f64 / sample_rate;
    if duration < cfg.required_duration() {
        return Err(Error::InsufficientData(format!(
            "{duration:.3} s of data, lock-in needs {:.3} s to settle",
            cfg.required_duration()
        )));
    }
    let mut d = Demodulator::new(*cfg, sample_rate);
    for (k, &x) in samples.iter().enumerate() {
        d.push(x, k as f64 / sample_rate);
    }
    Ok(d.output())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackState {
    pub v_dc: f64,
    /// Integrator gain g (1/s per volt of S_ω1).
    pub integrator_gain: f64,
    /// Sign of ∂S_ω1/∂V_DC; negative for the force-gradient readout.
    pub loop_sign: f64,
    pub v_ac: f64,
    /// S_2ω1 target, amplitude convention.
    pub s2w1_setpoint: f64,
    pub v_ac_min: f64,
    pub v_ac_max: f64,
}

impl FeedbackState {
    pub fn new(integrator_gain: f64, s2w1_setpoint: f64) -> Result<Self> {
        if !(integrator_gain > 0.0) || !(s2w1_setpoint > 0.0) {
            return Err(Error::InvalidParameter("feedback gain and set point must be > 0".into()));
        }
        Ok(Self {
            v_dc: 0.0,
            integrator_gain,
            loop_sign: -1.0,
            v_ac: 0.0,
            s2w1_setpoint,
            v_ac_min: 1e-3,
            v_ac_max: 10.0,
        })
    }
}

/// Pure-integral update V_DC ← V_DC − g·sign·S_ω1·dt.
pub fn v0_feedback_step(s_w1_i: f64, state: &mut FeedbackState, dt: f64) -> Result<f64> {
    state.v_dc -= state.integrator_gain * state.loop_sign * s_w1_i * dt;
    if !state.v_dc.is_finite() || state.v_dc.abs() > V_DC_LIMIT {
        return Err(Error::LoopSign { v_dc: state.v_dc });
    }
    Ok(state.v_dc)
}

/// V_AC = √(2·setpoint/α_est), clamped to [v_ac_min, v_ac_max]; non-positive α_est gives v_ac_max.
pub fn vac_setpoint_step(alpha_est: f64, state: &mut FeedbackState) -> f64 {
    let v = if alpha_est > 0.0 { (2.0 * state.s2w1_setpoint / alpha_est).sqrt() } else { f64::INFINITY };
    state.v_ac = v.clamp(state.v_ac_min, state.v_ac_max);
    state.v_ac
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    const W1: f64 = 2.0 * PI * 72.2;
    const W2: f64 = 2.0 * PI * 119.0;

    #[test]
    fn convention_check() {
        let fs = 5000.0;
        let cfg = LockinConfig::standard(2.0 * W1);
        let x: Vec<f64> = (0..(fs * 45.0) as usize).map(|k| 3e-3 * (2.0 * W1 * k as f64 / fs).cos()).collect();
        let (i, q) = demodulate(&x, fs, &cfg).unwrap();
        assert_relative_eq!(i, 3e-3, max_relative = 1e-4);
        assert!(q.abs() < 1e-7);
    }

    #[test]
    fn off_reference_rejection() {
        let fs = 5000.0;
        let cfg = LockinConfig::standard(2.0 * W1);
        let x: Vec<f64> = (0..(fs * 45.0) as usize).map(|k| (W2 * k as f64 / fs).cos()).collect();
        let (i, q) = demodulate(&x, fs, &cfg).unwrap();
        assert!(i.hypot(q) < 1e-3);
        assert!(cfg.magnitude(2.0 * 72.2 - 119.0) < 1e-3);
    }

    #[test]
    fn too_short_record_is_rejected() {
        let cfg = LockinConfig::standard(W1);
        assert!(matches!(demodulate(&[0.0; 1000], 1000.0, &cfg), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn enbw_values() {
        assert_relative_eq!(LockinConfig::new(W1, 0.0, 1.0, 1).unwrap().enbw(), 0.25);
        assert_relative_eq!(LockinConfig::standard(W1).enbw(), 5.0 / 64.0);
    }

    #[test]
    fn output_noise_matches_enbw() {
        let fs: f64 = 2000.0;
        let density = 107.3e-6;
        let cfg = LockinConfig::standard(2.0 * W1);
        let sigma = density * (fs / 2.0).sqrt();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = Normal::new(0.0, sigma).unwrap();
        let mut d = Demodulator::new(cfg, fs);
        let mut acc = Vec::new();
        for k in 0..(fs * 1500.0) as usize {
            let (i, _) = d.push(n.sample(&mut rng), k as f64 / fs);
            if k as f64 > fs * 20.0 && k % 200 == 0 {
                acc.push(i);
            }
        }
        let m = acc.iter().sum::<f64>() / acc.len() as f64;
        let sd = (acc.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (acc.len() - 1) as f64).sqrt();
        let rms_units = to_rms(sd);
        assert!((rms_units - 30e-6).abs() < 0.2 * 30e-6, "{rms_units}");
        assert_relative_eq!(to_rms(cfg.output_noise(density)), 30e-6, max_relative = 1e-3);
    }

    #[test]
    fn cascade_step_matches_analytic() {
        let cfg = LockinConfig::standard(0.0);
        let fs = 10_000.0;
        let mut c = RcCascade::new(cfg.rc_time, cfg.poles, 1.0 / fs);
        for k in 1..=(fs * 12.0) as usize {
            let y = c.push(1.0);
            if k % 10_000 == 0 {
                let t = k as f64 / fs;
                assert!((y - cfg.step_response(t)).abs() < 1e-3, "t={t}");
            }
        }
        // 1 % settling of four cascaded poles takes ≈ 10 RC
        let ts = cfg.settling_time(0.01);
        assert!((ts - 10.05).abs() < 0.05, "{ts}");
        assert!(LockinConfig::new(0.0, 0.0, 1.0, 2).unwrap().settling_time(0.01) < 7.0);
    }

    #[test]
    fn rolloff_is_24_db_per_octave() {
        let cfg = LockinConfig::standard(0.0);
        let db = 20.0 * (cfg.magnitude(200.0) / cfg.magnitude(100.0)).log10();
        assert!((db + 24.08).abs() < 0.01, "{db}");
    }

    #[test]
    fn linearity() {
        let fs = 4000.0;
        let cfg = LockinConfig::new(W2, 0.0, 0.2, 4).unwrap();
        let a: Vec<f64> = (0..(fs * 9.0) as usize).map(|k| 1e-3 * (W2 * k as f64 / fs + 0.3).cos()).collect();
        let b: Vec<f64> = (0..a.len()).map(|k| 2e-4 * (W1 * k as f64 / fs).sin() + 5e-4).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let scaled: Vec<f64> = a.iter().map(|x| 3.7 * x).collect();
        let (ia, qa) = demodulate(&a, fs, &cfg).unwrap();
        let (ib, qb) = demodulate(&b, fs, &cfg).unwrap();
        let (is, qs) = demodulate(&sum, fs, &cfg).unwrap();
        let (ic, qc) = demodulate(&scaled, fs, &cfg).unwrap();
        assert!((is - ia - ib).abs() < 1e-6 * ia.abs() && (qs - qa - qb).abs() < 1e-6 * qa.abs().max(1e-9));
        assert_relative_eq!(ic, 3.7 * ia, max_relative = 1e-6);
        assert_relative_eq!(qc, 3.7 * qa, max_relative = 1e-6);
        assert_relative_eq!(ia.hypot(qa), 1e-3, max_relative = 1e-3);
    }

    #[test]
    fn loop_gain_bound_four_poles() {
        let cfg = LockinConfig::standard(W1);
        assert_relative_eq!(cfg.loop_gain_bound(), 0.5685, max_relative = 1e-3);
    }

    #[test]
    fn feedback_loop_converges_and_detects_wrong_sign() {
        // plant: S_ω1 = −2αV_AC(V₀ + V_DC) seen through the filter
        let fs = 1000.0;
        let dt = 1.0 / fs;
        let cfg = LockinConfig::new(W1, 0.0, 0.03, 4).unwrap();
        let (alpha, v_ac, v0) = (0.9565, 0.0915, -0.105);
        let gain = 5.0 / (2.0 * alpha * v_ac);
        assert!(5.0 < cfg.loop_gain_bound());
        let mut st = FeedbackState::new(gain, 4e-3).unwrap();
        let mut f = RcCascade::new(cfg.rc_time, cfg.poles, dt);
        let mut peak_late = 0.0f64;
        for k in 0..(fs * 10.0) as usize {
            let s = f.push(-2.0 * alpha * v_ac * (v0 + st.v_dc));
            v0_feedback_step(s, &mut st, dt).unwrap();
            if k as f64 > 2.0 * fs {
                peak_late = peak_late.max((v0 + st.v_dc).abs());
            }
        }
        assert!(peak_late < 0.01 * v0.abs(), "{peak_late}");
        assert!((v0 + st.v_dc).abs() < 1e-6);
        let mut bad = FeedbackState { loop_sign: 1.0, v_dc: 0.0, ..st };
        let mut f = RcCascade::new(cfg.rc_time, cfg.poles, dt);
        let err = (0..(fs * 100.0) as usize).try_for_each(|_| {
            let s = f.push(-2.0 * alpha * v_ac * (v0 + bad.v_dc));
            v0_feedback_step(s, &mut bad, dt).map(|_| ())
        });
        assert!(matches!(err, Err(Error::LoopSign { .. })));
    }

    #[test]
    fn vac_set_point() {
        let mut st = FeedbackState::new(1.0, 4e-3).unwrap();
        let alpha = 191.3e-9 / 200e-9;
        assert_relative_eq!(alpha, 0.9565, max_relative = 1e-4);
        let v = vac_setpoint_step(alpha, &mut st);
        assert_relative_eq!(v, 0.0915, max_relative = 1e-3);
        let v2 = vac_setpoint_step(2.0 * alpha, &mut st);
        assert_relative_eq!(v / v2, 2f64.sqrt(), max_relative = 1e-12);
        assert_eq!(vac_setpoint_step(0.0, &mut st), st.v_ac_max);
        assert_eq!(vac_setpoint_step(1e12, &mut st), st.v_ac_min);
    }
}
