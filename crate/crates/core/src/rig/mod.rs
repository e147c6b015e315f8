//! Time-domain photodetector signal synthesis from exact instantaneous forces.
//!
//! Gap: g(t) = d₀ − d_pz − Δd·cos(ω₂t) + x(t). Forces are positive when they push the
//! sphere away from the plate, so attraction is negative and x = F/k shrinks the gap.

mod curve;

pub use curve::{casimir_truth_curve, truth_grid, CasimirCurve, REQUIRED_RANGE_M};

use crate::error::{Error, Result};
use crate::forces::{slip_factor, ExactSphereCorrection, GasProperties};
use crate::units::EPS0;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;
use std::sync::Arc;

/// Detector noise density giving 30 µV RMS in S_2ω1 behind a 1 s, 4-pole filter.
pub const NOMINAL_NOISE_DENSITY: f64 = 30e-6 / 0.279_508_497_187_473_7;

/// Hidden truth of the simulated instrument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthParams {
    pub d0_m: f64,
    pub v0: f64,
    /// Linear V₀ drift per run.
    pub v0_drift_per_run: f64,
    pub k_over_r: f64,
    pub gamma: f64,
    pub radius_m: f64,
    /// One-sided white detector noise density, V/√Hz.
    pub detector_noise: f64,
    /// Slow thermal drift of d₀ per run, m.
    pub d0_drift_per_run: f64,
}

impl TruthParams {
    pub fn reference() -> Self {
        Self {
            d0_m: 1200e-9,
            v0: -0.105,
            v0_drift_per_run: 0.0,
            k_over_r: 11.12e3,
            gamma: 7.6476e7,
            radius_m: 100e-6,
            detector_noise: NOMINAL_NOISE_DENSITY,
            d0_drift_per_run: 0.0,
        }
    }

    pub fn noiseless(mut self) -> Self {
        self.detector_noise = 0.0;
        self
    }

    pub fn k(&self) -> f64 {
        self.k_over_r * self.radius_m
    }

    /// κ = γε₀πR/k.
    pub fn kappa(&self) -> f64 {
        self.gamma * EPS0 * PI / self.k_over_r
    }

    /// α = κ/d at the unmodulated gap d.
    pub fn alpha(&self, gap_m: f64) -> f64 {
        self.kappa() / gap_m
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.d0_m, self.k_over_r, self.gamma, self.radius_m].iter().all(|v| *v > 0.0 && v.is_finite())
            && self.detector_noise >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("truth parameters out of range: {self:?}")))
        }
    }

    /// Truth seen by run `run` after drift.
    pub fn at_run(&self, run: usize) -> Self {
        let mut t = *self;
        t.d0_m += self.d0_drift_per_run * run as f64;
        t.v0 += self.v0_drift_per_run * run as f64;
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveState {
    pub d_pz: f64,
    pub delta_d: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub v_dc: f64,
    pub v_ac: f64,
}

impl DriveState {
    pub fn nominal(d_pz: f64) -> Self {
        Self { d_pz, delta_d: 3.85e-9, omega1: 2.0 * PI * 72.2, omega2: 2.0 * PI * 119.0, v_dc: 0.0, v_ac: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
        if !(self.omega1 > 0.0 && self.omega2 > 0.0) || close(self.omega1, self.omega2) || close(2.0 * self.omega1, self.omega2) {
            return Err(Error::InvalidParameter("drive frequencies must be positive and spectrally separable".into()));
        }
        if !(self.delta_d >= 0.0) || !(self.v_ac >= 0.0) {
            return Err(Error::InvalidParameter("Δd and V_AC must be >= 0".into()));
        }
        Ok(())
    }

    /// Highest frequency (rad/s) the lock-in chain looks at.
    pub fn max_harmonic_omega(&self) -> f64 {
        (4.0 * self.omega1).max(self.omega2)
    }

    /// Mixing products that appear in S(t) besides the measurement bins, rad/s.
    pub fn cross_terms(&self) -> Vec<f64> {
        let (w1, w2) = (self.omega1, self.omega2);
        vec![(w1 - w2).abs(), w1 + w2, (2.0 * w1 - w2).abs(), 2.0 * w1 + w2, 2.0 * w2, (4.0 * w1 - w2).abs()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsMode {
    QuasiStatic,
    HarmonicOscillator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CantileverDynamics {
    pub mode: DynamicsMode,
    pub f0_hz: f64,
    pub q: f64,
    /// Removes the deflection from the gap, reproducing the rigid-cantilever approximation.
    pub freeze_deflection: bool,
}

impl Default for CantileverDynamics {
    fn default() -> Self {
        Self { mode: DynamicsMode::QuasiStatic, f0_hz: 1.9e3, q: 75.0, freeze_deflection: false }
    }
}

impl CantileverDynamics {
    pub fn harmonic() -> Self {
        Self { mode: DynamicsMode::HarmonicOscillator, ..Self::default() }
    }

    pub fn validate(&self, drive: &DriveState) -> Result<()> {
        if !(self.f0_hz > 0.0 && self.q > 0.0) {
            return Err(Error::InvalidParameter("f0 and Q must be > 0".into()));
        }
        let f_drive = drive.omega1.max(drive.omega2) / (2.0 * PI);
        if self.mode == DynamicsMode::QuasiStatic && self.f0_hz <= 10.0 * f_drive {
            return Err(Error::InvalidParameter(format!(
                "quasi-static mode needs f0 > 10x the drive frequency ({} Hz vs {:.1} Hz)",
                self.f0_hz, f_drive
            )));
        }
        Ok(())
    }
}

/// Everything a rig instance needs besides the drive and the seed.
#[derive(Debug, Clone)]
pub struct RigConfig {
    pub truth: TruthParams,
    pub dynamics: CantileverDynamics,
    pub gas: GasProperties,
    pub sample_rate: f64,
    pub casimir: Arc<CasimirCurve>,
    /// Exact sphere capacitance in place of PFA electrostatics.
    pub exact_capacitance: Option<Arc<ExactSphereCorrection>>,
    /// Distance-independent artifact added to (1/R)∂F/∂d, N/m² (|value| ≤ 2).
    pub background_gradient: f64,
    /// Actual plate modulation is Δd·delta_d_scale while the analysis assumes Δd.
    pub delta_d_scale: f64,
}

impl RigConfig {
    pub fn new(truth: TruthParams, casimir: Arc<CasimirCurve>) -> Self {
        Self {
            truth,
            dynamics: CantileverDynamics::default(),
            gas: GasProperties::default(),
            sample_rate: 20e3,
            casimir,
            exact_capacitance: None,
            background_gradient: 0.0,
            delta_d_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.truth.validate()?;
        if !(self.sample_rate > 0.0) || !(self.delta_d_scale > 0.0) {
            return Err(Error::InvalidParameter("sample rate and Δd scale must be > 0".into()));
        }
        if self.background_gradient.abs() > 2.0 {
            return Err(Error::InvalidParameter("background gradient is bounded by 2 N/m²".into()));
        }
        Ok(())
    }

    pub fn check_drive(&self, drive: &DriveState) -> Result<()> {
        drive.validate()?;
        self.dynamics.validate(drive)?;
        let need = 20.0 * drive.max_harmonic_omega() / (2.0 * PI);
        if self.sample_rate < need {
            return Err(Error::InvalidParameter(format!(
                "sample rate {} Hz below 20x the highest harmonic ({need:.0} Hz)",
                self.sample_rate
            )));
        }
        Ok(())
    }
}

/// Reference phases at one sample instant.
#[derive(Debug, Clone, Copy)]
pub struct Phases {
    pub t: f64,
    pub c1: f64,
    pub s1: f64,
    pub c2: f64,
    pub s2: f64,
}

impl Phases {
    #[inline]
    pub fn at(t: f64, drive: &DriveState) -> Self {
        let (s1, c1) = (drive.omega1 * t).sin_cos();
        let (s2, c2) = (drive.omega2 * t).sin_cos();
        Self { t, c1, s1, c2, s2 }
    }
}

/// One rig instance: single owner, deterministic given its seed.
#[derive(Debug, Clone)]
pub struct Rig {
    cfg: RigConfig,
    n: u64,
    dt: f64,
    k: f64,
    sigma: f64,
    x: f64,
    x_lag1: f64,
    x_lag2: f64,
    velocity: f64,
    started: bool,
    rng: ChaCha8Rng,
}

impl Rig {
    pub fn new(cfg: RigConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let k = cfg.truth.k();
        let sigma = cfg.truth.detector_noise * (cfg.sample_rate / 2.0).sqrt();
        let dt = 1.0 / cfg.sample_rate;
        Ok(Self {
            cfg,
            n: 0,
            dt,
            k,
            sigma,
            x: 0.0,
            x_lag1: 0.0,
            x_lag2: 0.0,
            velocity: 0.0,
            started: false,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn config(&self) -> &RigConfig {
        &self.cfg
    }

    pub fn time(&self) -> f64 {
        self.n as f64 * self.dt
    }

    pub fn sample_index(&self) -> u64 {
        self.n
    }

    /// Current cantilever deflection, m.
    pub fn deflection(&self) -> f64 {
        self.x
    }

    /// Total force (N) and ∂F/∂g at gap g, applied voltage V + V₀ and gap rate.
    #[inline]
    fn force(&self, gap: f64, v_total: f64, gap_rate: f64) -> Result<(f64, f64)> {
        if !(gap > 0.0) {
            return Err(Error::Contact { gap_nm: gap * 1e9, t: self.time() });
        }
        let r = self.cfg.truth.radius_m;
        let mut c = EPS0 * PI * r * v_total * v_total;
        if let Some(ex) = &self.cfg.exact_capacitance {
            c *= ex.ratio(gap);
        }
        let inv = 1.0 / gap;
        let fe = -c * inv;
        let dfe = c * inv * inv;
        let (fc, dfc) = self.cfg.casimir.eval(gap)?;
        let gas = &self.cfg.gas;
        let fh = -6.0 * PI * gas.viscosity_pa_s * r * r * gap_rate * inv * slip_factor(gap, gas.slip_length_m);
        Ok((fe + r * fc + fh, dfe + r * dfc - fh * inv))
    }

    /// Quasi-static deflection x = F(g₀ + x)/k by Newton iteration from the previous x.
    /// With a history (x_{n−1}, x_{n−2}) the cantilever velocity in the damping term is the
    /// implicit second-order backward difference, which carries no phase lag.
    fn solve_static(&self, g0: f64, v_total: f64, plate_rate: f64, x_start: f64, history: Option<(f64, f64)>) -> Result<f64> {
        if self.cfg.dynamics.freeze_deflection {
            return Ok(self.force(g0, v_total, plate_rate)?.0 / self.k);
        }
        let gas = &self.cfg.gas;
        let r = self.cfg.truth.radius_m;
        let mut x = x_start;
        for _ in 0..8 {
            let gap = g0 + x;
            let (rate, drate) = match history {
                Some((x1, x2)) => (plate_rate + (3.0 * x - 4.0 * x1 + x2) / (2.0 * self.dt), 1.5 / self.dt),
                None => (plate_rate, 0.0),
            };
            let (f, mut df) = self.force(gap, v_total, rate)?;
            if drate > 0.0 && gap > 0.0 {
                df -= 6.0 * PI * gas.viscosity_pa_s * r * r / gap * slip_factor(gap, gas.slip_length_m) * drate;
            }
            let slope = self.k - df;
            if slope <= 0.0 {
                return Err(Error::SnapIn { gap_nm: gap * 1e9, discriminant: slope });
            }
            let step = (self.k * x - f) / slope;
            x -= step;
            if step.abs() <= 1e-19 + 1e-13 * x.abs() {
                return Ok(x);
            }
        }
        Ok(x)
    }

    /// Phases at the current sample instant.
    pub fn phases(&self, drive: &DriveState) -> Phases {
        Phases::at(self.time(), drive)
    }

    /// Produces the sample at the current instant and advances the clock.
    pub fn step(&mut self, drive: &DriveState) -> Result<f64> {
        let ph = self.phases(drive);
        self.step_at(drive, &ph)
    }

    /// As `step`, with phases precomputed by the caller for the current instant.
    pub fn step_at(&mut self, drive: &DriveState, ph: &Phases) -> Result<f64> {
        let truth = &self.cfg.truth;
        let dd = drive.delta_d * self.cfg.delta_d_scale;
        let v_total = drive.v_dc + drive.v_ac * ph.c1 + truth.v0;
        let g0 = truth.d0_m - drive.d_pz - dd * ph.c2;
        let plate_rate = dd * drive.omega2 * ph.s2;
        match self.cfg.dynamics.mode {
            DynamicsMode::QuasiStatic => {
                let history = (self.n >= 2).then_some((self.x_lag1, self.x_lag2));
                let x = self.solve_static(g0, v_total, plate_rate, self.x, history)?;
                self.x_lag2 = self.x_lag1;
                self.x_lag1 = x;
                self.x = x;
            }
            DynamicsMode::HarmonicOscillator => {
                if !self.started {
                    self.x = self.solve_static(g0, v_total, plate_rate, 0.0, None)?;
                    self.velocity = 0.0;
                } else {
                    self.advance_oscillator(drive)?;
                }
            }
        }
        self.started = true;
        let bg = -self.cfg.truth.gamma * self.cfg.truth.radius_m * self.cfg.background_gradient * dd * ph.c2 / self.k;
        let mut s = self.cfg.truth.gamma * self.x + bg;
        if self.sigma > 0.0 {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            s += self.sigma * z;
        }
        self.n += 1;
        Ok(s)
    }

    /// RK4 integration of m·ẍ = F − kx − cẋ from the previous sample instant to now.
    fn advance_oscillator(&mut self, drive: &DriveState) -> Result<()> {
        let w0 = 2.0 * PI * self.cfg.dynamics.f0_hz;
        let m = self.k / (w0 * w0);
        let damp = m * w0 / self.cfg.dynamics.q;
        let substeps = ((w0 * self.dt / 0.05).ceil() as usize).max(1);
        let h = self.dt / substeps as f64;
        let t_start = (self.n - 1) as f64 * self.dt;
        let truth = self.cfg.truth;
        let dd = drive.delta_d * self.cfg.delta_d_scale;
        let freeze = self.cfg.dynamics.freeze_deflection;
        let accel = |rig: &Self, t: f64, x: f64, v: f64| -> Result<f64> {
            let c1 = (drive.omega1 * t).cos();
            let (s2, c2) = (drive.omega2 * t).sin_cos();
            let vt = drive.v_dc + drive.v_ac * c1 + truth.v0;
            let mut gap = truth.d0_m - drive.d_pz - dd * c2;
            let mut rate = dd * drive.omega2 * s2;
            if !freeze {
                gap += x;
                rate += v;
            }
            let (f, _) = rig.force(gap, vt, rate)?;
            Ok((f - rig.k * x - damp * v) / m)
        };
        let (mut x, mut v) = (self.x, self.velocity);
        for i in 0..substeps {
            let t = t_start + i as f64 * h;
            let a1 = accel(self, t, x, v)?;
            let (x2, v2) = (x + 0.5 * h * v, v + 0.5 * h * a1);
            let a2 = accel(self, t + 0.5 * h, x2, v2)?;
            let (x3, v3) = (x + 0.5 * h * v2, v + 0.5 * h * a2);
            let a3 = accel(self, t + 0.5 * h, x3, v3)?;
            let (x4, v4) = (x + h * v3, v + h * a3);
            let a4 = accel(self, t + h, x4, v4)?;
            x += h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4);
            v += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        }
        self.x = x;
        self.velocity = v;
        Ok(())
    }
}

/// Samples S(t) for a fixed drive over `duration` seconds.
pub fn synthesize(cfg: &RigConfig, drive: &DriveState, duration: f64, seed: u64) -> Result<Vec<f64>> {
    cfg.check_drive(drive)?;
    let mut rig = Rig::new(cfg.clone(), seed)?;
    let n = (duration * cfg.sample_rate).round() as usize;
    (0..n).map(|_| rig.step(drive)).collect()
}

#[cfg(test)]
mod tests;
