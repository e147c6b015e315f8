use crate::dielectric::MaterialLibrary;
use crate::error::{Error, Result};
use crate::io::keyvalue::{KvDocument, KvSection};
use crate::lifshitz::{Plate, ZeroFrequency};
use crate::rig::{CantileverDynamics, DynamicsMode, TruthParams, NOMINAL_NOISE_DENSITY};
use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Normal,
    SpringConstant,
    HighVacComparison,
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Self::Normal),
            "spring_constant" => Ok(Self::SpringConstant),
            "high_vac_comparison" => Ok(Self::HighVacComparison),
            _ => Err(Error::Config(format!("unknown profile '{s}'"))),
        }
    }
}

/// Timing preset: `Fast` for smoke runs, `Paper` for the full-length protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Speed {
    Fast,
    Paper,
}

impl FromStr for Speed {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Self::Fast),
            "paper" => Ok(Self::Paper),
            _ => Err(Error::Config(format!("unknown speed profile '{s}' (fast|paper)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaterialPair {
    AuAu,
    AuIto,
    Custom { a: PlateSpec, b: PlateSpec },
}

impl FromStr for MaterialPair {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "au_au" => Ok(Self::AuAu),
            "au_ito" => Ok(Self::AuIto),
            _ => Err(Error::Config(format!("unknown material pair '{s}' (au_au|au_ito|custom)"))),
        }
    }
}

/// A plate by material names: half-space, or a film of given thickness on a substrate.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateSpec {
    pub material: String,
    pub film_nm: Option<f64>,
    pub substrate: Option<String>,
}

impl PlateSpec {
    pub fn half_space(m: &str) -> Self {
        Self { material: m.into(), film_nm: None, substrate: None }
    }

    pub fn resolve(&self, lib: &MaterialLibrary) -> Result<Plate> {
        let film = lib.get(&self.material)?.clone();
        match (self.film_nm, &self.substrate) {
            (Some(t), Some(sub)) => Ok(Plate::Film { film, thickness_m: t * 1e-9, substrate: lib.get(sub)?.clone() }),
            (None, None) => Ok(Plate::HalfSpace(film)),
            _ => Err(Error::Config("a film plate needs both a thickness and a substrate".into())),
        }
    }
}

impl MaterialPair {
    /// The two plates. ITO is a half-space; the 190 nm film on float glass is a custom pair.
    pub fn specs(&self) -> (PlateSpec, PlateSpec) {
        match self {
            Self::AuAu => (PlateSpec::half_space("au"), PlateSpec::half_space("au")),
            Self::AuIto => (PlateSpec::half_space("au"), PlateSpec::half_space("ito")),
            Self::Custom { a, b } => (a.clone(), b.clone()),
        }
    }

    pub fn plates(&self, lib: &MaterialLibrary) -> Result<(Plate, Plate)> {
        let (a, b) = self.specs();
        Ok((a.resolve(lib)?, b.resolve(lib)?))
    }

    pub fn name(&self) -> String {
        match self {
            Self::AuAu => "au_au".into(),
            Self::AuIto => "au_ito".into(),
            Self::Custom { a, b } => format!("{}_{}", a.material, b.material),
        }
    }
}

/// Measurement protocol of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub points: usize,
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub rc_s: f64,
    pub poles: usize,
    pub dwell_s: f64,
    /// Initial settling before the first set point, in RC units.
    pub settle_rc: f64,
    /// Averaging window at the end of each dwell (0 reads the instantaneous output).
    pub average_s: f64,
    pub sample_rate: f64,
    /// S_2ω1 set point, RMS volts.
    pub setpoint_rms: f64,
    /// Set point of high-drive sessions, RMS volts.
    pub high_setpoint_rms: f64,
    /// Smallest gap of high-drive spring-constant sessions.
    pub spring_d_min_m: f64,
    pub v_ac_min: f64,
    pub v_ac_max: f64,
    pub feedback_rc_s: f64,
    pub feedback_rate_hz: f64,
    /// Closed-loop rate λ of the V₀ integrator, 1/s.
    pub loop_rate: f64,
    pub delta_d_m: f64,
    pub f1_hz: f64,
    pub f2_hz: f64,
    pub phase_error_rad: f64,
    pub d0_guess_offset_m: f64,
    pub kappa_guess: f64,
}

impl Measurement {
    pub fn preset(speed: Speed) -> Self {
        let full = Self {
            points: 50,
            d_min_m: 50e-9,
            d_max_m: 1100e-9,
            rc_s: 1.0,
            poles: 4,
            dwell_s: 8.0,
            settle_rc: 20.0,
            average_s: 0.0,
            sample_rate: 20e3,
            setpoint_rms: 4e-3,
            high_setpoint_rms: 153e-3,
            spring_d_min_m: 150e-9,
            v_ac_min: 1e-3,
            v_ac_max: 10.0,
            feedback_rc_s: 0.03,
            feedback_rate_hz: 1000.0,
            loop_rate: 5.0,
            delta_d_m: 3.85e-9,
            f1_hz: 72.2,
            f2_hz: 119.0,
            phase_error_rad: 0.0,
            d0_guess_offset_m: 2e-9,
            kappa_guess: 190e-9,
        };
        match speed {
            Speed::Paper => full,
            Speed::Fast => Self { points: 8, rc_s: 0.2, dwell_s: 1.6, sample_rate: 6000.0, ..full },
        }
    }

    pub fn omega1(&self) -> f64 {
        2.0 * PI * self.f1_hz
    }

    pub fn omega2(&self) -> f64 {
        2.0 * PI * self.f2_hz
    }

    /// Geometric ladder of gap targets from d_max down to d_min.
    pub fn ladder(&self, d_min: f64) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.d_max_m];
        }
        let r = (self.d_max_m / d_min).ln();
        (0..n).map(|i| self.d_max_m * (-r * i as f64 / (n - 1) as f64).exp()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.d_min_m,
            self.rc_s,
            self.dwell_s,
            self.sample_rate,
            self.setpoint_rms,
            self.high_setpoint_rms,
            self.feedback_rc_s,
            self.feedback_rate_hz,
            self.loop_rate,
            self.f1_hz,
            self.f2_hz,
            self.kappa_guess,
            self.v_ac_max,
        ];
        if pos.iter().any(|v| !(*v > 0.0)) || self.points == 0 || self.poles == 0 {
            return Err(Error::Config("measurement parameters must be positive".into()));
        }
        if self.points < 5 {
            return Err(Error::Config(format!("points = {}: the calibration fit needs at least 5 set points", self.points)));
        }
        if !(self.d_max_m > self.d_min_m) || self.average_s < 0.0 || self.average_s > self.dwell_s {
            return Err(Error::Config("need d_max > d_min and 0 <= average_s <= dwell_s".into()));
        }
        Ok(())
    }
}

/// Rig options that are not truth parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RigOptions {
    pub dynamics: CantileverDynamics,
    pub slip_length_m: f64,
    pub viscosity_pa_s: f64,
    pub pressure_pa: f64,
    pub exact_capacitance: bool,
    pub background_gradient: f64,
    pub delta_d_scale: f64,
}

impl Default for RigOptions {
    fn default() -> Self {
        let gas = crate::forces::GasProperties::default();
        Self {
            dynamics: CantileverDynamics::default(),
            slip_length_m: 0.0,
            viscosity_pa_s: gas.viscosity_pa_s,
            pressure_pa: gas.pressure_pa,
            exact_capacitance: false,
            background_gradient: 0.0,
            delta_d_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub profile: Profile,
    pub speed: Speed,
    pub n_runs: usize,
    /// Independent run chains (each chain passes its d₀ estimate from run to run).
    pub chains: usize,
    pub material_pair: MaterialPair,
    pub temperature_k: f64,
    pub zero_frequency: ZeroFrequency,
    pub seed: u64,
    pub truth: TruthParams,
    pub measurement: Measurement,
    pub rig: RigOptions,
    pub material_file: Option<PathBuf>,
    pub plots: bool,
    /// Write the raw detector stream of run 0.
    pub raw_dump: bool,
    /// Savitzky–Golay window for the d₀ and κ trends (clipped to the run count).
    pub trend_window: usize,
}

impl CampaignConfig {
    pub fn new(profile: Profile, speed: Speed) -> Self {
        let mut rig = RigOptions::default();
        if profile == Profile::HighVacComparison {
            rig.dynamics.freeze_deflection = true;
        }
        Self {
            profile,
            speed,
            n_runs: match (profile, speed) {
                (Profile::Normal, Speed::Fast) => 10,
                (Profile::Normal, Speed::Paper) => 50,
                _ => 1,
            },
            chains: 1,
            material_pair: MaterialPair::AuAu,
            temperature_k: 300.0,
            zero_frequency: ZeroFrequency::Drude,
            seed: 1,
            truth: TruthParams::reference(),
            measurement: Measurement::preset(speed),
            rig,
            material_file: None,
            plots: true,
            raw_dump: false,
            trend_window: 101,
        }
    }

    /// Parses a key-value campaign file; `speed` (when given) overrides the file's choice
    /// of timing preset, explicit keys override the preset.
    pub fn parse(text: &str, speed: Option<Speed>) -> Result<Self> {
        let doc = KvDocument::parse(text)?;
        let g = doc.global();
        let profile: Profile = g.parse_or("profile", Profile::Normal)?;
        let speed = match speed {
            Some(s) => s,
            None => g.parse_or("speed", Speed::Fast)?,
        };
        let mut c = Self::new(profile, speed);
        c.n_runs = g.parse_or("n_runs", c.n_runs)?;
        c.chains = g.parse_or("chains", c.chains)?;
        c.seed = g.parse_or("seed", c.seed)?;
        c.temperature_k = g.parse_or("temperature_K", c.temperature_k)?;
        c.plots = g.parse_or("plots", c.plots)?;
        c.raw_dump = g.parse_or("raw_dump", c.raw_dump)?;
        c.trend_window = g.parse_or("trend_window", c.trend_window)?;
        c.zero_frequency = match g.get("zero_frequency") {
            None | Some("drude") => ZeroFrequency::Drude,
            Some("plasma") => ZeroFrequency::Plasma,
            Some(o) => return Err(Error::Config(format!("zero_frequency must be drude|plasma, got '{o}'"))),
        };
        c.material_file = g.get("material_file").map(PathBuf::from);
        let pair = g.get("material_pair").unwrap_or("au_au");
        c.material_pair = if pair == "custom" {
            let s = doc.section("pair").ok_or_else(|| Error::Config("material_pair = custom needs a [pair] section".into()))?;
            MaterialPair::Custom { a: plate_spec(s, "a")?, b: plate_spec(s, "b")? }
        } else {
            pair.parse()?
        };
        if let Some(s) = doc.section("truth") {
            let t = &mut c.truth;
            t.d0_m = s.parse_or("d0_nm", t.d0_m * 1e9)? * 1e-9;
            t.v0 = s.parse_or("V0_V", t.v0)?;
            t.v0_drift_per_run = s.parse_or("V0_drift_V_per_run", t.v0_drift_per_run)?;
            t.k_over_r = s.parse_or("k_over_R", t.k_over_r)?;
            t.gamma = s.parse_or("gamma_V_per_m", t.gamma)?;
            t.radius_m = s.parse_or("R_um", t.radius_m * 1e6)? * 1e-6;
            t.detector_noise = s.parse_or("noise_V_per_rtHz", t.detector_noise)?;
            t.d0_drift_per_run = s.parse_or("d0_drift_nm_per_run", t.d0_drift_per_run * 1e9)? * 1e-9;
        }
        if let Some(s) = doc.section("measurement") {
            let m = &mut c.measurement;
            m.points = s.parse_or("points", m.points)?;
            m.d_min_m = s.parse_or("d_min_nm", m.d_min_m * 1e9)? * 1e-9;
            m.d_max_m = s.parse_or("d_max_nm", m.d_max_m * 1e9)? * 1e-9;
            m.rc_s = s.parse_or("rc_s", m.rc_s)?;
            m.poles = s.parse_or("poles", m.poles)?;
            m.dwell_s = s.parse_or("dwell_s", m.dwell_s)?;
            m.settle_rc = s.parse_or("settle_rc", m.settle_rc)?;
            m.average_s = s.parse_or("average_s", m.average_s)?;
            m.sample_rate = s.parse_or("sample_rate_Hz", m.sample_rate)?;
            m.setpoint_rms = s.parse_or("setpoint_mV_rms", m.setpoint_rms * 1e3)? * 1e-3;
            m.high_setpoint_rms = s.parse_or("high_setpoint_mV_rms", m.high_setpoint_rms * 1e3)? * 1e-3;
            m.spring_d_min_m = s.parse_or("spring_d_min_nm", m.spring_d_min_m * 1e9)? * 1e-9;
            m.v_ac_min = s.parse_or("v_ac_min_V", m.v_ac_min)?;
            m.v_ac_max = s.parse_or("v_ac_max_V", m.v_ac_max)?;
            m.feedback_rc_s = s.parse_or("feedback_rc_s", m.feedback_rc_s)?;
            m.feedback_rate_hz = s.parse_or("feedback_rate_Hz", m.feedback_rate_hz)?;
            m.loop_rate = s.parse_or("loop_rate_per_s", m.loop_rate)?;
            m.d0_guess_offset_m = s.parse_or("d0_guess_offset_nm", m.d0_guess_offset_m * 1e9)? * 1e-9;
            m.kappa_guess = s.parse_or("kappa_guess_nm_per_V", m.kappa_guess * 1e9)? * 1e-9;
        }
        if let Some(s) = doc.section("drive") {
            let m = &mut c.measurement;
            m.delta_d_m = s.parse_or("delta_d_nm", m.delta_d_m * 1e9)? * 1e-9;
            m.f1_hz = s.parse_or("f1_Hz", m.f1_hz)?;
            m.f2_hz = s.parse_or("f2_Hz", m.f2_hz)?;
            m.phase_error_rad = s.parse_or("phase_error_rad", m.phase_error_rad)?;
        }
        if let Some(s) = doc.section("rig") {
            let r = &mut c.rig;
            r.dynamics.mode = match s.get("dynamics") {
                None | Some("quasi_static") => DynamicsMode::QuasiStatic,
                Some("harmonic") | Some("harmonic_oscillator") => DynamicsMode::HarmonicOscillator,
                Some(o) => return Err(Error::Config(format!("dynamics must be quasi_static|harmonic, got '{o}'"))),
            };
            r.dynamics.f0_hz = s.parse_or("f0_Hz", r.dynamics.f0_hz)?;
            r.dynamics.q = s.parse_or("Q", r.dynamics.q)?;
            r.dynamics.freeze_deflection = s.parse_or("freeze_deflection", r.dynamics.freeze_deflection)?;
            r.slip_length_m = s.parse_or("slip_nm", r.slip_length_m * 1e9)? * 1e-9;
            r.viscosity_pa_s = s.parse_or("viscosity_Pa_s", r.viscosity_pa_s)?;
            r.pressure_pa = s.parse_or("pressure_Pa", r.pressure_pa)?;
            r.exact_capacitance = s.parse_or("exact_capacitance", r.exact_capacitance)?;
            r.background_gradient = s.parse_or("background_gradient", r.background_gradient)?;
            r.delta_d_scale = s.parse_or("delta_d_scale", r.delta_d_scale)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 || self.chains == 0 {
            return Err(Error::Config("n_runs and chains must be >= 1".into()));
        }
        if self.trend_window < 3 {
            return Err(Error::Config("trend_window must be >= 3".into()));
        }
        self.truth.validate()?;
        self.measurement.validate()
    }

    /// Noise density used when the file leaves it unset.
    pub fn default_noise() -> f64 {
        NOMINAL_NOISE_DENSITY
    }
}

fn plate_spec(s: &KvSection, which: &str) -> Result<PlateSpec> {
    let material = s
        .get(which)
        .ok_or_else(|| Error::Config(format!("[pair] needs key '{which}'")))?
        .to_string();
    Ok(PlateSpec {
        material,
        film_nm: s.parse_opt(&format!("{which}_film_nm"))?,
        substrate: s.get(&format!("{which}_substrate")).map(str::to_string),
    })
}
