use super::config::{CampaignConfig, Profile};
use super::session::{run_session, SessionPlan};
use crate::analysis::{
    alpha_of_bending_corrected, fit_calibration, fit_records, gamma_from, gradient_curve, gradient_difference_check, mean_ratio,
    residual_stats, smooth_trend, spring_fit, CalibrationFit, DemodRecord, DifferencePoint, GradientKind,
    ResidualStats, SpringFit,
};
use crate::dielectric::MaterialLibrary;
use crate::error::{Error, Result};
use crate::forces::{ExactSphereCorrection, GasProperties};
use crate::rig::{casimir_truth_curve, truth_grid, CasimirCurve, RigConfig, TruthParams};
use rayon::prelude::*;
use std::sync::Arc;
use std::time::Instant;

/// Epoch of the first run's timestamps.
pub const T_UNIX_START: f64 = 1.7e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionKind {
    /// Small drive; calibration, gradient and hydrodynamic channels.
    Normal,
    /// High drive for the spring-constant fit.
    Spring,
    /// High drive partner of a normal session in the comparison profile.
    High,
}

impl SessionKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Normal => "normal",
            Self::Spring => "spring",
            Self::High => "high",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SessionResult {
    pub kind: SessionKind,
    pub seed: u64,
    /// Gap targets of the ladder.
    pub targets: Vec<f64>,
    /// d₀ estimate used to place the piezo.
    pub d0_estimate: f64,
    pub records: Vec<DemodRecord>,
    pub fit: Option<CalibrationFit>,
    pub spring: Option<SpringFit>,
    pub error: Option<String>,
    pub v_dc_final: f64,
    pub raw: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub run_id: usize,
    pub chain: usize,
    pub truth: TruthParams,
    pub sessions: Vec<SessionResult>,
}

impl RunResult {
    pub fn main(&self) -> &SessionResult {
        &self.sessions[0]
    }

    pub fn high(&self) -> Option<&SessionResult> {
        self.sessions.iter().find(|s| s.kind == SessionKind::High)
    }
}

/// One summary line: truth, estimate, statistical error, pull.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamRow {
    pub name: &'static str,
    pub unit: &'static str,
    pub scale: f64,
    pub truth: f64,
    pub estimate: Option<f64>,
    pub sigma: Option<f64>,
}

impl ParamRow {
    pub fn pull(&self) -> Option<f64> {
        match (self.estimate, self.sigma) {
            (Some(e), Some(s)) if s > 0.0 => Some((e - self.truth) / s),
            _ => None,
        }
    }
}

/// Scatter of the extracted Casimir gradient at one ladder point across runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientScatter {
    pub target: f64,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    /// Mean per-point noise of the extracted gradient.
    pub signal_noise: f64,
    /// Scatter of (d₀ estimate used − true d₀) across runs.
    pub position_scatter: f64,
    /// |∂/∂d| of the truth gradient at the target.
    pub slope: f64,
}

impl GradientScatter {
    pub fn predicted(&self) -> f64 {
        self.signal_noise.hypot(self.slope * self.position_scatter)
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub points: Vec<DifferencePoint>,
    pub mean_ratio: f64,
    pub mean_ratio_err: f64,
}

#[derive(Debug, Clone)]
pub struct Summary {
    pub rows: Vec<ParamRow>,
    pub runs_ok: usize,
    pub runs_failed: usize,
    pub d0_residuals: Option<ResidualStats>,
    /// Standard deviation of fitted minus true d₀.
    pub d0_truth_std: Option<f64>,
    pub kappa_residuals: Option<ResidualStats>,
    pub kappa_truth_std: Option<f64>,
    pub trend_window: usize,
    pub gradient_95: Option<GradientScatter>,
    pub v_dc_scatter: Option<f64>,
    pub comparison: Option<Comparison>,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone)]
pub struct CampaignResult {
    pub config: CampaignConfig,
    pub curve: Arc<CasimirCurve>,
    pub runs: Vec<RunResult>,
    pub summary: Summary,
}

pub fn material_library(cfg: &CampaignConfig) -> Result<MaterialLibrary> {
    let mut lib = MaterialLibrary::bundled().clone();
    if let Some(p) = &cfg.material_file {
        lib.merge(MaterialLibrary::parse(&std::fs::read_to_string(p)?)?);
    }
    Ok(lib)
}

/// Truth Casimir curve of the configured pair.
pub fn truth_curve(cfg: &CampaignConfig) -> Result<CasimirCurve> {
    let lib = material_library(cfg)?;
    let (a, b) = cfg.material_pair.plates(&lib)?;
    casimir_truth_curve(&a, &b, cfg.temperature_k, cfg.zero_frequency, &truth_grid(61))
}

/// Rig configuration seen by run `run`.
pub fn rig_config(cfg: &CampaignConfig, curve: &Arc<CasimirCurve>, exact: Option<&Arc<ExactSphereCorrection>>, run: usize) -> RigConfig {
    let mut rc = RigConfig::new(cfg.truth.at_run(run), curve.clone());
    rc.dynamics = cfg.rig.dynamics;
    rc.gas = GasProperties {
        viscosity_pa_s: cfg.rig.viscosity_pa_s,
        pressure_pa: cfg.rig.pressure_pa,
        slip_length_m: cfg.rig.slip_length_m,
    };
    rc.sample_rate = cfg.measurement.sample_rate;
    rc.exact_capacitance = exact.cloned();
    rc.background_gradient = cfg.rig.background_gradient;
    rc.delta_d_scale = cfg.rig.delta_d_scale;
    rc
}

/// Per-run, per-session seed; independent of scheduling.
pub fn session_seed(base: u64, run: usize, session: usize) -> u64 {
    let mut z = base ^ (run as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((session as u64) << 56);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Worker count: `CASIMIR_RIG_THREADS` when set to a positive integer, else all cores.
pub fn worker_threads() -> usize {
    std::env::var("CASIMIR_RIG_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignResult> {
    cfg.validate()?;
    let curve = Arc::new(truth_curve(cfg)?);
    run_campaign_with_curve(cfg, curve)
}

/// As `run_campaign` with a precomputed truth curve.
pub fn run_campaign_with_curve(cfg: &CampaignConfig, curve: Arc<CasimirCurve>) -> Result<CampaignResult> {
    cfg.validate()?;
    let start = Instant::now();
    let exact = if cfg.rig.exact_capacitance {
        Some(Arc::new(ExactSphereCorrection::new(cfg.truth.radius_m, 5e-9, 5e-6, 400)?))
    } else {
        None
    };
    let chains = cfg.chains.min(cfg.n_runs);
    let per_chain = cfg.n_runs.div_ceil(chains);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads())
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let results: Vec<Result<Vec<RunResult>>> = pool.install(|| {
        (0..chains)
            .into_par_iter()
            .map(|c| {
                let lo = c * per_chain;
                let hi = ((c + 1) * per_chain).min(cfg.n_runs);
                run_chain(cfg, &curve, exact.as_ref(), c, lo..hi)
            })
            .collect()
    });
    let mut runs = Vec::with_capacity(cfg.n_runs);
    for r in results {
        runs.extend(r?);
    }
    runs.sort_by_key(|r| r.run_id);
    let mut summary = summarize(cfg, &curve, &runs);
    summary.elapsed_s = start.elapsed().as_secs_f64();
    Ok(CampaignResult { config: cfg.clone(), curve, runs, summary })
}

/// Simulated duration of one run, used to space timestamps.
fn run_duration(cfg: &CampaignConfig) -> f64 {
    let m = &cfg.measurement;
    let one = m.settle_rc * m.rc_s + m.points as f64 * m.dwell_s;
    if cfg.profile == Profile::HighVacComparison {
        2.0 * one
    } else {
        one
    }
}

fn run_chain(
    cfg: &CampaignConfig,
    curve: &Arc<CasimirCurve>,
    exact: Option<&Arc<ExactSphereCorrection>>,
    chain: usize,
    runs: std::ops::Range<usize>,
) -> Result<Vec<RunResult>> {
    let m = &cfg.measurement;
    let mut d0_est = cfg.truth.at_run(runs.start).d0_m + m.d0_guess_offset_m;
    let mut kappa_est = m.kappa_guess;
    let mut v_dc = 0.0;
    let mut out = Vec::with_capacity(runs.len());
    for run in runs {
        let rig = rig_config(cfg, curve, exact, run);
        let first_kind = match cfg.profile {
            Profile::SpringConstant => SessionKind::Spring,
            _ => SessionKind::Normal,
        };
        let t0 = T_UNIX_START + run as f64 * run_duration(cfg);
        let capture = cfg.raw_dump && run == 0;
        let main = session(cfg, &rig, first_kind, run, 0, t0, d0_est, kappa_est, v_dc, capture)?;
        let mut sessions = vec![main];
        if cfg.profile == Profile::HighVacComparison {
            let s0 = &sessions[0];
            let (d0, kappa) = s0.fit.map_or((d0_est, kappa_est), |f| (f.d0, f.kappa));
            let t1 = t0 + run_duration(cfg) / 2.0;
            let v = s0.v_dc_final;
            sessions.push(session(cfg, &rig, SessionKind::High, run, 1, t1, d0, kappa, v, false)?);
        }
        let s0 = &sessions[0];
        if let Some(f) = s0.fit {
            d0_est = f.d0;
            kappa_est = f.kappa;
        }
        if s0.error.is_none() {
            v_dc = s0.v_dc_final;
        }
        out.push(RunResult { run_id: run, chain, truth: rig.truth, sessions });
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn session(
    cfg: &CampaignConfig,
    rig: &RigConfig,
    kind: SessionKind,
    run: usize,
    index: usize,
    t0: f64,
    d0_est: f64,
    kappa_est: f64,
    v_dc: f64,
    capture: bool,
) -> Result<SessionResult> {
    let m = &cfg.measurement;
    let (d_min, setpoint) = match kind {
        SessionKind::Normal => (m.d_min_m, m.setpoint_rms),
        SessionKind::Spring => (m.spring_d_min_m, m.high_setpoint_rms),
        SessionKind::High => (m.d_min_m, m.high_setpoint_rms),
    };
    let plan = SessionPlan {
        run_id: run,
        t_unix_start: t0,
        targets: m.ladder(d_min),
        d0_estimate: d0_est,
        kappa_estimate: kappa_est,
        setpoint_rms: setpoint,
        v_dc_start: v_dc,
        capture_raw: capture,
    };
    let seed = session_seed(cfg.seed, run, index);
    let mut res = SessionResult {
        kind,
        seed,
        targets: plan.targets.clone(),
        d0_estimate: d0_est,
        records: Vec::new(),
        fit: None,
        spring: None,
        error: None,
        v_dc_final: v_dc,
        raw: None,
    };
    let out = match run_session(rig, m, &plan, seed) {
        Ok(o) => o,
        Err(e @ (Error::Contact { .. } | Error::SnapIn { .. } | Error::LoopSign { .. } | Error::Extrapolation { .. })) => {
            log::warn!("run {run} {} session aborted: {e}", kind.name());
            res.error = Some(e.to_string());
            return Ok(res);
        }
        Err(e) => return Err(e),
    };
    res.v_dc_final = out.v_dc_final;
    res.raw = out.raw;
    res.records = out.records;
    let fit = match kind {
        SessionKind::Normal => fit_records(&res.records),
        SessionKind::Spring | SessionKind::High => fit_bending_corrected(&res.records),
    };
    match fit {
        Ok(f) => res.fit = Some(f),
        Err(e) => {
            log::warn!("run {run} {} fit failed: {e}", kind.name());
            res.error = Some(e.to_string());
        }
    }
    if kind == SessionKind::Spring {
        match spring_fit(&res.records) {
            Ok(s) => res.spring = Some(s),
            Err(e) => {
                log::warn!("run {run} spring fit failed: {e}");
                res.error.get_or_insert(e.to_string());
            }
        }
    }
    Ok(res)
}

/// Calibration fit on α with the bending term removed (high-drive sessions).
pub fn fit_bending_corrected(records: &[DemodRecord]) -> Result<CalibrationFit> {
    let pts: Vec<(f64, f64, f64)> = records
        .iter()
        .filter(|r| r.v_ac > 0.0)
        .map(|r| alpha_of_bending_corrected(r).map(|(a, s)| (r.d_pz, a, s)))
        .collect::<Result<_>>()?;
    fit_calibration(&pts)
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Largest odd window not exceeding `n`, capped at `max`.
fn odd_window(n: usize, max: usize) -> usize {
    let w = n.min(max);
    if w % 2 == 0 {
        w.saturating_sub(1)
    } else {
        w
    }
}

fn trend_stats(series: &[f64], window: usize) -> Option<ResidualStats> {
    if series.len() < 30 || window < 3 {
        return None;
    }
    let trend = smooth_trend(series, window, 2).ok()?;
    residual_stats(series, &trend).ok()
}

/// Combines the normal-session Casimir gradients of all runs at the ladder point nearest `target`.
pub fn gradient_scatter(cfg: &CampaignConfig, curve: &CasimirCurve, runs: &[RunResult], target: f64) -> Option<GradientScatter> {
    let mut values = Vec::new();
    let mut noise = Vec::new();
    let mut pos = Vec::new();
    let mut at = f64::NAN;
    for r in runs {
        let s = r.main();
        let (Some(fit), true) = (s.fit, s.kind == SessionKind::Normal) else { continue };
        let Some(i) = (0..s.targets.len()).min_by(|&a, &b| (s.targets[a] - target).abs().total_cmp(&(s.targets[b] - target).abs()))
        else {
            continue;
        };
        let c = gradient_curve(&s.records[i..=i], &fit, cfg.measurement.delta_d_m, GradientKind::Casimir);
        values.push(c.points[0].value);
        noise.push(c.points[0].sigma);
        pos.push(s.d0_estimate - r.truth.d0_m);
        at = s.targets[i];
    }
    if values.len() < 3 {
        return None;
    }
    let (mean, std) = mean_std(&values);
    let h = 0.5e-9;
    let slope = match (curve.gradient_over_r(at + h), curve.gradient_over_r(at - h)) {
        (Ok(a), Ok(b)) => ((a - b) / (2.0 * h) * 1e-9).abs(),
        _ => f64::NAN,
    };
    Some(GradientScatter {
        target: at,
        n: values.len(),
        mean,
        std,
        signal_noise: mean_std(&noise).0,
        position_scatter: mean_std(&pos).1 * 1e9,
        slope,
    })
}

/// Averages the high/low comparison over runs at common separations.
pub fn comparison(cfg: &CampaignConfig, runs: &[RunResult]) -> Option<Comparison> {
    let dd = cfg.measurement.delta_d_m;
    let mut all: Vec<Vec<DifferencePoint>> = Vec::new();
    for r in runs {
        let (low, Some(high)) = (r.main(), r.high()) else { continue };
        let (Some(fl), Some(fh)) = (low.fit, high.fit) else { continue };
        let ht = gradient_curve(&high.records, &fh, dd, GradientKind::Total);
        let lt = gradient_curve(&low.records, &fl, dd, GradientKind::Total);
        let he = gradient_curve(&high.records, &fh, dd, GradientKind::Electrostatic);
        let le = gradient_curve(&low.records, &fl, dd, GradientKind::Electrostatic);
        match gradient_difference_check(&ht, &lt, &he, &le) {
            Ok(p) => all.push(p),
            Err(e) => log::warn!("run {} comparison skipped: {e}", r.run_id),
        }
    }
    let first = all.first()?.clone();
    let points: Vec<DifferencePoint> = if all.len() == 1 {
        first
    } else {
        let n = all.iter().map(Vec::len).min().unwrap_or(0);
        (0..n)
            .map(|i| {
                let k = all.len() as f64;
                let mut p = all[0][i];
                p.measured = all.iter().map(|v| v[i].measured).sum::<f64>() / k;
                p.predicted = all.iter().map(|v| v[i].predicted).sum::<f64>() / k;
                p.ratio = p.measured / p.predicted;
                p.sigma = (all.iter().map(|v| v[i].sigma.powi(2)).sum::<f64>()).sqrt() / k;
                p
            })
            .collect()
    };
    let (mean_ratio, mean_ratio_err) = mean_ratio(&points);
    Some(Comparison { points, mean_ratio, mean_ratio_err })
}

fn summarize(cfg: &CampaignConfig, curve: &CasimirCurve, runs: &[RunResult]) -> Summary {
    let ok: Vec<&RunResult> = runs.iter().filter(|r| r.main().fit.is_some()).collect();
    let failed = runs.len() - ok.len();
    let fits: Vec<CalibrationFit> = ok.iter().filter_map(|r| r.main().fit).collect();
    let n = fits.len() as f64;
    let truth_d0: Vec<f64> = ok.iter().map(|r| r.truth.d0_m).collect();
    let truth_kappa = cfg.truth.kappa();
    let mut rows = Vec::new();
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (d0_est, d0_sig, k_est, k_sig) = if fits.is_empty() {
        (None, None, None, None)
    } else {
        (
            Some(avg(&fits.iter().map(|f| f.d0).collect::<Vec<_>>())),
            Some(fits.iter().map(|f| f.d0_err.powi(2)).sum::<f64>().sqrt() / n),
            Some(avg(&fits.iter().map(|f| f.kappa).collect::<Vec<_>>())),
            Some(fits.iter().map(|f| f.kappa_err.powi(2)).sum::<f64>().sqrt() / n),
        )
    };
    rows.push(ParamRow {
        name: "d0",
        unit: "nm",
        scale: 1e9,
        truth: if truth_d0.is_empty() { cfg.truth.d0_m } else { avg(&truth_d0) },
        estimate: d0_est,
        sigma: d0_sig,
    });
    rows.push(ParamRow { name: "kappa", unit: "nm/V", scale: 1e9, truth: truth_kappa, estimate: k_est, sigma: k_sig });
    let springs: Vec<(SpringFit, CalibrationFit)> = runs.iter().filter_map(|r| Some((r.main().spring?, r.main().fit?))).collect();
    let (kr, kr_s, g, g_s) = if springs.is_empty() {
        (None, None, None, None)
    } else {
        let m = springs.len() as f64;
        let kr = springs.iter().map(|s| s.0.k_over_r).sum::<f64>() / m;
        let kr_s = springs.iter().map(|s| s.0.k_over_r_err.powi(2)).sum::<f64>().sqrt() / m;
        let gs: Vec<(f64, f64)> = springs.iter().map(|(s, f)| gamma_from(f.kappa, f.kappa_err, s.k_over_r, s.k_over_r_err)).collect();
        let g = gs.iter().map(|x| x.0).sum::<f64>() / m;
        let g_s = gs.iter().map(|x| x.1.powi(2)).sum::<f64>().sqrt() / m;
        (Some(kr), Some(kr_s), Some(g), Some(g_s))
    };
    rows.push(ParamRow { name: "k/R", unit: "N/m^2", scale: 1.0, truth: cfg.truth.k_over_r, estimate: kr, sigma: kr_s });
    rows.push(ParamRow { name: "gamma", unit: "V/m", scale: 1.0, truth: cfg.truth.gamma, estimate: g, sigma: g_s });

    let window = odd_window(fits.len(), cfg.trend_window);
    let d0_series: Vec<f64> = fits.iter().map(|f| f.d0 * 1e9).collect();
    let k_series: Vec<f64> = fits.iter().map(|f| f.kappa / truth_kappa).collect();
    let truth_std = |v: Vec<f64>| (v.len() >= 2).then(|| mean_std(&v).1);
    let v_dc: Vec<f64> = ok.iter().flat_map(|r| r.main().records.iter().map(|x| x.v_dc)).collect();
    Summary {
        rows,
        runs_ok: ok.len(),
        runs_failed: failed,
        d0_residuals: trend_stats(&d0_series, window),
        d0_truth_std: truth_std(fits.iter().zip(&truth_d0).map(|(f, t)| (f.d0 - t) * 1e9).collect()),
        kappa_residuals: trend_stats(&k_series, window),
        kappa_truth_std: truth_std(k_series.iter().map(|k| k - 1.0).collect()),
        trend_window: window,
        gradient_95: if cfg.profile == Profile::Normal && !curve.is_zero() {
            gradient_scatter(cfg, curve, runs, 95e-9)
        } else {
            None
        },
        v_dc_scatter: (v_dc.len() >= 2).then(|| mean_std(&v_dc).1),
        comparison: comparison(cfg, runs),
        elapsed_s: 0.0,
    }
}

impl Summary {
    pub fn render(&self, cfg: &CampaignConfig) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "profile {:?}  pair {}  runs {} ok / {} failed  elapsed {:.1} s",
            cfg.profile,
            cfg.material_pair.name(),
            self.runs_ok,
            self.runs_failed,
            self.elapsed_s
        );
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<8} {:>14} {:>14} {:>12} {:>8}  unit", "param", "truth", "estimate", "stat_err", "pull");
        for r in &self.rows {
            let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.6e}", x * r.scale));
            let _ = writeln!(
                s,
                "{:<8} {:>14} {:>14} {:>12} {:>8}  {}",
                r.name,
                format!("{:.6e}", r.truth * r.scale),
                f(r.estimate),
                f(r.sigma),
                r.pull().map_or("-".to_string(), |p| format!("{p:.2}")),
                r.unit
            );
        }
        let _ = writeln!(s);
        if let Some(r) = &self.d0_residuals {
            let _ = writeln!(
                s,
                "d0 residuals (SG window {}): std {:.3} nm, gaussian fit {:.3} nm",
                self.trend_window, r.std, r.gaussian_std
            );
        }
        if let Some(v) = self.d0_truth_std {
            let _ = writeln!(s, "d0 fit - truth: std {v:.3} nm");
        }
        if let Some(r) = &self.kappa_residuals {
            let _ = writeln!(
                s,
                "kappa relative residuals: std {:.3} %, gaussian fit {:.3} %",
                r.std * 100.0,
                r.gaussian_std * 100.0
            );
        }
        if let Some(v) = self.kappa_truth_std {
            let _ = writeln!(s, "kappa fit / truth - 1: std {:.3} %", v * 100.0);
        }
        if let Some(g) = &self.gradient_95 {
            let _ = writeln!(
                s,
                "casimir gradient at {:.1} nm: mean {:.3} N/m^2, std {:.3} N/m^2 over {} runs; predicted {:.3} = signal {:.3} (+) slope {:.3} N/m^2/nm x d0 scatter {:.3} nm",
                g.target * 1e9,
                g.mean,
                g.std,
                g.n,
                g.predicted(),
                g.signal_noise,
                g.slope,
                g.position_scatter
            );
        }
        if let Some(v) = self.v_dc_scatter {
            let _ = writeln!(s, "V_DC scatter: {:.3} mV", v * 1e3);
        }
        if let Some(c) = &self.comparison {
            let _ = writeln!(s, "high/low electrostatic difference ratio: {:.4} +- {:.4}", c.mean_ratio, c.mean_ratio_err);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::config::Speed;

    fn small(profile: Profile) -> CampaignConfig {
        let mut c = CampaignConfig::new(profile, Speed::Fast);
        c.n_runs = 3;
        c.measurement.points = 8;
        c.measurement.d_min_m = 80e-9;
        c
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = session_seed(1, 0, 0);
        assert_eq!(a, session_seed(1, 0, 0));
        assert_ne!(a, session_seed(1, 1, 0));
        assert_ne!(a, session_seed(1, 0, 1));
        assert_ne!(a, session_seed(2, 0, 0));
        assert_eq!(odd_window(50, 101), 49);
        assert_eq!(odd_window(200, 101), 101);
    }

    #[test]
    fn normal_campaign_is_reproducible_and_chains_estimates() {
        let mut c = small(Profile::Normal);
        c.chains = 2;
        let curve = Arc::new(CasimirCurve::zero());
        let a = run_campaign_with_curve(&c, curve.clone()).unwrap();
        let b = run_campaign_with_curve(&c, curve).unwrap();
        assert_eq!(a.runs.len(), 3);
        for (x, y) in a.runs.iter().zip(&b.runs) {
            assert_eq!(x.main().records, y.main().records);
        }
        // runs 0 and 1 form chain 0, run 2 starts chain 1 from the configured guess
        assert_eq!(a.runs[1].chain, 0);
        assert_eq!(a.runs[2].chain, 1);
        assert_eq!(a.runs[1].main().d0_estimate, a.runs[0].main().fit.unwrap().d0);
        assert_eq!(a.runs[2].main().d0_estimate, c.truth.d0_m + c.measurement.d0_guess_offset_m);
        assert_eq!(a.summary.runs_ok, 3);
        let pull = a.summary.rows[0].pull().unwrap();
        assert!(pull.abs() < 5.0, "d0 pull {pull}");
        assert!(a.summary.rows[2].estimate.is_none());
        let text = a.summary.render(&c);
        for name in ["d0", "kappa", "k/R", "gamma"] {
            assert!(text.contains(name));
        }
    }

    #[test]
    fn contact_aborts_run_but_not_campaign() {
        let mut c = small(Profile::Normal);
        c.n_runs = 2;
        c.measurement.d0_guess_offset_m = 120e-9;
        c.measurement.d_min_m = 100e-9;
        let r = run_campaign_with_curve(&c, Arc::new(CasimirCurve::zero())).unwrap();
        assert!(r.runs[0].main().error.as_deref().unwrap_or("").contains("contact"));
        assert_eq!(r.summary.runs_failed, 2);
    }
}
