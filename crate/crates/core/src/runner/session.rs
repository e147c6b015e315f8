use super::config::Measurement;
use crate::analysis::DemodRecord;
use crate::error::{Error, Result};
use crate::lockin::{v0_feedback_step, vac_setpoint_step, FeedbackState, LockinConfig, RcCascade};
use crate::rig::{DriveState, Phases, Rig, RigConfig};

/// What one session does: approach through `targets` (gaps, descending) using the
/// previous d₀ and κ estimates to place the piezo and size V_AC.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionPlan {
    pub run_id: usize,
    pub t_unix_start: f64,
    pub targets: Vec<f64>,
    pub d0_estimate: f64,
    pub kappa_estimate: f64,
    /// S_2ω1 set point, RMS volts.
    pub setpoint_rms: f64,
    pub v_dc_start: f64,
    pub capture_raw: bool,
}

#[derive(Debug, Clone)]
pub struct SessionOutput {
    pub records: Vec<DemodRecord>,
    pub v_dc_final: f64,
    pub duration_s: f64,
    /// Raw detector samples when requested.
    pub raw: Option<Vec<f64>>,
}

struct Channel {
    i: RcCascade,
    q: RcCascade,
}

impl Channel {
    fn new(rc: f64, poles: usize, dt: f64) -> Self {
        Self { i: RcCascade::new(rc, poles, dt), q: RcCascade::new(rc, poles, dt) }
    }

    #[inline]
    fn push(&mut self, x: f64, c: f64, s: f64) {
        self.i.push(2.0 * x * c);
        self.q.push(2.0 * x * s);
    }
}

#[derive(Default, Clone, Copy)]
struct Outputs([f64; 8]);

/// Runs one approach session on a fresh rig seeded with `seed`.
pub fn run_session(rig_cfg: &RigConfig, m: &Measurement, plan: &SessionPlan, seed: u64) -> Result<SessionOutput> {
    if plan.targets.is_empty() {
        return Err(Error::InvalidParameter("session has no set points".into()));
    }
    if !(plan.kappa_estimate > 0.0) {
        return Err(Error::InvalidParameter(format!("κ estimate must be > 0, got {}", plan.kappa_estimate)));
    }
    let fs = rig_cfg.sample_rate;
    let dt = 1.0 / fs;
    let fast_cfg = LockinConfig::new(m.omega1(), 0.0, m.feedback_rc_s, 4)?;
    if m.loop_rate >= fast_cfg.loop_gain_bound() {
        return Err(Error::Config(format!(
            "V0 loop rate {} /s exceeds the stability bound {:.2} /s of the feedback filter",
            m.loop_rate,
            fast_cfg.loop_gain_bound()
        )));
    }
    let mut drive = DriveState {
        d_pz: 0.0,
        delta_d: m.delta_d_m,
        omega1: m.omega1(),
        omega2: m.omega2(),
        v_dc: plan.v_dc_start,
        v_ac: 0.0,
    };
    rig_cfg.check_drive(&drive)?;
    let mut rig = Rig::new(rig_cfg.clone(), seed)?;

    let mut fb = FeedbackState::new(1.0, plan.setpoint_rms * std::f64::consts::SQRT_2)?;
    fb.v_dc = plan.v_dc_start;
    fb.v_ac_min = m.v_ac_min;
    fb.v_ac_max = m.v_ac_max;
    let decimation = ((fs / m.feedback_rate_hz).round() as u64).max(1);
    let dt_fb = decimation as f64 * dt;
    let (cphi, sphi) = (m.phase_error_rad.cos(), m.phase_error_rad.sin());

    let mut dc = RcCascade::new(m.rc_s, m.poles, dt);
    let mut w1 = Channel::new(m.rc_s, m.poles, dt);
    let mut w2x = RcCascade::new(m.rc_s, m.poles, dt);
    let mut w4x = RcCascade::new(m.rc_s, m.poles, dt);
    let mut om2 = Channel::new(m.rc_s, m.poles, dt);
    let mut fast = RcCascade::new(m.feedback_rc_s, 4, dt);

    let settle = m.settle_rc * m.rc_s;
    let avg_samples = (m.average_s * fs).round() as u64;
    let mut raw = plan.capture_raw.then(Vec::new);
    let mut records = Vec::with_capacity(plan.targets.len());
    let mut quad = Vec::with_capacity(plan.targets.len());

    for (idx, &target) in plan.targets.iter().enumerate() {
        drive.d_pz = plan.d0_estimate - target;
        let alpha_est = plan.kappa_estimate / target;
        drive.v_ac = vac_setpoint_step(alpha_est, &mut fb);
        fb.integrator_gain = m.loop_rate / (2.0 * alpha_est * drive.v_ac);
        let dwell = if idx == 0 { settle + m.dwell_s } else { m.dwell_s };
        let n = (dwell * fs).round() as u64;
        let mut acc = Outputs::default();
        for k in 0..n {
            let t = rig.time();
            let (s1, c1) = (drive.omega1 * t).sin_cos();
            let (s2, c2) = (drive.omega2 * t).sin_cos();
            let s = rig.step_at(&drive, &Phases { t, c1, s1, c2, s2 })?;
            if let Some(r) = raw.as_mut() {
                r.push(s);
            }
            let c2w = 2.0 * c1 * c1 - 1.0;
            let c4w = 2.0 * c2w * c2w - 1.0;
            dc.push(s);
            w1.push(s, c1, s1);
            w2x.push(2.0 * s * c2w);
            w4x.push(2.0 * s * c4w);
            om2.push(s, c2 * cphi - s2 * sphi, s2 * cphi + c2 * sphi);
            let f = fast.push(2.0 * s * c1);
            if rig.sample_index() % decimation == 0 {
                drive.v_dc = v0_feedback_step(f, &mut fb, dt_fb)?;
            }
            if n - k <= avg_samples {
                let o = [
                    dc.output(),
                    w1.i.output(),
                    w1.q.output(),
                    w2x.output(),
                    w4x.output(),
                    om2.i.output(),
                    om2.q.output(),
                    drive.v_dc,
                ];
                acc.0.iter_mut().zip(o).for_each(|(a, v)| *a += v);
            }
        }
        let o = if avg_samples > 0 {
            acc.0.map(|v| v / avg_samples as f64)
        } else {
            [
                dc.output(),
                w1.i.output(),
                w1.q.output(),
                w2x.output(),
                w4x.output(),
                om2.i.output(),
                om2.q.output(),
                drive.v_dc,
            ]
        };
        quad.push(o[2]);
        records.push(DemodRecord {
            run_id: plan.run_id,
            t_unix: plan.t_unix_start + rig.time(),
            d_pz: drive.d_pz,
            v_ac: drive.v_ac,
            v_dc: o[7],
            s0: o[0],
            s_w1: o[1],
            s_2w1: o[3],
            s_4w1: o[4],
            s_w2_i: o[5],
            s_w2_q: o[6],
            noise_ac: 0.0,
            noise_dc: 0.0,
        });
    }
    // With V_DC nulling the ω₁ in-phase signal the quadrature carries no signal either
    // (the 4ω₁ quadrature does: squeeze-film damping at high drive), so its scatter
    // measures the per-channel output noise.
    let noise_ac = (quad.iter().map(|q| q * q).sum::<f64>() / quad.len() as f64).sqrt().max(1e-12);
    for r in &mut records {
        r.noise_ac = noise_ac;
        r.noise_dc = noise_ac / std::f64::consts::SQRT_2;
    }
    Ok(SessionOutput { records, v_dc_final: drive.v_dc, duration_s: rig.time(), raw })
}
