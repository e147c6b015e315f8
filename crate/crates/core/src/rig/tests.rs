use super::*;
use crate::lifshitz::ideal_pressure_magnitude;
use crate::lockin::{demodulate, LockinConfig};

fn ideal_curve() -> Arc<CasimirCurve> {
    let d = truth_grid(40);
    let p: Vec<f64> = d.iter().map(|&x| -ideal_pressure_magnitude(x)).collect();
    Arc::new(CasimirCurve::from_pressures(&d, &p).unwrap())
}

fn config(curve: Arc<CasimirCurve>) -> RigConfig {
    let mut c = RigConfig::new(TruthParams::reference().noiseless(), curve);
    c.sample_rate = 6000.0;
    c
}

fn demod_at(samples: &[f64], fs: f64, omega: f64) -> (f64, f64) {
    let cfg = LockinConfig::new(omega, 0.0, 0.1, 4).unwrap();
    demodulate(samples, fs, &cfg).unwrap()
}

#[test]
fn truth_identities() {
    let t = TruthParams::reference();
    assert!((t.kappa() - 191.3e-9).abs() < 0.05e-9);
    assert!((t.k() - 1.112).abs() < 1e-12);
    assert!((t.alpha(200e-9) - 0.9565).abs() < 1e-3);
    assert!((t.kappa() - t.gamma * EPS0 * PI * t.radius_m / t.k()).abs() < 1e-20);
}

#[test]
fn static_casimir_only_signal() {
    let mut cfg = config(ideal_curve());
    cfg.dynamics.freeze_deflection = true;
    let t = cfg.truth;
    let gap = 300e-9;
    let drive = DriveState { delta_d: 0.0, v_dc: -t.v0, v_ac: 0.0, ..DriveState::nominal(t.d0_m - gap) };
    let s = synthesize(&cfg, &drive, 0.05, 1).unwrap();
    let want = t.gamma * t.radius_m * cfg.casimir.force_over_r(gap).unwrap() / t.k();
    assert!(s.iter().all(|&v| (v - want).abs() <= 1e-12 * want.abs()));
    // the deflection shrinks the gap and deepens the signal only slightly
    cfg.dynamics.freeze_deflection = false;
    let s2 = synthesize(&cfg, &drive, 0.01, 1).unwrap();
    assert!(s2[5] < want && (s2[5] - want).abs() < 1e-3 * want.abs());
}

#[test]
fn determinism() {
    let mut cfg = config(ideal_curve());
    cfg.truth.detector_noise = NOMINAL_NOISE_DENSITY;
    let drive = DriveState { v_ac: 0.1, ..DriveState::nominal(cfg.truth.d0_m - 400e-9) };
    let a = synthesize(&cfg, &drive, 0.2, 42).unwrap();
    let b = synthesize(&cfg, &drive, 0.2, 42).unwrap();
    let c = synthesize(&cfg, &drive, 0.2, 43).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert!(a.iter().zip(&c).any(|(x, y)| x != y));
}

#[test]
fn second_harmonic_matches_small_signal_form() {
    let cfg = config(Arc::new(CasimirCurve::zero()));
    let t = cfg.truth;
    let gap = 500e-9;
    let drive = DriveState { delta_d: 0.0, v_dc: -t.v0, v_ac: 0.12, ..DriveState::nominal(t.d0_m - gap) };
    let s = synthesize(&cfg, &drive, 4.5, 3).unwrap();
    let (i2, q2) = demod_at(&s, cfg.sample_rate, 2.0 * drive.omega1);
    let want = -t.alpha(gap) * drive.v_ac * drive.v_ac / 2.0;
    assert!(((i2 - want) / want).abs() < 0.01, "{i2} vs {want}");
    // squeeze-film damping of the cantilever's own motion adds a small phase lag
    assert!(q2.abs() < 1e-2 * want.abs());
    let (i1, _) = demod_at(&s, cfg.sample_rate, drive.omega1);
    assert!(i1.abs() < 1e-6 * want.abs(), "compensated ω₁ term {i1}");
}

#[test]
fn harmonic_mode_agrees_with_quasi_static_at_omega2() {
    let mut cfg = config(ideal_curve());
    cfg.sample_rate = 12_000.0;
    let t = cfg.truth;
    let drive = DriveState { v_dc: -t.v0, v_ac: 0.08, ..DriveState::nominal(t.d0_m - 150e-9) };
    let qs = synthesize(&cfg, &drive, 4.5, 0).unwrap();
    cfg.dynamics = CantileverDynamics::harmonic();
    let ho = synthesize(&cfg, &drive, 4.5, 0).unwrap();
    let (iq, qq) = demod_at(&qs, cfg.sample_rate, drive.omega2);
    let (ih, qh) = demod_at(&ho, cfg.sample_rate, drive.omega2);
    let rel = (ih.hypot(qh) - iq.hypot(qq)).abs() / iq.hypot(qq);
    assert!(rel < 0.01, "{rel}");
    assert!(rel > 1e-4, "oscillator response should differ slightly: {rel}");
}

#[test]
fn cross_terms_are_rejected_by_the_filters() {
    let drive = DriveState::nominal(0.0);
    let bins = [drive.omega1, 2.0 * drive.omega1, 4.0 * drive.omega1, drive.omega2];
    for rc in [0.2, 1.0] {
        let cfg = LockinConfig::new(0.0, 0.0, rc, 4).unwrap();
        for &w in &drive.cross_terms() {
            for &b in &bins {
                let beat = (w - b).abs() / (2.0 * PI);
                assert!(cfg.magnitude(beat) < 1e-3, "rc {rc}: {w} vs bin {b}");
            }
        }
    }
    // and in a synthesized record: ω₂ bin carries only its own term with the ω₁ drive on
    let mut cfg = config(Arc::new(CasimirCurve::zero()));
    cfg.dynamics.freeze_deflection = true;
    let t = cfg.truth;
    let gap = 400e-9;
    let with_v = DriveState { v_dc: -t.v0 + 0.05, v_ac: 0.1, ..DriveState::nominal(t.d0_m - gap) };
    let s = synthesize(&cfg, &with_v, 4.5, 0).unwrap();
    let (i2, _) = demod_at(&s, cfg.sample_rate, with_v.omega2);
    let (iw, _) = demod_at(&s, cfg.sample_rate, with_v.omega1);
    let c = EPS0 * PI * t.radius_m * t.gamma / t.k();
    let want_i2 = -c * (0.05f64.powi(2) + 0.1f64.powi(2) / 2.0) * with_v.delta_d / (gap * gap);
    assert!(((i2 - want_i2) / want_i2).abs() < 1e-3, "{i2} vs {want_i2}");
    assert!(((iw + 2.0 * c * 0.05 * 0.1 / gap) / iw).abs() < 1e-3);
}

#[test]
fn contact_and_snap_in_are_errors() {
    let cfg = config(Arc::new(CasimirCurve::zero()));
    let drive = DriveState { v_dc: 0.0, ..DriveState::nominal(cfg.truth.d0_m + 1e-9) };
    assert!(matches!(synthesize(&cfg, &drive, 0.01, 0), Err(Error::Contact { .. })));
    let drive = DriveState { v_dc: 20.0, delta_d: 0.0, ..DriveState::nominal(cfg.truth.d0_m - 30e-9) };
    assert!(matches!(synthesize(&cfg, &drive, 0.01, 0), Err(Error::SnapIn { .. })));
    let near = DriveState { ..DriveState::nominal(cfg.truth.d0_m - 21e-9) };
    let cas = config(ideal_curve());
    assert!(matches!(synthesize(&cas, &near, 0.01, 0), Err(Error::Extrapolation { .. })));
}

#[test]
fn drive_and_rate_validation() {
    let mut cfg = config(Arc::new(CasimirCurve::zero()));
    let mut d = DriveState::nominal(0.0);
    cfg.sample_rate = 5000.0;
    assert!(cfg.check_drive(&d).is_err());
    cfg.sample_rate = 6000.0;
    cfg.check_drive(&d).unwrap();
    d.omega2 = 2.0 * d.omega1;
    assert!(d.validate().is_err());
    let slow = CantileverDynamics { f0_hz: 1000.0, ..CantileverDynamics::default() };
    assert!(slow.validate(&DriveState::nominal(0.0)).is_err());
    cfg.background_gradient = 3.0;
    assert!(cfg.validate().is_err());
}

#[test]
fn background_appears_as_gradient_offset() {
    let mut cfg = config(Arc::new(CasimirCurve::zero()));
    cfg.background_gradient = 1.5;
    cfg.dynamics.freeze_deflection = true;
    let t = cfg.truth;
    let drive = DriveState { v_dc: -t.v0, v_ac: 0.0, ..DriveState::nominal(t.d0_m - 800e-9) };
    let s = synthesize(&cfg, &drive, 4.5, 0).unwrap();
    let (i, _) = demod_at(&s, cfg.sample_rate, drive.omega2);
    let g = -(EPS0 * PI / t.kappa()) * i / drive.delta_d;
    assert!((g - 1.5).abs() < 1e-3, "{g}");
}


#[test]
fn cantilever_damping_rotates_quadrature_into_in_phase() {
    // with the deflection in the gap, squeeze-film damping of the cantilever motion gives
    // I_free − I_frozen ≈ Q²/(γΔd)
    let mut cfg = config(Arc::new(CasimirCurve::zero()));
    let t = cfg.truth;
    let drive = DriveState { v_dc: -t.v0, v_ac: 0.1, ..DriveState::nominal(t.d0_m - 200e-9) };
    let free = synthesize(&cfg, &drive, 4.5, 0).unwrap();
    cfg.dynamics.freeze_deflection = true;
    let frozen = synthesize(&cfg, &drive, 4.5, 0).unwrap();
    let (i_free, q_free) = demod_at(&free, cfg.sample_rate, drive.omega2);
    let (i_frz, _) = demod_at(&frozen, cfg.sample_rate, drive.omega2);
    let predicted = q_free * q_free / (t.gamma * drive.delta_d);
    assert!(((i_free - i_frz - predicted) / predicted).abs() < 0.05, "{} vs {predicted}", i_free - i_frz);
}
