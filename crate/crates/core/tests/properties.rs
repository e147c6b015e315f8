use casimir_rig::analysis::{casimir_gradient, fit_calibration, total_gradient, CalibrationFit, DemodRecord};
use casimir_rig::dielectric::MaterialLibrary;
use casimir_rig::forces::{electrostatic_force, electrostatic_force_with_bending, hydrodynamic_force, GasProperties, SpherePlateGeometry};
use casimir_rig::lifshitz::{LifshitzCalculator, Plate, ZeroFrequency};
use casimir_rig::lockin::{demodulate, LockinConfig};
use casimir_rig::optics::{rt_spectrum, Layer, LayerStack};
use casimir_rig::units::eps0_pi;
use proptest::prelude::*;
use std::f64::consts::PI;

const MATERIALS: [&str; 6] = ["au", "au_drude", "ito", "sapphire", "float_glass", "ideal_metal"];

fn lib() -> &'static MaterialLibrary {
    MaterialLibrary::bundled()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn imaginary_axis_eps_is_real_above_one_and_decreasing(
        m in 0usize..MATERIALS.len(), lx in -2.0f64..2.0, step in 0.01f64..0.5,
    ) {
        let eps = lib().get(MATERIALS[m]).unwrap();
        let x1 = 10f64.powf(lx);
        let x2 = x1 * 10f64.powf(step);
        let (a, b) = (eps.eps_imag_axis(x1).unwrap(), eps.eps_imag_axis(x2).unwrap());
        prop_assert!(a.is_finite() && a > 1.0);
        if MATERIALS[m] != "ideal_metal" {
            prop_assert!(b < a, "{} at {x1}: {a} -> {b}", MATERIALS[m]);
        } else {
            prop_assert!(b <= a);
        }
    }

    #[test]
    fn stacks_never_create_energy(t1 in 5.0f64..400.0, t2 in 5.0f64..400.0, e in 0.8f64..4.0) {
        let layers = vec![
            Layer { material: lib().get("ito").unwrap().clone(), thickness_nm: t1 },
            Layer { material: lib().get("au").unwrap().clone(), thickness_nm: t2 / 20.0 },
        ];
        let s = LayerStack::new(lib().get("vacuum").unwrap().clone(), layers, lib().get("float_glass").unwrap().clone()).unwrap();
        let sp = rt_spectrum(&s, &[e]).unwrap();
        let (r, t) = (sp.reflectance[0], sp.transmittance[0]);
        prop_assert!(r >= 0.0 && t >= 0.0 && r + t <= 1.0 + 1e-12, "R {r} T {t}");
    }

    #[test]
    fn lossless_stacks_conserve_energy(t1 in 5.0f64..800.0, t2 in 5.0f64..800.0, e in 0.5f64..4.0) {
        let layers = vec![
            Layer { material: lib().get("sapphire").unwrap().clone(), thickness_nm: t1 },
            Layer { material: lib().get("float_glass").unwrap().clone(), thickness_nm: t2 },
        ];
        let s = LayerStack::new(lib().get("vacuum").unwrap().clone(), layers, lib().get("sapphire").unwrap().clone()).unwrap();
        let sp = rt_spectrum(&s, &[e]).unwrap();
        prop_assert!((sp.reflectance[0] + sp.transmittance[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn transmittance_is_reciprocal(t1 in 2.0f64..60.0, t2 in 10.0f64..300.0, e in 0.8f64..4.0) {
        let vac = lib().get("vacuum").unwrap().clone();
        let layers = vec![
            Layer { material: lib().get("au").unwrap().clone(), thickness_nm: t1 },
            Layer { material: lib().get("ito").unwrap().clone(), thickness_nm: t2 },
        ];
        let s = LayerStack::new(vac.clone(), layers, vac).unwrap();
        let f = rt_spectrum(&s, &[e]).unwrap().transmittance[0];
        let b = rt_spectrum(&s.reversed(), &[e]).unwrap().transmittance[0];
        prop_assert!((f - b).abs() < 1e-10 * f.max(1e-3), "{f} vs {b}");
    }

    #[test]
    fn hydrodynamic_force_is_odd_and_weakens_with_gap_and_slip(
        v in 1e-9f64..1e-5, d in 20e-9f64..2e-6, dd in 1.01f64..3.0, b in 0.0f64..300e-9,
    ) {
        let gas = GasProperties::default().with_slip(b);
        let g = SpherePlateGeometry::new(100e-6, d).unwrap();
        let f = hydrodynamic_force(&g, v, &gas);
        prop_assert!(f < 0.0);
        prop_assert_eq!(hydrodynamic_force(&g, -v, &gas), -f);
        let far = SpherePlateGeometry::new(100e-6, d * dd).unwrap();
        prop_assert!(hydrodynamic_force(&far, v, &gas).abs() < f.abs());
        let slippier = gas.with_slip(b + 10e-9);
        prop_assert!(hydrodynamic_force(&g, v, &slippier).abs() < f.abs());
    }

    #[test]
    fn electrostatics_always_attract(v in -1.0f64..1.0, v0 in -0.2f64..0.2, d in 20e-9f64..2e-6) {
        let g = SpherePlateGeometry::new(100e-6, d).unwrap();
        prop_assert!(electrostatic_force(&g, v, v0).unwrap() <= 0.0);
        if let Ok(f) = electrostatic_force_with_bending(100e-6, d, v, 1.112) {
            prop_assert!(f <= 0.0);
        }
    }

    #[test]
    fn bending_correction_vanishes_for_stiff_levers(v in 0.01f64..1.0, d in 50e-9f64..2e-6) {
        let g = SpherePlateGeometry::new(100e-6, d).unwrap();
        let rigid = electrostatic_force(&g, v, 0.0).unwrap();
        // k d^2 / (eps0 pi R V^2) > 1e4
        let k = 1e4 * eps0_pi() * 100e-6 * v * v / (d * d) * 10.0;
        let bent = electrostatic_force_with_bending(100e-6, d, v, k).unwrap();
        prop_assert!((bent / rigid - 1.0).abs() < 1e-3);
    }

    #[test]
    fn calibration_fit_is_gauge_invariant(c in -400e-9f64..400e-9) {
        let (d0, kappa) = (1200e-9, 191.3e-9);
        let base: Vec<(f64, f64, f64)> = (0..20)
            .map(|i| {
                let d = 60e-9 * (15.0f64).powf(i as f64 / 19.0);
                let a = kappa / d;
                (d0 - d, a * (1.0 + 3e-3 * ((i * 7 % 5) as f64 - 2.0)), a * 3e-3)
            })
            .collect();
        let shifted: Vec<_> = base.iter().map(|&(x, a, s)| (x + c, a, s)).collect();
        let f0 = fit_calibration(&base).unwrap();
        let f1 = fit_calibration(&shifted).unwrap();
        prop_assert!((f1.d0 - f0.d0 - c).abs() < 1e-12, "{} vs {}", f1.d0 - f0.d0, c);
        prop_assert!((f1.kappa / f0.kappa - 1.0).abs() < 1e-9);
        prop_assert!((f1.d0_err / f0.d0_err - 1.0).abs() < 1e-6);
    }

    #[test]
    fn casimir_minus_total_is_the_electrostatic_term(
        s2 in -1e-3f64..-1e-6, sw2 in -1e-3f64..1e-3, d_pz in 0.0f64..1.1e-6, kappa in 150e-9f64..250e-9,
    ) {
        let rec = DemodRecord {
            run_id: 0, t_unix: 0.0, d_pz, v_ac: 0.1, v_dc: 0.1, s0: 0.0, s_w1: 0.0, s_2w1: s2, s_4w1: 0.0,
            s_w2_i: sw2, s_w2_q: 0.0, noise_ac: 1e-6, noise_dc: 1e-6,
        };
        let fit = CalibrationFit { d0: 1.2e-6, d0_err: 1e-10, kappa, kappa_err: 1e-10, chi2_reduced: 1.0, iterations: 1 };
        let lhs = casimir_gradient(&rec, &fit, 10e-9) - total_gradient(&rec, &fit, 10e-9);
        let rhs = eps0_pi() / kappa * s2 / (fit.d0 - d_pz);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(lhs.abs()) + 1e-15);
    }

    #[test]
    fn demodulator_is_linear(a in 0.1f64..2.0, b in -2.0f64..2.0, phi in 0.0f64..6.0) {
        let fs = 2000.0;
        let w = 2.0 * PI * 50.0;
        let cfg = LockinConfig::new(w, 0.0, 0.02, 4).unwrap();
        let n = (cfg.required_duration() * fs).ceil() as usize + 10;
        let x: Vec<f64> = (0..n).map(|k| (w * k as f64 / fs + phi).cos()).collect();
        let y: Vec<f64> = (0..n).map(|k| (2.0 * w * k as f64 / fs).sin() + 0.3).collect();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (xi, xq) = demodulate(&x, fs, &cfg).unwrap();
        let (yi, yq) = demodulate(&y, fs, &cfg).unwrap();
        let (mi, mq) = demodulate(&mix, fs, &cfg).unwrap();
        let scale = a.abs() + b.abs();
        prop_assert!((mi - (a * xi + b * yi)).abs() < 1e-6 * scale);
        prop_assert!((mq - (a * xq + b * yq)).abs() < 1e-6 * scale);
    }
}

#[test]
fn pressure_magnitude_falls_with_gap_and_contrast() {
    let au = Plate::HalfSpace(lib().get("au").unwrap().clone());
    let ito = Plate::HalfSpace(lib().get("ito").unwrap().clone());
    let d: Vec<f64> = (0..12).map(|i| 50e-9 * (22.0f64).powf(i as f64 / 11.0)).collect();
    let mk = |a: &Plate, b: &Plate| {
        LifshitzCalculator::new(a, b, 300.0, ZeroFrequency::Drude, 50e-9).unwrap().pressures(&d).unwrap()
    };
    let aa = mk(&au, &au);
    let ai = mk(&au, &ito);
    let ii = mk(&ito, &ito);
    for k in 0..d.len() {
        assert!(aa[k] < 0.0 && ai[k] < 0.0 && ii[k] < 0.0);
        assert!(ai[k].abs() <= aa[k].abs() && ii[k].abs() <= ai[k].abs(), "at {} nm", d[k] * 1e9);
        if k > 0 {
            assert!(aa[k].abs() < aa[k - 1].abs() && ai[k].abs() < ai[k - 1].abs());
        }
    }
    let slope = (aa[11] / aa[0]).abs().ln() / (d[11] / d[0]).ln();
    assert!((-4.0..=-2.8).contains(&slope), "au-au mean slope {slope}");
}

#[test]
fn gold_pressure_below_ideal_bound() {
    let au = Plate::HalfSpace(lib().get("au").unwrap().clone());
    let p = LifshitzCalculator::new(&au, &au, 300.0, ZeroFrequency::Drude, 100e-9).unwrap().pressure(100e-9).unwrap();
    let g = 2.0 * PI * p;
    assert!(g < 0.0 && g.abs() < 81.7, "{g}");
    // finite conductivity costs a sizeable fraction at 100 nm
    assert!(g.abs() > 0.4 * 81.7, "{g}");
}

#[test]
fn au_ito_halves_the_gold_pressure() {
    let au = Plate::HalfSpace(lib().get("au").unwrap().clone());
    let ito = Plate::HalfSpace(lib().get("ito").unwrap().clone());
    let d = [80e-9, 120e-9];
    let aa = LifshitzCalculator::new(&au, &au, 300.0, ZeroFrequency::Drude, 80e-9).unwrap().pressures(&d).unwrap();
    let ai = LifshitzCalculator::new(&au, &ito, 300.0, ZeroFrequency::Drude, 80e-9).unwrap().pressures(&d).unwrap();
    for k in 0..2 {
        let r = ai[k] / aa[k];
        assert!((r - 0.5).abs() <= 0.1, "ratio at {} nm = {r}", d[k] * 1e9);
    }
}
