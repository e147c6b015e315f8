use super::campaign::{CampaignResult, SessionKind};
use crate::analysis::{gradient_curve, hydro_force_over_r, write_fits, write_records, FitRow, GradientKind};
use crate::error::{Error, Result};
use crate::forces::{hydrodynamic_force, GasProperties, SpherePlateGeometry};
use crate::io::rawdump::{write_dump, DumpHeader};
use crate::io::svg::LinePlot;
use crate::lifshitz::{gradient_over_r, LifshitzCalculator, Plate, ZeroFrequency};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryRow {
    pub d: f64,
    pub pressure: f64,
    /// 2πP, the PFA sphere–plate force gradient per radius (negative for attraction).
    pub gradient_over_r: f64,
}

/// Lifshitz pressure and PFA gradient of a plate pair on a separation grid.
pub fn emit_theory_tables(a: &Plate, b: &Plate, d_m: &[f64], temperature_k: f64, zero: ZeroFrequency) -> Result<Vec<TheoryRow>> {
    let d_min = d_m.iter().copied().fold(f64::INFINITY, f64::min);
    if !(d_min > 0.0) {
        return Err(Error::InvalidParameter("theory grid needs positive separations".into()));
    }
    let calc = LifshitzCalculator::new(a, b, temperature_k, zero, d_min)?;
    d_m.iter()
        .map(|&d| {
            let p = calc.pressure(d)?;
            Ok(TheoryRow { d, pressure: p, gradient_over_r: gradient_over_r(p) })
        })
        .collect()
}

/// Log-spaced grid of `points` separations from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(Error::InvalidParameter(format!("need 0 < dmin < dmax and >= 2 points (got {lo}, {hi}, {points})")));
    }
    let r = (hi / lo).ln();
    Ok((0..points).map(|i| lo * (r * i as f64 / (points - 1) as f64).exp()).collect())
}

pub fn write_theory_csv<W: Write>(w: W, rows: &[TheoryRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["d_nm", "pressure_Pa", "gradient_over_R"])?;
    for r in rows {
        wr.write_record(&[format!("{:.4}", r.d * 1e9), format!("{:.9e}", r.pressure), format!("{:.9e}", r.gradient_over_r)])?;
    }
    wr.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Analytic RMS hydrodynamic force per radius for the plate modulation at gap d.
pub fn analytic_hydro_over_r(gas: &GasProperties, radius_m: f64, omega2: f64, delta_d: f64, d: f64) -> Result<f64> {
    let geom = SpherePlateGeometry::new(radius_m, d)?;
    Ok(hydrodynamic_force(&geom, omega2 * delta_d * FRAC_1_SQRT_2, gas).abs() / radius_m)
}

/// Writes every campaign artifact below `dir` and returns the files written.
pub fn write_artifacts(res: &CampaignResult, dir: &Path) -> Result<Vec<String>> {
    let cfg = &res.config;
    let m = &cfg.measurement;
    fs::create_dir_all(dir.join("runs"))?;
    let mut files = Vec::new();
    let mut note = |p: &Path| files.push(p.strip_prefix(dir).unwrap_or(p).display().to_string());

    for run in &res.runs {
        for s in &run.sessions {
            let p = dir.join("runs").join(format!("run_{:04}_{}.csv", run.run_id, s.kind.name()));
            write_records(create(&p)?, &s.records)?;
            note(&p);
        }
    }
    for kind in [SessionKind::Normal, SessionKind::Spring, SessionKind::High] {
        let rows: Vec<FitRow> = res
            .runs
            .iter()
            .flat_map(|r| r.sessions.iter().filter(|s| s.kind == kind).filter_map(move |s| Some((r.run_id, s.fit?))))
            .map(|(id, f)| FitRow {
                run_id: id,
                d0_nm: f.d0 * 1e9,
                d0_err_nm: f.d0_err * 1e9,
                kappa_nm_per_v: f.kappa * 1e9,
                kappa_err_rel: f.kappa_err / f.kappa,
                chi2: f.chi2_reduced,
            })
            .collect();
        if rows.is_empty() {
            continue;
        }
        let name = if kind == SessionKind::Normal { "fits.csv".to_string() } else { format!("fits_{}.csv", kind.name()) };
        let p = dir.join(name);
        write_fits(create(&p)?, &rows)?;
        note(&p);
    }

    let gas = GasProperties { viscosity_pa_s: cfg.rig.viscosity_pa_s, pressure_pa: cfg.rig.pressure_pa, slip_length_m: cfg.rig.slip_length_m };
    let p = dir.join("gradients.csv");
    let mut g = csv::Writer::from_writer(create(&p)?);
    g.write_record(["run_id", "session", "d_nm", "total_N_per_m2", "electrostatic_N_per_m2", "casimir_N_per_m2", "sigma_N_per_m2"])?;
    let hp = dir.join("hydro.csv");
    let mut h = csv::Writer::from_writer(create(&hp)?);
    h.write_record(["run_id", "d_nm", "F_H_over_R_rms_N_per_m", "F_H_rms_pN", "analytic_pN"])?;
    for run in &res.runs {
        for s in &run.sessions {
            let Some(fit) = s.fit else { continue };
            let tot = gradient_curve(&s.records, &fit, m.delta_d_m, GradientKind::Total);
            let el = gradient_curve(&s.records, &fit, m.delta_d_m, GradientKind::Electrostatic);
            let cas = gradient_curve(&s.records, &fit, m.delta_d_m, GradientKind::Casimir);
            for i in 0..tot.points.len() {
                g.write_record(&[
                    run.run_id.to_string(),
                    s.kind.name().to_string(),
                    format!("{:.4}", tot.points[i].d * 1e9),
                    format!("{:.6e}", tot.points[i].value),
                    format!("{:.6e}", el.points[i].value),
                    format!("{:.6e}", cas.points[i].value),
                    format!("{:.6e}", cas.points[i].sigma),
                ])?;
            }
            if s.kind != SessionKind::Normal {
                continue;
            }
            for r in &s.records {
                let d = fit.d0 - r.d_pz;
                let fh = hydro_force_over_r(r, &fit);
                let an = analytic_hydro_over_r(&gas, run.truth.radius_m, m.omega2(), m.delta_d_m, d).unwrap_or(f64::NAN);
                h.write_record(&[
                    run.run_id.to_string(),
                    format!("{:.4}", d * 1e9),
                    format!("{fh:.6e}"),
                    format!("{:.6e}", fh * run.truth.radius_m * 1e12),
                    format!("{:.6e}", an * run.truth.radius_m * 1e12),
                ])?;
            }
        }
    }
    g.flush()?;
    h.flush()?;
    note(&p);
    note(&hp);

    let springs: Vec<_> = res.runs.iter().filter_map(|r| Some((r.run_id, r.main().spring?, r.main().fit?))).collect();
    if !springs.is_empty() {
        let p = dir.join("spring.csv");
        let mut w = csv::Writer::from_writer(create(&p)?);
        w.write_record(["run_id", "k_over_R_N_per_m2", "k_over_R_err", "gamma_V_per_m", "gamma_err", "chi2_reduced", "used", "rejected", "bending_term_max"])?;
        for (id, s, f) in &springs {
            let (gm, ge) = crate::analysis::gamma_from(f.kappa, f.kappa_err, s.k_over_r, s.k_over_r_err);
            w.write_record(&[
                id.to_string(),
                format!("{:.6e}", s.k_over_r),
                format!("{:.6e}", s.k_over_r_err),
                format!("{gm:.6e}"),
                format!("{ge:.6e}"),
                format!("{:.4}", s.chi2_reduced),
                s.used.to_string(),
                s.rejected.to_string(),
                format!("{:.3e}", s.bending_term_max),
            ])?;
        }
        w.flush()?;
        note(&p);
    }
    if let Some(c) = &res.summary.comparison {
        let p = dir.join("comparison.csv");
        let mut w = csv::Writer::from_writer(create(&p)?);
        w.write_record(["d_nm", "measured_N_per_m2", "predicted_N_per_m2", "ratio", "sigma"])?;
        for q in &c.points {
            w.write_record(&[
                format!("{:.4}", q.d * 1e9),
                format!("{:.6e}", q.measured),
                format!("{:.6e}", q.predicted),
                format!("{:.6}", q.ratio),
                format!("{:.3e}", q.sigma),
            ])?;
        }
        w.flush()?;
        note(&p);
    }

    let theory: Vec<TheoryRow> = if res.curve.is_zero() {
        Vec::new()
    } else {
        let (lo, hi) = res.curve.range().unwrap_or((20e-9, 2000e-9));
        log_grid(lo, hi, 200)?
            .into_iter()
            .map(|d| {
                let g = res.curve.gradient_over_r(d)?;
                Ok(TheoryRow { d, pressure: -g / (2.0 * PI), gradient_over_r: -g })
            })
            .collect::<Result<_>>()?
    };
    if !theory.is_empty() {
        let p = dir.join("theory.csv");
        write_theory_csv(create(&p)?, &theory)?;
        note(&p);
    }

    if let Some(raw) = res.runs.first().and_then(|r| r.main().raw.as_ref()) {
        fs::create_dir_all(dir.join("raw"))?;
        let p = dir.join("raw").join("run_0000.bin");
        let h = DumpHeader { sample_rate: m.sample_rate, seed: res.runs[0].main().seed, duration: raw.len() as f64 / m.sample_rate };
        write_dump(create(&p)?, &h, raw)?;
        note(&p);
    }

    let p = dir.join("summary.txt");
    fs::write(&p, res.summary.render(cfg))?;
    note(&p);

    if cfg.plots {
        fs::create_dir_all(dir.join("plots"))?;
        for (name, plot) in plots(res, &theory, &gas) {
            let p = dir.join("plots").join(format!("{name}.svg"));
            fs::write(&p, plot.render())?;
            note(&p);
        }
    }
    Ok(files)
}

fn plots(res: &CampaignResult, theory: &[TheoryRow], gas: &GasProperties) -> Vec<(&'static str, LinePlot)> {
    let m = &res.config.measurement;
    let mut out = Vec::new();
    let fits: Vec<(f64, f64, f64)> =
        res.runs.iter().filter_map(|r| r.main().fit.map(|f| (r.run_id as f64, f.d0, r.truth.d0_m))).collect();
    if !fits.is_empty() {
        out.push((
            "d0_trend",
            LinePlot::new("Fitted d0 per run", "run", "d0 (nm)")
                .scatter("fit", fits.iter().map(|f| (f.0, f.1 * 1e9)).collect())
                .line("truth", fits.iter().map(|f| (f.0, f.2 * 1e9)).collect()),
        ));
        let kt = res.config.truth.kappa();
        let ks: Vec<(f64, f64)> = res.runs.iter().filter_map(|r| r.main().fit.map(|f| (r.run_id as f64, f.kappa * 1e9))).collect();
        out.push((
            "kappa_trend",
            LinePlot::new("Fitted kappa per run", "run", "kappa (nm/V)")
                .scatter("fit", ks.clone())
                .line("truth", ks.iter().map(|k| (k.0, kt * 1e9)).collect()),
        ));
        let vdc: Vec<(f64, f64)> = res
            .runs
            .iter()
            .filter(|r| !r.main().records.is_empty())
            .map(|r| {
                let s = &r.main().records;
                (r.run_id as f64, s.iter().map(|x| x.v_dc).sum::<f64>() / s.len() as f64 * 1e3)
            })
            .collect();
        out.push(("vdc", LinePlot::new("Mean V_DC per run", "run", "V_DC (mV)").scatter("V_DC", vdc)));
    }
    let first = res.runs.iter().find(|r| r.main().fit.is_some() && r.main().kind == SessionKind::Normal);
    if let Some(r) = first {
        let s = r.main();
        let fit = s.fit.unwrap();
        let cas = gradient_curve(&s.records, &fit, m.delta_d_m, GradientKind::Casimir);
        let mut p = LinePlot::new("Casimir force gradient", "d (nm)", "|gradient/R| (N/m^2)")
            .log_axes(true, true)
            .scatter(&format!("run {}", r.run_id), cas.points.iter().map(|q| (q.d * 1e9, q.value.abs())).collect());
        if !theory.is_empty() {
            let (lo, hi) = (m.d_min_m * 0.9, m.d_max_m * 1.1);
            p = p.line(
                "theory",
                theory.iter().filter(|t| t.d >= lo && t.d <= hi).map(|t| (t.d * 1e9, t.gradient_over_r.abs())).collect(),
            );
        }
        out.push(("gradient", p));
        let hy: Vec<(f64, f64)> =
            s.records.iter().map(|x| ((fit.d0 - x.d_pz) * 1e9, hydro_force_over_r(x, &fit) * r.truth.radius_m * 1e12)).collect();
        let an: Vec<(f64, f64)> = hy
            .iter()
            .filter_map(|&(d, _)| {
                analytic_hydro_over_r(gas, r.truth.radius_m, m.omega2(), m.delta_d_m, d * 1e-9).ok().map(|v| (d, v * r.truth.radius_m * 1e12))
            })
            .collect();
        out.push((
            "hydro",
            LinePlot::new("Hydrodynamic force (RMS)", "d (nm)", "F_H (pN)").log_axes(true, true).scatter("measured", hy).line("analytic", an),
        ));
    }
    if let Some(r) = res.runs.iter().find(|r| r.main().spring.is_some()) {
        let s = r.main();
        let sf = s.spring.unwrap();
        let pts: Vec<(f64, f64)> = s
            .records
            .iter()
            .filter(|x| x.s_2w1 * x.s_4w1 > 0.0)
            .map(|x| (x.d_pz * 1e9, x.v_ac * (x.s_2w1 / x.s_4w1).sqrt()))
            .collect();
        let line: Vec<(f64, f64)> = pts.iter().map(|&(x, _)| (x, sf.intercept + sf.slope * x * 1e-9)).collect();
        out.push(("spring", LinePlot::new("Spring-constant fit", "d_pz (nm)", "V_AC sqrt(S2/S4) (V)").scatter("data", pts).line("fit", line)));
    }
    if let Some(c) = &res.summary.comparison {
        out.push((
            "comparison",
            LinePlot::new("High/low electrostatic difference", "d (nm)", "measured / predicted")
                .log_axes(true, false)
                .scatter("ratio", c.points.iter().map(|q| (q.d * 1e9, q.ratio)).collect()),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dielectric::MaterialLibrary;
    use crate::rig::CasimirCurve;
    use crate::runner::{run_campaign_with_curve, CampaignConfig, Profile, Speed};
    use std::sync::Arc;

    #[test]
    fn theory_tables_vacuum_and_gold() {
        let lib = MaterialLibrary::bundled();
        let vac = Plate::HalfSpace(lib.get("vacuum").unwrap().clone());
        let au = Plate::HalfSpace(lib.get("au").unwrap().clone());
        let d = log_grid(50e-9, 500e-9, 5).unwrap();
        let rows = emit_theory_tables(&vac, &au, &d, 300.0, ZeroFrequency::Drude).unwrap();
        assert!(rows.iter().all(|r| r.pressure == 0.0 && r.gradient_over_r == 0.0));
        let rows = emit_theory_tables(&au, &au, &[100e-9], 300.0, ZeroFrequency::Drude).unwrap();
        assert!(rows[0].gradient_over_r < 0.0 && rows[0].gradient_over_r.abs() < 81.7);
        let mut buf = Vec::new();
        write_theory_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("d_nm,pressure_Pa,gradient_over_R\n100.0000,"));
        assert!(log_grid(0.0, 1.0, 3).is_err());
    }

    #[test]
    fn artifacts_are_written() {
        let mut c = CampaignConfig::new(Profile::Normal, Speed::Fast);
        c.n_runs = 2;
        c.raw_dump = true;
        let d: Vec<f64> = crate::rig::truth_grid(30);
        let p: Vec<f64> = d.iter().map(|&x| -crate::lifshitz::ideal_pressure_magnitude(x) * 0.5).collect();
        let curve = Arc::new(CasimirCurve::from_pressures(&d, &p).unwrap());
        let res = run_campaign_with_curve(&c, curve).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_artifacts(&res, dir.path()).unwrap();
        for f in ["fits.csv", "gradients.csv", "hydro.csv", "theory.csv", "summary.txt", "plots/gradient.svg", "raw/run_0000.bin"] {
            assert!(files.iter().any(|x| x == f), "missing {f}");
        }
        let recs = std::fs::read_to_string(dir.path().join("runs/run_0001_normal.csv")).unwrap();
        assert!(recs.starts_with("run_id,t_unix,d_pz_nm,V_AC_V,V_DC_V,S0_V,S_w1_V,S_2w1_V,S_4w1_V,S_w2I_V,S_w2Q_V"));
        let fits = crate::analysis::read_fits(File::open(dir.path().join("fits.csv")).unwrap()).unwrap();
        assert_eq!(fits.len(), 2);
        let (h, raw) = crate::io::rawdump::read_dump(File::open(dir.path().join("raw/run_0000.bin")).unwrap()).unwrap();
        assert_eq!(h.sample_rate, c.measurement.sample_rate);
        assert_eq!(raw, *res.runs[0].main().raw.as_ref().unwrap());
        let svg = std::fs::read_to_string(dir.path().join("plots/hydro.svg")).unwrap();
        assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    }
}
