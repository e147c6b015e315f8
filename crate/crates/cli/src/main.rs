use anyhow::{bail, Context, Result};
use casimir_rig::io::spectrum::{read_spectrum, write_spectrum};
use casimir_rig::lifshitz::ZeroFrequency;
use casimir_rig::optics::{fit_film_thickness, rt_spectrum, Spectrum};
use casimir_rig::runner::{
    emit_theory_tables, log_grid, run_campaign, write_artifacts, write_theory_csv, CampaignConfig, MaterialPair, Speed,
    StackFile,
};
use casimir_rig::dielectric::MaterialLibrary;
use clap::{Parser, Subcommand, ValueEnum};
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Simulated sphere-plate Casimir force rig.
#[derive(Debug, Parser)]
#[command(name = "casimir-rig", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpeedArg {
    Fast,
    Paper,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PairArg {
    #[value(name = "au_au")]
    AuAu,
    #[value(name = "au_ito")]
    AuIto,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ZeroArg {
    Drude,
    Plasma,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run a measurement campaign and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Timing preset; overrides the file's `speed`.
        #[arg(long, value_enum)]
        profile: Option<SpeedArg>,
    },
    /// Lifshitz pressure and PFA gradient table as CSV.
    Theory {
        #[arg(long, value_enum)]
        pair: PairArg,
        /// nm
        #[arg(long, default_value_t = 50.0)]
        dmin: f64,
        /// nm
        #[arg(long, default_value_t = 1000.0)]
        dmax: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, default_value_t = 300.0)]
        temperature: f64,
        #[arg(long, value_enum, default_value_t = ZeroArg::Drude)]
        zero: ZeroArg,
        /// Extra material file overriding bundled entries.
        #[arg(long)]
        materials: Option<PathBuf>,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reflectance/transmittance of a layer stack; optionally fit the first layer's thickness.
    Spectra {
        #[arg(long)]
        stack: PathBuf,
        /// Directory for reflectance.dat and transmittance.dat (current dir when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Measured reflectance to fit against (needs --fit-t).
        #[arg(long, requires = "fit_t")]
        fit_r: Option<PathBuf>,
        #[arg(long, requires = "fit_r")]
        fit_t: Option<PathBuf>,
        /// Thickness search window, nm.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [20.0, 1000.0])]
        bounds: Vec<f64>,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = real_main(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn real_main(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Run { config, out, seed, profile } => cmd_run(&config, &out, seed, profile),
        Cmd::Theory { pair, dmin, dmax, points, temperature, zero, materials, out } => {
            cmd_theory(pair, dmin, dmax, points, temperature, zero, materials.as_deref(), out.as_deref())
        }
        Cmd::Spectra { stack, out, fit_r, fit_t, bounds } => {
            cmd_spectra(&stack, out.as_deref(), fit_r.as_deref().zip(fit_t.as_deref()), (bounds[0], bounds[1]))
        }
    }
}

fn cmd_run(config: &Path, out: &Path, seed: Option<u64>, profile: Option<SpeedArg>) -> Result<()> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let speed = profile.map(|p| match p {
        SpeedArg::Fast => Speed::Fast,
        SpeedArg::Paper => Speed::Paper,
    });
    let mut cfg = CampaignConfig::parse(&text, speed).with_context(|| format!("in {}", config.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let (Some(m), Some(dir)) = (cfg.material_file.as_mut(), config.parent()) {
        if m.is_relative() {
            *m = dir.join(&*m);
        }
    }
    cfg.validate()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let res = run_campaign(&cfg)?;
    let files = write_artifacts(&res, out)?;
    print!("{}", res.summary.render(&cfg));
    println!("wrote {} files to {}", files.len(), out.display());
    if res.summary.runs_ok == 0 {
        bail!("no run completed");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_theory(
    pair: PairArg,
    dmin: f64,
    dmax: f64,
    points: usize,
    temperature: f64,
    zero: ZeroArg,
    materials: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let mut lib = MaterialLibrary::bundled().clone();
    if let Some(p) = materials {
        lib.merge(MaterialLibrary::parse(&fs::read_to_string(p)?)?);
    }
    let pair = match pair {
        PairArg::AuAu => MaterialPair::AuAu,
        PairArg::AuIto => MaterialPair::AuIto,
    };
    let zero = match zero {
        ZeroArg::Drude => ZeroFrequency::Drude,
        ZeroArg::Plasma => ZeroFrequency::Plasma,
    };
    let (a, b) = pair.plates(&lib)?;
    let grid = log_grid(dmin * 1e-9, dmax * 1e-9, points)?;
    let rows = emit_theory_tables(&a, &b, &grid, temperature, zero)?;
    match out {
        Some(p) => write_theory_csv(BufWriter::new(File::create(p)?), &rows)?,
        None => write_theory_csv(io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn load_spectrum(p: &Path) -> Result<Vec<(f64, f64)>> {
    let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
    read_spectrum(BufReader::new(f)).with_context(|| format!("in {}", p.display()))
}

fn cmd_spectra(stack: &Path, out: Option<&Path>, fit: Option<(&Path, &Path)>, bounds: (f64, f64)) -> Result<()> {
    let text = fs::read_to_string(stack).with_context(|| format!("reading {}", stack.display()))?;
    let sf = StackFile::parse(&text, stack.parent()).with_context(|| format!("in {}", stack.display()))?;
    let dir = out.unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;

    let spec = rt_spectrum(&sf.stack, &sf.energies_ev)?;
    let pairs = |v: &[f64]| -> Vec<(f64, f64)> { spec.energies_ev.iter().copied().zip(v.iter().copied()).collect() };
    write_spectrum(BufWriter::new(File::create(dir.join("reflectance.dat"))?), "R", &pairs(&spec.reflectance))?;
    write_spectrum(BufWriter::new(File::create(dir.join("transmittance.dat"))?), "T", &pairs(&spec.transmittance))?;
    println!("wrote reflectance.dat and transmittance.dat ({} points) to {}", spec.energies_ev.len(), dir.display());

    if let Some((rp, tp)) = fit {
        let r = load_spectrum(rp)?;
        let t = load_spectrum(tp)?;
        if r.len() != t.len() || r.iter().zip(&t).any(|(a, b)| (a.0 - b.0).abs() > 1e-9) {
            bail!("measured R and T must share one energy grid");
        }
        let measured = Spectrum {
            energies_ev: r.iter().map(|p| p.0).collect(),
            reflectance: r.iter().map(|p| p.1).collect(),
            transmittance: t.iter().map(|p| p.1).collect(),
        };
        let f = fit_film_thickness(&measured, &sf.stack, 0, bounds)?;
        let mut w = io::stdout().lock();
        writeln!(
            w,
            "layer 0 ({}): thickness {:.2} +- {:.2} nm  chi2_red {:.3e}",
            sf.materials.first().map(String::as_str).unwrap_or("?"),
            f.thickness_nm,
            f.sigma_nm,
            f.chi2_reduced
        )?;
    }
    Ok(())
}
