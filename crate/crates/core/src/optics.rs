//! Normal-incidence reflectance and transmittance of thin-film stacks, and film-thickness fitting.

use crate::dielectric::DielectricModel;
use crate::error::{Error, Result};
use crate::numeric::brent_minimize;
use crate::units::HC_EV_NM;
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub material: DielectricModel,
    pub thickness_nm: f64,
}

/// Ambient | layers (in order of incidence) | semi-infinite, incoherent substrate.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub ambient: DielectricModel,
    pub layers: Vec<Layer>,
    pub substrate: DielectricModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub energies_ev: Vec<f64>,
    pub reflectance: Vec<f64>,
    pub transmittance: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThicknessFit {
    pub thickness_nm: f64,
    pub sigma_nm: f64,
    pub chi2_reduced: f64,
}

impl LayerStack {
    pub fn new(ambient: DielectricModel, layers: Vec<Layer>, substrate: DielectricModel) -> Result<Self> {
        if layers.iter().any(|l| !(l.thickness_nm > 0.0)) {
            return Err(Error::InvalidParameter("layer thickness must be > 0".into()));
        }
        Ok(Self { ambient, layers, substrate })
    }

    /// Single film on a substrate in vacuum.
    pub fn film_on(film: DielectricModel, thickness_nm: f64, substrate: DielectricModel) -> Result<Self> {
        Self::new(DielectricModel::vacuum(), vec![Layer { material: film, thickness_nm }], substrate)
    }

    pub fn reversed(&self) -> Self {
        Self {
            ambient: self.substrate.clone(),
            layers: self.layers.iter().rev().cloned().collect(),
            substrate: self.ambient.clone(),
        }
    }
}

/// Refractive index with Im ≥ 0, conjugated to the n − ik sign of the characteristic-matrix method.
fn admittance(eps: Complex64) -> Complex64 {
    let n = eps.sqrt();
    let n = if n.im < 0.0 { -n } else { n };
    n.conj()
}

/// Permittivities of every medium at each energy; thickness changes reuse these.
struct Evaluated {
    energies: Vec<f64>,
    ambient: Vec<Complex64>,
    layers: Vec<Vec<Complex64>>,
    substrate: Vec<Complex64>,
}

fn evaluate(stack: &LayerStack, energies: &[f64]) -> Result<Evaluated> {
    let ev = |m: &DielectricModel| -> Result<Vec<Complex64>> { energies.iter().map(|&e| m.eps(e).map(admittance)).collect() };
    Ok(Evaluated {
        energies: energies.to_vec(),
        ambient: ev(&stack.ambient)?,
        layers: stack.layers.iter().map(|l| ev(&l.material)).collect::<Result<_>>()?,
        substrate: ev(&stack.substrate)?,
    })
}

fn rt_at(ev: &Evaluated, k: usize, thick: &[f64]) -> (f64, f64) {
    let e = ev.energies[k];
    let lambda = HC_EV_NM / e;
    let i = Complex64::new(0.0, 1.0);
    let (mut m11, mut m12, mut m21, mut m22) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    for (layer, &t) in ev.layers.iter().zip(thick) {
        let eta = layer[k];
        let delta = 2.0 * PI * eta * t / lambda;
        let (c, s) = (delta.cos(), delta.sin());
        let (a11, a12, a21, a22) = (c, i * s / eta, i * eta * s, c);
        let n11 = m11 * a11 + m12 * a21;
        let n12 = m11 * a12 + m12 * a22;
        let n21 = m21 * a11 + m22 * a21;
        let n22 = m21 * a12 + m22 * a22;
        (m11, m12, m21, m22) = (n11, n12, n21, n22);
    }
    let eta0 = ev.ambient[k];
    let etas = ev.substrate[k];
    let b = m11 + m12 * etas;
    let cc = m21 + m22 * etas;
    let den = eta0 * b + cc;
    let r = (eta0 * b - cc) / den;
    let t = 4.0 * eta0.re * etas.re / den.norm_sqr();
    (r.norm_sqr(), t)
}

fn spectrum_of(ev: &Evaluated, thick: &[f64]) -> Spectrum {
    let (r, t): (Vec<f64>, Vec<f64>) = (0..ev.energies.len()).map(|k| rt_at(ev, k, thick)).unzip();
    Spectrum { energies_ev: ev.energies.clone(), reflectance: r, transmittance: t }
}

/// R and T at each photon energy.
pub fn rt_spectrum(stack: &LayerStack, energies_ev: &[f64]) -> Result<Spectrum> {
    let ev = evaluate(stack, energies_ev)?;
    let thick: Vec<f64> = stack.layers.iter().map(|l| l.thickness_nm).collect();
    Ok(spectrum_of(&ev, &thick))
}

/// Turning points, ignoring changes below 1e-9 of the spectrum's range.
fn count_extrema(v: &[f64]) -> usize {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let tol = 1e-9 * (hi - lo).max(1e-12);
    let mut count = 0;
    let mut last = 0.0f64;
    for w in v.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= tol {
            continue;
        }
        if last != 0.0 && d.signum() != last {
            count += 1;
        }
        last = d.signum();
    }
    if hi - lo < 1e-6 {
        0
    } else {
        count
    }
}

/// Least-squares thickness of layer `layer_index` of `template` against measured R and T
/// (same energy grid). Grid scan over [lo, hi] nm, Brent refinement, σ from the χ² curvature
/// with the noise level estimated from the residuals.
pub fn fit_film_thickness(
    measured: &Spectrum,
    template: &LayerStack,
    layer_index: usize,
    bounds_nm: (f64, f64),
) -> Result<ThicknessFit> {
    if layer_index >= template.layers.len() {
        return Err(Error::InvalidParameter(format!("stack has no layer {layer_index}")));
    }
    let n = measured.energies_ev.len();
    if n < 4 || measured.reflectance.len() != n || measured.transmittance.len() != n {
        return Err(Error::InsufficientData("spectrum needs >= 4 points with R and T".into()));
    }
    let (lo, hi) = bounds_nm;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter("thickness bounds must satisfy 0 < lo < hi".into()));
    }
    let ev = evaluate(template, &measured.energies_ev)?;
    let base: Vec<f64> = template.layers.iter().map(|l| l.thickness_nm).collect();
    let cost = |t: f64| -> f64 {
        let mut th = base.clone();
        th[layer_index] = t;
        let mut s = 0.0;
        for k in 0..n {
            let (r, tr) = rt_at(&ev, k, &th);
            s += (r - measured.reflectance[k]).powi(2) + (tr - measured.transmittance[k]).powi(2);
        }
        s
    };
    let steps = (((hi - lo) / 0.5).ceil() as usize).clamp(20, 20_000);
    let h = (hi - lo) / steps as f64;
    let (mut best_t, mut best_c) = (lo, f64::INFINITY);
    for i in 0..=steps {
        let t = lo + i as f64 * h;
        let c = cost(t);
        if c < best_c {
            best_c = c;
            best_t = t;
        }
    }
    let (t_opt, c_opt) = brent_minimize(&cost, (best_t - h).max(lo), (best_t + h).min(hi), 1e-10, 200);

    let mut th = base.clone();
    th[layer_index] = t_opt;
    let model = spectrum_of(&ev, &th);
    if count_extrema(&model.transmittance) + count_extrema(&model.reflectance) < 2 {
        return Err(Error::FitDegenerate("no interference fringes in the spectral window".into()));
    }
    let dof = (2 * n - 1) as f64;
    let s2 = (c_opt / dof).max(1e-30);
    let dt = 1e-3 * t_opt.max(1.0);
    let curv = (cost(t_opt + dt) - 2.0 * c_opt + cost(t_opt - dt)) / (dt * dt);
    if !(curv > 0.0) {
        return Err(Error::FitDegenerate("flat misfit curvature".into()));
    }
    // χ² = cost/s²; σ_t² = 2 / (∂²χ²/∂t²)
    let sigma = (2.0 * s2 / curv).sqrt();
    Ok(ThicknessFit { thickness_nm: t_opt, sigma_nm: sigma, chi2_reduced: c_opt / dof / s2 })
}
