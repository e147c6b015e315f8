//! Lifshitz pressure between parallel plates and the PFA sphere–plate gradient.

use crate::dielectric::{DielectricModel, StaticLimit};
use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, NeumaierSum};
use crate::units::{ev_to_wavenumber, C_LIGHT, HBAR, K_B, K_B_EV};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Relative share of the ideal-metal Matsubara sum allowed in the truncated tail.
pub const TAIL_TOLERANCE: f64 = 1e-4;
const T_BREAKS: [f64; 9] = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

#[derive(Debug, Clone, PartialEq)]
pub struct MatsubaraGrid {
    pub temperature_k: f64,
    /// ξ_n in eV for n = 0..=n_max.
    pub xi_ev: Vec<f64>,
    pub n_max: usize,
}

/// Treatment of the zero-frequency TE term for metals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroFrequency {
    /// r_TE(0) = 0.
    #[default]
    Drude,
    /// r_TE(0) from the plasma-model limit.
    Plasma,
}

pub fn first_matsubara_ev(t_k: f64) -> f64 {
    2.0 * PI * K_B_EV * t_k
}

/// ∫_Y^∞ y² Σ_p e^{−y}/(1 − e^{−y}) dy for two perfectly reflecting polarizations.
fn ideal_term(y0: f64) -> f64 {
    let mut s = 0.0;
    for m in 1..200 {
        let m = m as f64;
        let t = (-m * y0).exp() * (y0 * y0 / m + 2.0 * y0 / (m * m) + 2.0 / (m * m * m));
        s += t;
        if t < 1e-18 * s {
            break;
        }
    }
    2.0 * s
}

/// Fraction of the ideal-metal Matsubara sum beyond index `n_max` at separation d.
pub fn tail_fraction(t_k: f64, d_m: f64, n_max: usize) -> f64 {
    let dy = 2.0 * d_m * ev_to_wavenumber(first_matsubara_ev(t_k));
    let mut total = 0.5 * ideal_term(0.0);
    let mut tail = 0.0;
    let mut n = 1usize;
    loop {
        let v = ideal_term(n as f64 * dy);
        if n > n_max {
            tail += v;
        }
        total += v;
        if n > n_max && v < 1e-17 * total {
            break;
        }
        n += 1;
    }
    tail / total
}

/// Smallest n_max meeting the tail tolerance at separation d.
pub fn matsubara_grid(t_k: f64, d_m: f64) -> Result<MatsubaraGrid> {
    if !(t_k > 0.0) || !(d_m > 0.0) {
        return Err(Error::Domain(format!("matsubara grid needs T > 0 and d > 0 (T={t_k}, d={d_m})")));
    }
    let dy = 2.0 * d_m * ev_to_wavenumber(first_matsubara_ev(t_k));
    // per-term weights are monotone; accumulate from the top
    let mut weights = vec![0.5 * ideal_term(0.0)];
    let mut n = 1usize;
    loop {
        let v = ideal_term(n as f64 * dy);
        weights.push(v);
        if v < 1e-17 * weights.iter().sum::<f64>() {
            break;
        }
        n += 1;
    }
    let total: f64 = weights.iter().sum();
    let mut tail = 0.0;
    let mut n_max = weights.len() - 1;
    while n_max > 0 && tail + weights[n_max] < TAIL_TOLERANCE * total {
        tail += weights[n_max];
        n_max -= 1;
    }
    Ok(grid_with_nmax(t_k, n_max.max(1)))
}

pub fn grid_with_nmax(t_k: f64, n_max: usize) -> MatsubaraGrid {
    let x1 = first_matsubara_ev(t_k);
    MatsubaraGrid { temperature_k: t_k, xi_ev: (0..=n_max).map(|n| n as f64 * x1).collect(), n_max }
}

/// One plate of the pair.
#[derive(Debug, Clone, PartialEq)]
pub enum Plate {
    HalfSpace(DielectricModel),
    /// Film of finite thickness on a semi-infinite substrate.
    Film { film: DielectricModel, thickness_m: f64, substrate: DielectricModel },
}

impl Plate {
    fn static_limit(&self) -> StaticLimit {
        match self {
            Plate::HalfSpace(m) => m.static_limit(),
            Plate::Film { film, .. } => film.static_limit(),
        }
    }
}

/// ε(iξ_n) of a plate sampled on a grid (index 0 unused).
#[derive(Debug, Clone)]
pub struct PlateSpectrum {
    eps: Vec<f64>,
    eps_substrate: Option<Vec<f64>>,
    thickness_m: f64,
    limit: StaticLimit,
}

fn sample_model(m: &DielectricModel, xi: &[f64]) -> Result<Vec<f64>> {
    xi.par_iter()
        .enumerate()
        .map(|(n, &x)| if n == 0 { Ok(f64::NAN) } else { m.eps_imag_axis(x) })
        .collect()
}

impl PlateSpectrum {
    pub fn sample(plate: &Plate, grid: &MatsubaraGrid) -> Result<Self> {
        Ok(match plate {
            Plate::HalfSpace(m) => {
                Self { eps: sample_model(m, &grid.xi_ev)?, eps_substrate: None, thickness_m: 0.0, limit: m.static_limit() }
            }
            Plate::Film { film, thickness_m, substrate } => {
                if !(*thickness_m > 0.0) {
                    return Err(Error::InvalidParameter("film thickness must be > 0".into()));
                }
                Self {
                    eps: sample_model(film, &grid.xi_ev)?,
                    eps_substrate: Some(sample_model(substrate, &grid.xi_ev)?),
                    thickness_m: *thickness_m,
                    limit: plate.static_limit(),
                }
            }
        })
    }

    /// Build directly from a closure, e.g. ε = const for ideal-conductor checks.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: &MatsubaraGrid, f: F, limit: StaticLimit) -> Self {
        let eps = grid.xi_ev.iter().enumerate().map(|(n, &x)| if n == 0 { f64::NAN } else { f(x) }).collect();
        Self { eps, eps_substrate: None, thickness_m: 0.0, limit }
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.len() <= 1
    }

    /// (r_TM, r_TE) at Matsubara index n ≥ 1 and in-plane wavenumber via κ₀ (1/m); q = ξ/c.
    fn reflection(&self, n: usize, k0: f64, q: f64) -> (f64, f64) {
        let e = self.eps[n];
        let k = (k0 * k0 + (e - 1.0) * q * q).sqrt();
        let r_tm = (e * k0 - k) / (e * k0 + k);
        let r_te = (k0 - k) / (k0 + k);
        match &self.eps_substrate {
            None => (r_tm, r_te),
            Some(sub) => {
                let es = sub[n];
                let ks = (k0 * k0 + (es - 1.0) * q * q).sqrt();
                let r23_tm = (es * k - e * ks) / (es * k + e * ks);
                let r23_te = (k - ks) / (k + ks);
                let ph = (-2.0 * k * self.thickness_m).exp();
                (
                    (r_tm + r23_tm * ph) / (1.0 + r_tm * r23_tm * ph),
                    (r_te + r23_te * ph) / (1.0 + r_te * r23_te * ph),
                )
            }
        }
    }

    fn reflection_zero(&self, k0: f64, rule: ZeroFrequency) -> (f64, f64) {
        match self.limit {
            StaticLimit::Metallic { plasma_energy_ev } => {
                let r_te = match rule {
                    ZeroFrequency::Drude => 0.0,
                    ZeroFrequency::Plasma => {
                        let p = ev_to_wavenumber(plasma_energy_ev);
                        let s = (k0 * k0 + p * p).sqrt();
                        (k0 - s) / (k0 + s)
                    }
                };
                (1.0, r_te)
            }
            StaticLimit::Dielectric { eps_static } => ((eps_static - 1.0) / (eps_static + 1.0), 0.0),
        }
    }
}

/// Casimir pressure (Pa, attractive < 0) between plates a and b at separation d.
pub fn pressure_pp(
    d_m: f64,
    grid: &MatsubaraGrid,
    a: &PlateSpectrum,
    b: &PlateSpectrum,
    zero: ZeroFrequency,
) -> Result<f64> {
    if !(d_m > 0.0) {
        return Err(Error::Domain(format!("separation must be > 0, got {d_m}")));
    }
    if a.len() <= grid.n_max || b.len() <= grid.n_max {
        return Err(Error::InvalidParameter("plate spectra shorter than the Matsubara grid".into()));
    }
    let rule = gauss_legendre(16);
    let two_d = 2.0 * d_m;
    let terms: Vec<f64> = (0..=grid.n_max)
        .into_par_iter()
        .map(|n| {
            let q = ev_to_wavenumber(grid.xi_ev[n]);
            let yn = two_d * q;
            let mut s = 0.0;
            for w in T_BREAKS.windows(2) {
                s += rule.integrate(w[0], w[1], |t| {
                    let y = yn + t;
                    let k0 = y / two_d;
                    let ((ta, ea), (tb, eb)) = if n == 0 {
                        (a.reflection_zero(k0, zero), b.reflection_zero(k0, zero))
                    } else {
                        (a.reflection(n, k0, q), b.reflection(n, k0, q))
                    };
                    let ex = (-y).exp();
                    let f = |ra: f64, rb: f64| {
                        let x = ra * rb * ex;
                        x / (1.0 - x)
                    };
                    y * y * (f(ta, tb) + f(ea, eb))
                });
            }
            if n == 0 {
                0.5 * s
            } else {
                s
            }
        })
        .collect();
    let mut acc = NeumaierSum::new();
    for t in terms {
        if !t.is_finite() {
            return Err(Error::Quadrature(format!("non-finite Matsubara term at d = {d_m:e} m")));
        }
        acc.add(t);
    }
    let kt = K_B * grid.temperature_k;
    Ok(-kt / PI * acc.value() / (two_d * two_d * two_d))
}

/// (1/R)∂F/∂d in the proximity-force approximation: 2π·P.
pub fn gradient_over_r(pressure_pa: f64) -> f64 {
    2.0 * PI * pressure_pa
}

/// Ideal-conductor zero-temperature pressure magnitude π²ħc/(240 d⁴).
pub fn ideal_pressure_magnitude(d_m: f64) -> f64 {
    PI * PI * HBAR * C_LIGHT / (240.0 * d_m.powi(4))
}

/// Pressure evaluator for a fixed plate pair, temperature and zero-frequency rule,
/// with permittivities cached on the densest grid needed (smallest separation).
#[derive(Debug, Clone)]
pub struct LifshitzCalculator {
    pub temperature_k: f64,
    pub zero: ZeroFrequency,
    grid: MatsubaraGrid,
    a: PlateSpectrum,
    b: PlateSpectrum,
}

impl LifshitzCalculator {
    pub fn new(a: &Plate, b: &Plate, temperature_k: f64, zero: ZeroFrequency, d_min_m: f64) -> Result<Self> {
        let grid = matsubara_grid(temperature_k, d_min_m)?;
        Ok(Self {
            temperature_k,
            zero,
            a: PlateSpectrum::sample(a, &grid)?,
            b: PlateSpectrum::sample(b, &grid)?,
            grid,
        })
    }

    pub fn pressure(&self, d_m: f64) -> Result<f64> {
        let g = matsubara_grid(self.temperature_k, d_m)?;
        if g.n_max > self.grid.n_max {
            return Err(Error::Domain(format!(
                "separation {:.2} nm below the cached grid minimum; rebuild with smaller d_min",
                d_m * 1e9
            )));
        }
        pressure_pp(d_m, &g, &self.a, &self.b, self.zero)
    }

    pub fn pressures(&self, d_m: &[f64]) -> Result<Vec<f64>> {
        d_m.iter().map(|&d| self.pressure(d)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dielectric::MaterialLibrary;

    #[test]
    fn first_matsubara_at_room_temperature() {
        let g = grid_with_nmax(300.0, 3);
        assert!((g.xi_ev[1] - 0.1624).abs() < 2e-4);
        assert_eq!(g.xi_ev[0], 0.0);
        assert!((g.xi_ev[2] - 2.0 * g.xi_ev[1]).abs() < 1e-15);
    }

    #[test]
    fn tail_criterion() {
        let g = matsubara_grid(300.0, 100e-9).unwrap();
        assert!(tail_fraction(300.0, 100e-9, g.n_max) < TAIL_TOLERANCE);
        assert!(tail_fraction(300.0, 100e-9, 1000) < 1e-3);
        assert!(g.n_max <= 1000);
        assert!(tail_fraction(300.0, 100e-9, g.n_max - 1) >= TAIL_TOLERANCE);
    }

    #[test]
    fn vacuum_pair_is_exactly_zero() {
        let g = matsubara_grid(300.0, 100e-9).unwrap();
        let v = PlateSpectrum::sample(&Plate::HalfSpace(DielectricModel::vacuum()), &g).unwrap();
        assert_eq!(pressure_pp(100e-9, &g, &v, &v, ZeroFrequency::Drude).unwrap(), 0.0);
    }

    #[test]
    fn ideal_conductor_limit() {
        let d = 100e-9;
        let g = matsubara_grid(10.0, d).unwrap();
        let lim = StaticLimit::Dielectric { eps_static: 1e8 };
        let p = PlateSpectrum::from_fn(&g, |_| 1e8, lim);
        let got = pressure_pp(d, &g, &p, &p, ZeroFrequency::Drude).unwrap();
        let want = ideal_pressure_magnitude(d);
        assert!((want - 13.0).abs() < 0.05);
        assert!((-got - want).abs() < 0.01 * want, "{got} vs {want}");
        assert!((gradient_over_r(-want) + 81.7).abs() < 0.1);
    }

    #[test]
    fn quadrature_converged_to_tolerance() {
        // doubling the rule order changes the result by far less than 1e-4
        let d = 100e-9;
        let g = matsubara_grid(300.0, d).unwrap();
        let au = PlateSpectrum::sample(&Plate::HalfSpace(MaterialLibrary::bundled().get("au").unwrap().clone()), &g).unwrap();
        let p16 = pressure_pp(d, &g, &au, &au, ZeroFrequency::Drude).unwrap();
        let mut acc = 0.0;
        let rule = crate::numeric::gauss_legendre(32);
        for n in 0..=g.n_max {
            let q = ev_to_wavenumber(g.xi_ev[n]);
            let yn = 2.0 * d * q;
            let mut s = crate::numeric::integrate_panels(rule, &T_BREAKS, |t| {
                let y = yn + t;
                let k0 = y / (2.0 * d);
                let (tm, te) = if n == 0 { au.reflection_zero(k0, ZeroFrequency::Drude) } else { au.reflection(n, k0, q) };
                let ex = (-y).exp();
                y * y * ((tm * tm * ex) / (1.0 - tm * tm * ex) + (te * te * ex) / (1.0 - te * te * ex))
            });
            if n == 0 {
                s *= 0.5;
            }
            acc += s;
        }
        let p32 = -K_B * 300.0 / PI * acc / (2.0 * d).powi(3);
        assert!(((p16 - p32) / p32).abs() < 1e-6);
    }

    #[test]
    fn film_flag_approaches_half_space_for_thick_films() {
        let lib = MaterialLibrary::bundled();
        let au = Plate::HalfSpace(lib.get("au").unwrap().clone());
        let ito = lib.get("ito").unwrap().clone();
        let glass = lib.get("float_glass").unwrap().clone();
        let half = LifshitzCalculator::new(&au, &Plate::HalfSpace(ito.clone()), 300.0, ZeroFrequency::Drude, 100e-9).unwrap();
        let thick = Plate::Film { film: ito.clone(), thickness_m: 50e-6, substrate: glass.clone() };
        let thin = Plate::Film { film: ito, thickness_m: 190e-9, substrate: glass };
        let pt = LifshitzCalculator::new(&au, &thick, 300.0, ZeroFrequency::Drude, 100e-9).unwrap();
        let p190 = LifshitzCalculator::new(&au, &thin, 300.0, ZeroFrequency::Drude, 100e-9).unwrap();
        let (a, b, c) = (half.pressure(100e-9).unwrap(), pt.pressure(100e-9).unwrap(), p190.pressure(100e-9).unwrap());
        assert!(((a - b) / a).abs() < 1e-6);
        assert!(c.abs() <= a.abs() * 1.0001);
    }
}
