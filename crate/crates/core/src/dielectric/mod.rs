//! Permittivity models on the real and imaginary frequency axes.

mod drude;
mod sellmeier;
mod table;
mod tauc_lorentz;

pub use drude::{drude_eps, DrudeParams, Frequency};
pub use sellmeier::SellmeierParams;
pub use table::TabulatedEps2;
pub use tauc_lorentz::{tauc_lorentz_eps2, TaucLorentzParams, TaucLorentzSum};

use crate::error::{Error, Result};
use crate::io::keyvalue::{KvDocument, KvSection};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::OnceLock;

const BUNDLED: &str = include_str!("materials.dat");

/// How a material behaves at the zero-frequency Matsubara term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StaticLimit {
    /// Has a Drude pole; carries ω_p for the plasma-prescription variant.
    Metallic { plasma_energy_ev: f64 },
    Dielectric { eps_static: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DielectricModel {
    Constant(Complex64),
    Drude(DrudeParams),
    TaucLorentzSum(TaucLorentzSum),
    Table(TabulatedEps2),
    Sellmeier(SellmeierParams),
}

impl DielectricModel {
    pub fn vacuum() -> Self {
        DielectricModel::Constant(Complex64::new(1.0, 0.0))
    }

    /// Real-axis permittivity at photon energy E (eV).
    pub fn eps(&self, e: f64) -> Result<Complex64> {
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::Domain(format!("photon energy must be finite and > 0, got {e}")));
        }
        let v = match self {
            DielectricModel::Constant(c) => *c,
            DielectricModel::Drude(d) => drude_eps(d, Frequency::Real(e))?,
            DielectricModel::TaucLorentzSum(m) => m.eps_real_axis(e)?,
            DielectricModel::Table(t) => Complex64::new(t.kramers_kronig_real(e)?, t.eps2(e)),
            DielectricModel::Sellmeier(s) => Complex64::new(s.eps_real_axis(e), 0.0),
        };
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Domain(format!("non-finite permittivity at {e} eV")));
        }
        Ok(v)
    }

    /// ε(iξ) for ξ > 0 (eV).
    pub fn eps_imag_axis(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(Error::Domain(format!("imaginary-axis energy must be > 0, got {xi}")));
        }
        match self {
            DielectricModel::Constant(c) => Ok(c.re),
            DielectricModel::Drude(d) => Ok(drude_eps(d, Frequency::Imaginary(xi))?.re),
            DielectricModel::TaucLorentzSum(m) => m.eps_imag_axis(xi),
            DielectricModel::Table(t) => t.eps_imag_axis(xi),
            DielectricModel::Sellmeier(s) => Ok(s.eps_imag_axis(xi)),
        }
    }

    pub fn static_limit(&self) -> StaticLimit {
        let metallic = |d: &DrudeParams| StaticLimit::Metallic { plasma_energy_ev: d.plasma_energy_ev };
        match self {
            DielectricModel::Constant(c) => StaticLimit::Dielectric { eps_static: c.re },
            DielectricModel::Drude(d) => metallic(d),
            DielectricModel::TaucLorentzSum(m) => match &m.drude {
                Some(d) => metallic(d),
                None => StaticLimit::Dielectric { eps_static: m.eps_imag_axis(1e-6).unwrap_or(m.eps_inf) },
            },
            DielectricModel::Table(t) => match t.tail() {
                Some(d) => metallic(d),
                None => StaticLimit::Dielectric { eps_static: t.eps_imag_axis(1e-6).unwrap_or(1.0) },
            },
            DielectricModel::Sellmeier(s) => StaticLimit::Dielectric { eps_static: s.static_eps() },
        }
    }

    /// Builds a model from one `[section]` of a material file.
    pub fn from_section(sec: &KvSection) -> Result<Self> {
        let model = sec.get("model").ok_or_else(|| Error::Config(format!("[{}] missing 'model'", sec.name)))?;
        let drude_opt = |pk: &str, rk: &str| -> Result<Option<DrudeParams>> {
            match (sec.parse_opt::<f64>(pk)?, sec.parse_opt::<f64>(rk)?) {
                (Some(p), r) => Ok(Some(DrudeParams::new(p, r.unwrap_or(0.0))?)),
                (None, None) => Ok(None),
                (None, Some(_)) => Err(Error::Config(format!("[{}] {rk} given without {pk}", sec.name))),
            }
        };
        match model {
            "constant" => Ok(DielectricModel::Constant(Complex64::new(
                sec.parse_req("eps_real")?,
                sec.parse_or("eps_imag", 0.0)?,
            ))),
            "drude" => Ok(DielectricModel::Drude(DrudeParams::new(
                sec.parse_req("plasma_eV")?,
                sec.parse_req("relaxation_eV")?,
            )?)),
            "tauc_lorentz_sum" => {
                let mut osc = Vec::new();
                for i in 1.. {
                    let key = |s: &str| format!("tl{i}_{s}");
                    let Some(a) = sec.parse_opt::<f64>(&key("amplitude_eV"))? else { break };
                    osc.push(TaucLorentzParams::new(
                        a,
                        sec.parse_req(&key("peak_eV"))?,
                        sec.parse_req(&key("broadening_eV"))?,
                        sec.parse_req(&key("gap_eV"))?,
                    )?);
                }
                let drude = drude_opt("drude_plasma_eV", "drude_relaxation_eV")?;
                Ok(DielectricModel::TaucLorentzSum(TaucLorentzSum::new(sec.parse_or("eps_inf", 1.0)?, osc, drude)?))
            }
            "table" => {
                let tail = drude_opt("tail_plasma_eV", "tail_relaxation_eV")?;
                let (e, v): (Vec<f64>, Vec<f64>) = sec.rows.iter().copied().unzip();
                Ok(DielectricModel::Table(TabulatedEps2::new(e, v, tail)?))
            }
            "sellmeier" => {
                let mut b = Vec::new();
                let mut c = Vec::new();
                for i in 1.. {
                    let Some(bi) = sec.parse_opt::<f64>(&format!("b{i}"))? else { break };
                    b.push(bi);
                    c.push(sec.parse_req(&format!("c{i}_um2"))?);
                }
                Ok(DielectricModel::Sellmeier(SellmeierParams::new(b, c)?))
            }
            other => Err(Error::Config(format!("[{}] unknown model '{other}'", sec.name))),
        }
    }
}

/// Named materials.
#[derive(Debug, Clone, Default)]
pub struct MaterialLibrary {
    materials: BTreeMap<String, DielectricModel>,
    approximate: Vec<String>,
}

impl MaterialLibrary {
    pub fn parse(text: &str) -> Result<Self> {
        let doc = KvDocument::parse(text)?;
        let mut lib = MaterialLibrary::default();
        for sec in doc.named_sections() {
            lib.materials.insert(sec.name.clone(), DielectricModel::from_section(sec)?);
            if sec.parse_or("approximate", false)? {
                lib.approximate.push(sec.name.clone());
            }
        }
        Ok(lib)
    }

    /// The data set shipped with the crate (au, ito, sapphire, float_glass, ...).
    pub fn bundled() -> &'static MaterialLibrary {
        static LIB: OnceLock<MaterialLibrary> = OnceLock::new();
        LIB.get_or_init(|| MaterialLibrary::parse(BUNDLED).expect("bundled material file parses"))
    }

    pub fn get(&self, name: &str) -> Result<&DielectricModel> {
        self.materials
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown material '{name}'")))
    }

    pub fn is_approximate(&self, name: &str) -> bool {
        self.approximate.iter().any(|n| n == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.materials.keys().map(|s| s.as_str())
    }

    /// Adds or replaces entries from another library (user files override bundled data).
    pub fn merge(&mut self, other: MaterialLibrary) {
        self.materials.extend(other.materials);
        self.approximate.extend(other.approximate);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_library_loads() {
        let lib = MaterialLibrary::bundled();
        for n in ["au", "ito", "sapphire", "float_glass", "vacuum", "ideal_metal", "au_drude"] {
            lib.get(n).unwrap();
        }
        assert!(lib.is_approximate("ito"));
        assert!(!lib.is_approximate("au"));
        match lib.get("au").unwrap() {
            DielectricModel::Table(t) => {
                assert_eq!(t.energies().len(), 50);
                let (lo, hi) = t.support();
                assert!(lo <= 0.1 && hi >= 1e4);
            }
            _ => panic!("au should be a table"),
        }
    }

    #[test]
    fn bundled_gold_values() {
        let au = MaterialLibrary::bundled().get("au").unwrap();
        // interband-modified real part near 2.5 eV (measured ≈ −2.3)
        let e = au.eps(2.5).unwrap();
        assert!(e.re < -1.5 && e.re > -3.5, "{e}");
        // infrared region follows the Drude tail
        let d = DrudeParams::gold();
        let ir = au.eps(0.3).unwrap().re;
        assert!((ir - d.eps_real_axis(0.3).re).abs() < 0.03 * ir.abs());
        let x = au.eps_imag_axis(1.0).unwrap();
        assert!(x > 79.0 && x < 95.0, "{x}");
        assert!(matches!(au.static_limit(), StaticLimit::Metallic { plasma_energy_ev } if plasma_energy_ev == 9.0));
    }

    #[test]
    fn ito_is_transparent_in_the_visible() {
        let ito = MaterialLibrary::bundled().get("ito").unwrap();
        let n = ito.eps(2.0).unwrap().sqrt();
        assert!(n.re > 1.1 && n.im < 0.05, "{n}");
        // metallic below the screened plasma edge
        assert!(ito.eps(0.3).unwrap().re < 0.0);
    }

    #[test]
    fn parse_errors_are_reported() {
        assert!(MaterialLibrary::parse("[x]\nmodel = plasma\n").is_err());
        assert!(MaterialLibrary::parse("[x]\nplasma_eV = 1\n").is_err());
        assert!(MaterialLibrary::parse("[x]\nmodel = drude\nplasma_eV = 1\n").is_err());
        let lib = MaterialLibrary::parse("[x]\nmodel = drude\nplasma_eV = 1\nrelaxation_eV = 0.1\n").unwrap();
        assert!(lib.get("y").is_err());
    }

    #[test]
    fn domain_errors() {
        let m = DielectricModel::Drude(DrudeParams::gold());
        assert!(m.eps(0.0).is_err());
        assert!(m.eps_imag_axis(-1.0).is_err());
    }
}
