use crate::dielectric::MaterialLibrary;
use crate::error::{Error, Result};
use crate::io::keyvalue::KvDocument;
use crate::optics::{Layer, LayerStack};
use std::path::{Path, PathBuf};

/// A layer stack plus the energy window it is evaluated on.
///
/// ```text
/// ambient = vacuum
/// substrate = float_glass
/// e_min_eV = 0.8
/// e_max_eV = 4.0
/// points = 321
/// [layer]
/// material = ito
/// thickness_nm = 190
/// ```
#[derive(Debug, Clone)]
pub struct StackFile {
    pub stack: LayerStack,
    pub energies_ev: Vec<f64>,
    /// Layer names in order, for reporting.
    pub materials: Vec<String>,
}

impl StackFile {
    /// `base` resolves a relative `material_file`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let doc = KvDocument::parse(text)?;
        let g = doc.global();
        let mut lib = MaterialLibrary::bundled().clone();
        if let Some(p) = g.get("material_file") {
            let mut path = PathBuf::from(p);
            if let (true, Some(b)) = (path.is_relative(), base) {
                path = b.join(path);
            }
            lib.merge(MaterialLibrary::parse(&std::fs::read_to_string(&path)?)?);
        }
        let ambient = lib.get(g.get("ambient").unwrap_or("vacuum"))?.clone();
        let substrate = lib.get(g.parse_req::<String>("substrate")?.as_str())?.clone();
        let mut layers = Vec::new();
        let mut materials = Vec::new();
        for s in doc.named_sections() {
            if s.name != "layer" {
                return Err(Error::Config(format!("unexpected section [{}] in stack file", s.name)));
            }
            let m: String = s.parse_req("material")?;
            layers.push(Layer { material: lib.get(&m)?.clone(), thickness_nm: s.parse_req("thickness_nm")? });
            materials.push(m);
        }
        let lo: f64 = g.parse_or("e_min_eV", 0.8)?;
        let hi: f64 = g.parse_or("e_max_eV", 4.0)?;
        let n: usize = g.parse_or("points", 321)?;
        if !(lo > 0.0 && hi > lo) || n < 2 {
            return Err(Error::Config(format!("bad energy window {lo}..{hi} eV with {n} points")));
        }
        let energies_ev = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        Ok(Self { stack: LayerStack::new(ambient, layers, substrate)?, energies_ev, materials })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_film_on_glass() {
        let s = StackFile::parse(
            "substrate = float_glass\npoints = 11\n[layer]\nmaterial = ito\nthickness_nm = 190\n",
            None,
        )
        .unwrap();
        assert_eq!(s.stack.layers.len(), 1);
        assert_eq!(s.energies_ev.len(), 11);
        assert!((s.energies_ev[10] - 4.0).abs() < 1e-12);
        assert_eq!(s.materials, vec!["ito".to_string()]);
    }

    #[test]
    fn rejects_unknown_sections_and_materials() {
        assert!(StackFile::parse("substrate = glass_x\n", None).is_err());
        assert!(StackFile::parse("substrate = sapphire\n[film]\nmaterial = au\n", None).is_err());
        assert!(StackFile::parse("substrate = sapphire\n[layer]\nmaterial = au\nthickness_nm = -3\n", None).is_err());
    }
}
