use crate::error::{Error, Result};
use crate::units::HC_EV_NM;

/// Lossless Sellmeier glass: ε = 1 + Σ Bᵢλ²/(λ² − Cᵢ), Cᵢ in µm².
#[derive(Debug, Clone, PartialEq)]
pub struct SellmeierParams {
    pub b: Vec<f64>,
    pub c_um2: Vec<f64>,
}

impl SellmeierParams {
    pub fn new(b: Vec<f64>, c_um2: Vec<f64>) -> Result<Self> {
        if b.len() != c_um2.len() || b.is_empty() || b.iter().any(|x| *x < 0.0) || c_um2.iter().any(|x| *x <= 0.0) {
            return Err(Error::InvalidParameter("sellmeier: need matching B >= 0, C > 0 lists".into()));
        }
        Ok(Self { b, c_um2 })
    }

    /// Sapphire (ordinary ray).
    pub fn sapphire() -> Self {
        Self {
            b: vec![1.431_349_3, 0.650_547_13, 5.341_402_1],
            c_um2: vec![0.072_663_1f64.powi(2), 0.119_324_2f64.powi(2), 18.028_251f64.powi(2)],
        }
    }

    /// Borosilicate crown, used as a stand-in for float glass.
    pub fn crown_glass() -> Self {
        Self {
            b: vec![1.039_612_12, 0.231_792_344, 1.010_469_45],
            c_um2: vec![0.006_000_698_67, 0.020_017_914_4, 103.560_653],
        }
    }

    /// Resonance energies (eV) hc/√Cᵢ.
    fn resonance_ev(&self, i: usize) -> f64 {
        HC_EV_NM * 1e-3 / self.c_um2[i].sqrt()
    }

    pub fn eps_real_axis(&self, e: f64) -> f64 {
        1.0 + (0..self.b.len())
            .map(|i| {
                let r = e / self.resonance_ev(i);
                self.b[i] / (1.0 - r * r)
            })
            .sum::<f64>()
    }

    pub fn eps_imag_axis(&self, xi: f64) -> f64 {
        1.0 + (0..self.b.len())
            .map(|i| {
                let r = xi / self.resonance_ev(i);
                self.b[i] / (1.0 + r * r)
            })
            .sum::<f64>()
    }

    pub fn static_eps(&self) -> f64 {
        1.0 + self.b.iter().sum::<f64>()
    }
}
