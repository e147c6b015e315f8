use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("snap-in: discriminant {discriminant:.3e} < 0 at gap {gap_nm:.2} nm")]
    SnapIn { gap_nm: f64, discriminant: f64 },
    #[error("contact: gap {gap_nm:.3} nm at t = {t:.6} s")]
    Contact { gap_nm: f64, t: f64 },
    #[error("separation {d_nm:.2} nm outside the force curve grid [{lo_nm:.1}, {hi_nm:.1}] nm")]
    Extrapolation { d_nm: f64, lo_nm: f64, hi_nm: f64 },
    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("fit degenerate: {0}")]
    FitDegenerate(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("feedback loop diverged (V_DC = {v_dc:.3} V); check loop sign")]
    LoopSign { v_dc: f64 },
    #[error("no overlap between runs: {0}")]
    NoOverlap(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
