//! File formats: key-value text, two-column spectra, raw sample dumps, SVG plots.

pub mod keyvalue;
pub mod rawdump;
pub mod spectrum;
pub mod svg;
