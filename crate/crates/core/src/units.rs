//! Length parsing with unit suffixes and focal-relative notation.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum UnitsError {
    #[error("cannot parse length {0:?} (expected e.g. \"810nm\", \"40um\", \"0.1m\")")]
    InvalidLength(String),
    #[error("length {0:?} is missing a unit suffix")]
    MissingUnit(String),
    #[error("focal-relative length {0:?} used without a focal length in scope")]
    NoFocalLength(String),
}

const SUFFIXES: [(&str, f64); 7] = [
    ("nm", 1e-9),
    ("um", 1e-6),
    ("\u{b5}m", 1e-6), // µm
    ("mm", 1e-3),
    ("cm", 1e-2),
    ("km", 1e3),
    ("m", 1.0),
];

/// Parses a length with a mandatory unit suffix (`nm`, `um`/`µm`, `mm`,
/// `cm`, `m`, `km`), e.g. `810nm` or `0.05 m`.
pub fn parse_length(s: &str) -> Result<f64, UnitsError> {
    let t = s.trim();
    for (suffix, scale) in SUFFIXES {
        if let Some(body) = t.strip_suffix(suffix) {
            // Guard against "8e-7m" style being caught by "m" while the
            // body still ends in another letter (e.g. "810n" + "m").
            let body = body.trim();
            return body
                .parse::<f64>()
                .map(|v| v * scale)
                .map_err(|_| UnitsError::InvalidLength(s.to_string()));
        }
    }
    if t.parse::<f64>().is_ok() {
        return Err(UnitsError::MissingUnit(s.to_string()));
    }
    Err(UnitsError::InvalidLength(s.to_string()))
}

/// Parses a length that may also be given relative to the focal length, as
/// in `1.8f`.
pub fn parse_length_or_focal(s: &str, focal_length: f64) -> Result<f64, UnitsError> {
    let t = s.trim();
    if let Some(body) = t.strip_suffix('f') {
        let body = body.trim();
        return body
            .parse::<f64>()
            .map(|v| v * focal_length)
            .map_err(|_| UnitsError::InvalidLength(s.to_string()));
    }
    parse_length(t)
}

/// Comma-separated list of lengths, each with its own unit.
pub fn parse_length_list(s: &str) -> Result<Vec<f64>, UnitsError> {
    s.split(',').map(parse_length).collect()
}

/// Serializes a number with 13 significant digits (round-trips to the
/// stated file precision).
pub fn format_number(v: f64) -> String {
    format!("{v:.12e}")
}

/// A length in meters, for config files and sidecars.
pub fn format_length(v: f64) -> String {
    format!("{v:.12e}m")
}
