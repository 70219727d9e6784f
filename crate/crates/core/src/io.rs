//! File interchange: geometry configs, density matrices, scan CSVs with
//! metadata sidecars, setting tables, and reconstruction reports. All
//! formats are plain UTF-8 text with comma or whitespace separation and at
//! least 12 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::optics::OpticalGeometry;
use crate::quantum::DensityMatrix;
use crate::sim::{ScanKind, ScanRecord};
use crate::tomo::{Setting, SettingTable, TomoError};
use crate::units::{format_length, format_number, parse_length, UnitsError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Units(#[from] UnitsError),
    #[error(transparent)]
    Table(#[from] TomoError),
    #[error("missing key {0:?}")]
    MissingKey(String),
    #[error("parse error: {0}")]
    Parse(String),
}

fn parse_err(msg: impl Into<String>) -> IoError {
    IoError::Parse(msg.into())
}

// key = value lines; '#' starts a comment; keys are case-sensitive.
fn parse_key_values(text: &str) -> Result<Vec<(String, String)>, IoError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("line {}: expected key = value", no + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn lookup<'a>(kv: &'a [(String, String)], key: &str) -> Result<&'a str, IoError> {
    kv.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| IoError::MissingKey(key.to_string()))
}

/// Parses a geometry config. Mandatory keys (each value carries a unit):
/// `lambda`, `slit_width`, `slit_offsets` (comma-separated), `focal_length`,
/// `L` (slit-to-lens), `z` (lens-to-detector, `f`-relative allowed).
pub fn parse_geometry(text: &str) -> Result<OpticalGeometry, IoError> {
    let kv = parse_key_values(text)?;
    let focal_length = parse_length(lookup(&kv, "focal_length")?)?;
    let g = OpticalGeometry {
        wavelength: parse_length(lookup(&kv, "lambda")?)?,
        slit_width: parse_length(lookup(&kv, "slit_width")?)?,
        slit_offsets: crate::units::parse_length_list(lookup(&kv, "slit_offsets")?)?,
        focal_length,
        slit_to_lens: parse_length(lookup(&kv, "L")?)?,
        lens_to_detector: crate::units::parse_length_or_focal(lookup(&kv, "z")?, focal_length)?,
    };
    g.validate().map_err(|e| parse_err(e.to_string()))?;
    Ok(g)
}

pub fn format_geometry(g: &OpticalGeometry) -> String {
    let offsets: Vec<String> = g.slit_offsets.iter().map(|&o| format_length(o)).collect();
    format!(
        "lambda = {}\nslit_width = {}\nslit_offsets = {}\nfocal_length = {}\nL = {}\nz = {}\n",
        format_length(g.wavelength),
        format_length(g.slit_width),
        offsets.join(", "),
        format_length(g.focal_length),
        format_length(g.slit_to_lens),
        format_length(g.lens_to_detector),
    )
}

pub fn read_geometry(path: &Path) -> Result<OpticalGeometry, IoError> {
    parse_geometry(&std::fs::read_to_string(path)?)
}

pub fn write_geometry(path: &Path, g: &OpticalGeometry) -> Result<(), IoError> {
    Ok(std::fs::write(path, format_geometry(g))?)
}

/// Density-matrix text format: a `dim` line, a `real` block and an `imag`
/// block (dim whitespace-separated rows each).
pub fn format_density(rho: &DensityMatrix) -> String {
    let n = rho.dim();
    let mut out = format!("dim {n}\nreal\n");
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| format_number(rho.matrix()[(i, j)].re))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out.push_str("imag\n");
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| format_number(rho.matrix()[(i, j)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse_density(text: &str) -> Result<DensityMatrix, IoError> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap().trim())
        .filter(|l| !l.is_empty());
    let dim_line = lines.next().ok_or_else(|| parse_err("empty matrix file"))?;
    let n: usize = dim_line
        .strip_prefix("dim")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| parse_err("first line must be `dim <n>`"))?;
    if n == 0 || n > 64 {
        return Err(parse_err(format!("unreasonable dimension {n}")));
    }
    let mut read_block = |name: &str| -> Result<Vec<Vec<f64>>, IoError> {
        if lines.next() != Some(name) {
            return Err(parse_err(format!("expected `{name}` block")));
        }
        (0..n)
            .map(|_| {
                let row = lines
                    .next()
                    .ok_or_else(|| parse_err(format!("truncated `{name}` block")))?;
                let vals: Result<Vec<f64>, _> =
                    row.split_whitespace().map(str::parse::<f64>).collect();
                let vals = vals.map_err(|e| parse_err(format!("bad number: {e}")))?;
                if vals.len() != n {
                    return Err(parse_err(format!(
                        "row has {} entries, expected {n}",
                        vals.len()
                    )));
                }
                Ok(vals)
            })
            .collect()
    };
    let re = read_block("real")?;
    let im = read_block("imag")?;
    let mat = DMatrix::from_fn(n, n, |i, j| C64::new(re[i][j], im[i][j]));
    Ok(DensityMatrix::hermitized(mat))
}

pub fn read_density(path: &Path) -> Result<DensityMatrix, IoError> {
    parse_density(&std::fs::read_to_string(path)?)
}

pub fn write_density(path: &Path, rho: &DensityMatrix) -> Result<(), IoError> {
    Ok(std::fs::write(path, format_density(rho))?)
}

/// Path of the metadata sidecar belonging to a scan CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta")
}

pub fn format_scan_csv(scan: &ScanRecord) -> String {
    let mut out = String::from("x_m,value\n");
    for &(x, v) in &scan.samples {
        let _ = writeln!(out, "{},{}", format_number(x), format_number(v));
    }
    out
}

pub fn format_scan_meta(scan: &ScanRecord) -> String {
    let mut out = String::new();
    let kind = match scan.kind {
        ScanKind::Counts => "counts",
        ScanKind::ProbabilityDensity => "probability_density",
    };
    let _ = writeln!(out, "kind = {kind}");
    if let Some(shots) = scan.total_shots {
        let _ = writeln!(out, "shots = {shots}");
    }
    if let Some(seed) = scan.seed {
        let _ = writeln!(out, "seed = {seed}");
    }
    let _ = writeln!(
        out,
        "detector_width = {}",
        format_length(scan.detector_width)
    );
    let _ = writeln!(
        out,
        "accidental_rate = {}",
        format_number(scan.accidental_rate)
    );
    if let Some(xb) = scan.arm_b_x {
        let _ = writeln!(out, "arm_b_x = {}", format_length(xb));
    }
    out.push_str(&format_geometry(&scan.geometry));
    out
}

/// Writes a scan as `<path>` (CSV) plus `<path with .meta>` (settings and
/// geometry).
pub fn write_scan(csv_path: &Path, scan: &ScanRecord) -> Result<(), IoError> {
    std::fs::write(csv_path, format_scan_csv(scan))?;
    std::fs::write(sidecar_path(csv_path), format_scan_meta(scan))?;
    Ok(())
}

pub fn read_scan(csv_path: &Path) -> Result<ScanRecord, IoError> {
    let csv = std::fs::read_to_string(csv_path)?;
    let meta = std::fs::read_to_string(sidecar_path(csv_path))?;
    let mut lines = csv.lines();
    match lines.next() {
        Some("x_m,value") => {}
        other => return Err(parse_err(format!("bad scan header {other:?}"))),
    }
    let mut samples = Vec::new();
    for (no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (x, v) = line
            .split_once(',')
            .ok_or_else(|| parse_err(format!("scan line {}: expected two columns", no + 2)))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| parse_err(format!("scan line {}: {e}", no + 2)))
        };
        samples.push((parse(x)?, parse(v)?));
    }
    let kv = parse_key_values(&meta)?;
    let geometry = parse_geometry(&meta)?;
    let kind = match lookup(&kv, "kind")? {
        "counts" => ScanKind::Counts,
        "probability_density" => ScanKind::ProbabilityDensity,
        other => return Err(parse_err(format!("unknown scan kind {other:?}"))),
    };
    let parse_u64 = |s: &str| {
        s.parse::<u64>()
            .map_err(|e| parse_err(format!("bad integer: {e}")))
    };
    let scan = ScanRecord {
        geometry,
        samples,
        kind,
        total_shots: match lookup(&kv, "shots") {
            Ok(v) => Some(parse_u64(v)?),
            Err(_) => None,
        },
        seed: match lookup(&kv, "seed") {
            Ok(v) => Some(parse_u64(v)?),
            Err(_) => None,
        },
        detector_width: parse_length(lookup(&kv, "detector_width")?)?,
        accidental_rate: lookup(&kv, "accidental_rate")?
            .parse::<f64>()
            .map_err(|e| parse_err(format!("bad accidental_rate: {e}")))?,
        arm_b_x: match lookup(&kv, "arm_b_x") {
            Ok(v) => Some(parse_length(v)?),
            Err(_) => None,
        },
    };
    scan.validate().map_err(|e| parse_err(e.to_string()))?;
    Ok(scan)
}

/// Setting-table CSV: a header row of arm-A setting labels, then one row
/// per arm-B setting with its label in the first column.
pub fn format_table(t: &SettingTable) -> String {
    let labels: Vec<&str> = Setting::ALL.iter().map(|s| s.label()).collect();
    let mut out = format!(",{}\n", labels.join(","));
    for sb in Setting::ALL {
        let row: Vec<String> = Setting::ALL
            .iter()
            .map(|&sa| format_number(t.prob(sb, sa)))
            .collect();
        let _ = writeln!(out, "{},{}", sb.label(), row.join(","));
    }
    out
}

pub fn parse_table(text: &str) -> Result<SettingTable, IoError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| parse_err("empty table file"))?;
    let cols: Vec<Setting> = header
        .split(',')
        .skip(1)
        .map(|s| Setting::from_label(s).map_err(IoError::Table))
        .collect::<Result<_, _>>()?;
    if cols.len() != 6 {
        return Err(parse_err(format!(
            "expected 6 column labels, got {}",
            cols.len()
        )));
    }
    let mut probs = [[0.0; 6]; 6];
    let mut seen = 0;
    for line in lines {
        let mut fields = line.split(',');
        let row_label = fields.next().ok_or_else(|| parse_err("empty table row"))?;
        let sb = Setting::from_label(row_label)?;
        for sa in &cols {
            let field = fields
                .next()
                .ok_or_else(|| parse_err("table row too short"))?;
            probs[sb.index()][sa.index()] = field
                .trim()
                .parse::<f64>()
                .map_err(|e| parse_err(format!("bad probability: {e}")))?;
        }
        seen += 1;
    }
    if seen != 6 {
        return Err(parse_err(format!("expected 6 table rows, got {seen}")));
    }
    Ok(SettingTable::new(probs)?)
}

pub fn read_table(path: &Path) -> Result<SettingTable, IoError> {
    parse_table(&std::fs::read_to_string(path)?)
}

pub fn write_table(path: &Path, t: &SettingTable) -> Result<(), IoError> {
    Ok(std::fs::write(path, format_table(t))?)
}

/// Human-readable reconstruction report: raw and projected matrices, an
/// optional fidelity line, and free-form extras (residuals etc.).
pub fn reconstruction_report(
    raw: &DensityMatrix,
    projected: &DensityMatrix,
    fidelity: Option<(&str, f64)>,
    extras: &[(String, String)],
) -> String {
    let mut out = String::from("# reconstruction report\n\nraw matrix\n");
    out.push_str(&format_density(raw));
    out.push_str("\nprojected matrix\n");
    out.push_str(&format_density(projected));
    if let Some((target, f)) = fidelity {
        let _ = writeln!(out, "\nfidelity vs {} = {}", target, format_number(f));
    }
    for (k, v) in extras {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}
