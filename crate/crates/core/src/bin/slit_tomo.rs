//! Command-line front end: simulate coincidence scans, reconstruct density
//! matrices (Pauli table / conditional scans / single-pattern inversion),
//! dump Bloch trajectories, compare states, and self-check the bundled
//! reference data.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use slit_tomo::fixtures;
use slit_tomo::io::{self, IoError};
use slit_tomo::optics::{derive_scales, AmplitudeModel, OpticalGeometry};
use slit_tomo::povm::{bloch_trajectory, focal_plane_trajectory, Trajectory};
use slit_tomo::quantum::{fidelity, DensityMatrix, PureState};
use slit_tomo::sim::{simulate_conditional_scan, simulate_scan, ScanConfig};
use slit_tomo::tomo::{
    build_dual_frame, fit_conditional, pattern_invert, pauli_reconstruct, reconstruct_two_qubit,
    FitOptions,
};
use slit_tomo::units::{format_number, parse_length, parse_length_or_focal};

#[derive(Parser)]
#[command(
    name = "slit-tomo",
    version,
    about = "Spatial-qubit tomography toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GeometryArgs {
    /// Geometry config file; defaults to the bundled double-slit geometry.
    #[arg(long)]
    geometry: Option<PathBuf>,
    /// Override the lens-to-detector distance (length or f-relative, e.g. 1.8f).
    #[arg(long)]
    z: Option<String>,
}

#[derive(Args, Clone)]
struct WindowArgs {
    /// Full scan width centered on the axis (length, e.g. 1.2mm).
    #[arg(long)]
    window: Option<String>,
    /// Scan step (length); default gives 61 points across the window.
    #[arg(long)]
    step: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a Poisson coincidence scan and write CSV + metadata.
    Simulate {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// State: `psi-slits`, a fixture name, or a matrix file.
        #[arg(long, default_value = "psi-slits")]
        state: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Expected total coincidences over the sweep.
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[command(flatten)]
        window: WindowArgs,
        /// Detector slit width (length).
        #[arg(long, default_value = "20um")]
        detector_width: String,
        /// Fixed arm-B detector position (length); required for two-qubit states.
        #[arg(long)]
        arm_b_x: Option<String>,
        /// Expected flat background counts per point.
        #[arg(long, default_value_t = 0.0)]
        accidental_rate: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a density matrix.
    Reconstruct {
        #[command(subcommand)]
        mode: ReconstructMode,
    },
    /// Write the Bloch trajectory of the scanning detector as CSV.
    Trajectory {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fidelity between a state (file or fixture) and a pure target.
    Fidelity {
        /// State: fixture name or matrix file.
        #[arg(long)]
        state: String,
        /// Pure target: fixture name or matrix file.
        #[arg(long, default_value = "psi-slits")]
        target: String,
    },
    /// Check the bundled reference data against its published values.
    Validate,
}

#[derive(Subcommand)]
enum ReconstructMode {
    /// Linear inversion of a six-setting probability table.
    Pauli {
        /// Table CSV; defaults to the bundled reference table.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print fidelity against this pure target.
        #[arg(long)]
        target: Option<String>,
    },
    /// Dual-frame assembly of least-squares fits to conditional scans.
    Scan {
        /// Conditional scan CSVs (counts kind, with arm-B positions).
        #[arg(long, required = true, num_args = 4..)]
        scans: Vec<PathBuf>,
        /// Weight fit residuals by inverse Poisson variance.
        #[arg(long)]
        poisson_weighted: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        target: Option<String>,
    },
    /// Integral inversion of a single interference pattern.
    Pattern {
        /// Scan CSV (counts scans are converted to a density internally).
        #[arg(long)]
        scan: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        target: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

// 2 for configuration/usage problems, 1 for numeric/validation failures.
fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<IoError>().is_some()
        || e.downcast_ref::<slit_tomo::units::UnitsError>().is_some()
        || e.downcast_ref::<std::io::Error>().is_some()
    {
        2
    } else {
        1
    }
}

fn load_geometry(args: &GeometryArgs) -> anyhow::Result<OpticalGeometry> {
    let mut g = match &args.geometry {
        Some(path) => io::read_geometry(path)?,
        None => fixtures::reference_geometry_intermediate(),
    };
    if let Some(z) = &args.z {
        g = g.with_z(parse_length_or_focal(z, g.focal_length)?);
        g.validate()?;
    }
    Ok(g)
}

fn load_state(spec: &str) -> anyhow::Result<DensityMatrix> {
    match spec {
        "psi-slits" => Ok(fixtures::psi_slits_density()),
        "reference-pauli" => Ok(fixtures::pauli_density_matrix()),
        "reference-scan" => Ok(fixtures::scan_density_matrix()),
        path => Ok(io::read_density(Path::new(path))?),
    }
}

// A pure target for fidelity output: fixture name or a matrix file whose
// largest eigenvalue is ~1.
fn load_pure_target(spec: &str) -> anyhow::Result<PureState> {
    if spec == "psi-slits" {
        return Ok(fixtures::psi_slits());
    }
    let rho = load_state(spec)?;
    let eig = nalgebra::SymmetricEigen::new(rho.matrix().clone());
    let (mut best, mut best_val) = (0, f64::MIN);
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    if best_val < 1.0 - 1e-6 {
        anyhow::bail!("target {spec:?} is not a pure state (largest eigenvalue {best_val:.6})");
    }
    let col = eig.eigenvectors.column(best);
    Ok(PureState::from_slice(col.as_slice()))
}

fn grid_from_window(g: &OpticalGeometry, window: &WindowArgs) -> anyhow::Result<Vec<f64>> {
    let full = match &window.window {
        Some(w) => parse_length(w)?,
        None => {
            let s = derive_scales(g)?;
            6.0 * s.lobe_width()
        }
    };
    anyhow::ensure!(full > 0.0, "window must be positive");
    let step = match &window.step {
        Some(st) => parse_length(st)?,
        None => full / 60.0,
    };
    anyhow::ensure!(step > 0.0 && step < full, "step must lie in (0, window)");
    let n = (full / step).round() as usize + 1;
    Ok((0..n).map(|i| -full / 2.0 + i as f64 * step).collect())
}

fn report(
    raw: &DensityMatrix,
    projected: &DensityMatrix,
    target: &Option<String>,
    extras: Vec<(String, String)>,
    out: &Option<PathBuf>,
) -> anyhow::Result<()> {
    let fid = match target {
        Some(spec) => {
            let psi = load_pure_target(spec)?;
            let f = fidelity(projected, &psi)?;
            println!("fidelity vs {spec} = {f:.6}");
            Some((spec.as_str(), f))
        }
        None => None,
    };
    let text = io::reconstruction_report(raw, projected, fid, &extras);
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate {
            geometry,
            state,
            seed,
            shots,
            window,
            detector_width,
            arm_b_x,
            accidental_rate,
            out,
        } => {
            let g = load_geometry(&geometry)?;
            let rho = load_state(&state)?;
            let grid = grid_from_window(&g, &window)?;
            let cfg = ScanConfig {
                shots,
                detector_width: parse_length(&detector_width)?,
                accidental_rate,
                seed,
                model: AmplitudeModel::Sinc,
            };
            let scan = match (rho.dim(), &arm_b_x) {
                (2, _) => simulate_scan(&rho, &g, &grid, &cfg)?,
                (4, Some(xb)) => {
                    let xb = parse_length_or_focal(xb, g.focal_length)?;
                    simulate_conditional_scan(&rho, &g, &grid, &g, xb, &cfg)?
                }
                (4, None) => anyhow::bail!("two-qubit states need --arm-b-x"),
                (d, _) => anyhow::bail!("cannot scan a dimension-{d} state"),
            };
            io::write_scan(&out, &scan)?;
            println!(
                "wrote {} ({} points, seed {seed})",
                out.display(),
                scan.samples.len()
            );
        }
        Command::Reconstruct { mode } => run_reconstruct(mode)?,
        Command::Trajectory {
            geometry,
            window,
            out,
        } => {
            let g = load_geometry(&geometry)?;
            let grid = grid_from_window(&g, &window)?;
            let focal = (g.lens_to_detector - g.focal_length).abs() < 1e-12 * g.focal_length;
            let traj: Trajectory = if focal {
                focal_plane_trajectory(&g, &grid)
            } else {
                bloch_trajectory(&g, &grid)?
            };
            let mut text = String::from("x_m,bx,by,bz,azimuth_unwrapped\n");
            let mut prev: Option<f64> = None;
            let mut offset = 0.0;
            for (x, b) in &traj.points {
                let mut az = b.azimuth() + offset;
                if let Some(p) = prev {
                    // Unwrap onto a continuous branch.
                    while az - p > std::f64::consts::PI {
                        az -= 2.0 * std::f64::consts::PI;
                        offset -= 2.0 * std::f64::consts::PI;
                    }
                    while az - p < -std::f64::consts::PI {
                        az += 2.0 * std::f64::consts::PI;
                        offset += 2.0 * std::f64::consts::PI;
                    }
                }
                prev = Some(az);
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    format_number(*x),
                    format_number(b.bx),
                    format_number(b.by),
                    format_number(b.bz),
                    format_number(az)
                ));
            }
            match out {
                Some(path) => {
                    std::fs::write(&path, text)?;
                    println!(
                        "wrote {} ({} points, {} dropped)",
                        path.display(),
                        traj.points.len(),
                        traj.dropped.len()
                    );
                }
                None => print!("{text}"),
            }
        }
        Command::Fidelity { state, target } => {
            let rho = load_state(&state)?;
            let psi = load_pure_target(&target)?;
            println!("{:.6}", fidelity(&rho, &psi)?);
        }
        Command::Validate => validate()?,
    }
    Ok(())
}

fn run_reconstruct(mode: ReconstructMode) -> anyhow::Result<()> {
    match mode {
        ReconstructMode::Pauli { table, out, target } => {
            let t = match table {
                Some(path) => io::read_table(&path)?,
                None => fixtures::reference_probabilities(),
            };
            let (raw, projected) = pauli_reconstruct(&t);
            report(&raw, &projected, &target, vec![], &out)?;
        }
        ReconstructMode::Pattern { scan, out, target } => {
            let record = io::read_scan(&scan)?.to_probability_density();
            let inv = pattern_invert(&record)?;
            let extras = vec![
                (
                    "population_difference".to_string(),
                    format_number(inv.delta),
                ),
                (
                    "coherence".to_string(),
                    format!(
                        "{} {}",
                        format_number(inv.coherence.re),
                        format_number(inv.coherence.im)
                    ),
                ),
                ("envelope_overlap".to_string(), format_number(inv.beta)),
            ];
            report(&inv.raw, &inv.projected, &target, extras, &out)?;
        }
        ReconstructMode::Scan {
            scans,
            poisson_weighted,
            out,
            target,
        } => {
            let records: Vec<_> = scans
                .iter()
                .map(|p| io::read_scan(p))
                .collect::<Result<_, _>>()?;
            let (raw, projected, extras) = reconstruct_from_scans(&records, poisson_weighted)?;
            report(&raw, &projected, &target, extras, &out)?;
        }
    }
    Ok(())
}

// Fit each conditional scan, weight the fitted states by their
// background-subtracted share of the total counts, and assemble through the
// dual frame at the recorded arm-B positions.
type Reconstruction = (DensityMatrix, DensityMatrix, Vec<(String, String)>);

fn reconstruct_from_scans(
    records: &[slit_tomo::ScanRecord],
    poisson_weighted: bool,
) -> anyhow::Result<Reconstruction> {
    anyhow::ensure!(records.len() >= 4, "need at least 4 conditional scans");
    let g = records[0].geometry.clone();
    let mut points = Vec::with_capacity(records.len());
    for r in records {
        let xb = r
            .arm_b_x
            .ok_or_else(|| anyhow::anyhow!("scan is missing its arm-B position"))?;
        points.push(xb);
    }
    let frame = build_dual_frame(&g, &points, AmplitudeModel::Sinc)?;
    let opts = FitOptions {
        poisson_weighted,
        ..FitOptions::default()
    };
    let mut weights = Vec::with_capacity(records.len());
    let mut fits = Vec::with_capacity(records.len());
    for r in records {
        let fit = fit_conditional(r, &opts)?;
        let net = (r.total_counts() - r.accidental_rate * r.samples.len() as f64).max(0.0);
        weights.push(net);
        fits.push(fit);
    }
    let grand: f64 = weights.iter().sum();
    anyhow::ensure!(
        grand > 0.0,
        "all scans are empty after background subtraction"
    );
    let conditionals: Vec<DensityMatrix> = fits
        .iter()
        .zip(&weights)
        .map(|(fit, &w)| fit.density.scale(w / grand))
        .collect();
    let (raw, projected) = reconstruct_two_qubit(&conditionals, &frame)?;
    let mut extras = vec![(
        "frame_condition_number".to_string(),
        format_number(frame.condition_number),
    )];
    for (i, fit) in fits.iter().enumerate() {
        extras.push((format!("scan_{i}_residual"), format_number(fit.residual)));
    }
    Ok((raw, projected, extras))
}

fn check(name: &str, ok: bool, detail: String, failures: &mut u32) {
    if ok {
        println!("PASS {name}: {detail}");
    } else {
        println!("FAIL {name}: {detail}");
        *failures += 1;
    }
}

// Self-check of the bundled reference data against its published values.
fn validate() -> anyhow::Result<()> {
    let mut failures = 0;

    let t = fixtures::reference_probabilities();
    let (raw, _) = pauli_reconstruct(&t);
    let expected = fixtures::pauli_density_matrix();
    let mut max_diff = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            max_diff = max_diff.max((raw.matrix()[(i, j)] - expected.matrix()[(i, j)]).norm());
        }
    }
    check(
        "table-inversion",
        max_diff < 0.005,
        format!("max entry deviation {max_diff:.4}"),
        &mut failures,
    );

    let f_pauli = fidelity(&raw, &fixtures::psi_slits())?;
    check(
        "table-fidelity",
        (f_pauli - 0.961).abs() <= 0.002,
        format!("{f_pauli:.4}"),
        &mut failures,
    );

    let f_scan = fidelity(&fixtures::scan_density_matrix(), &fixtures::psi_slits())?;
    check(
        "scan-matrix-fidelity",
        (f_scan - 0.824).abs() <= 0.001,
        format!("{f_scan:.4}"),
        &mut failures,
    );

    let g = fixtures::reference_geometry_intermediate();
    let s = derive_scales(&g)?;
    check(
        "derived-scales",
        (s.pattern_scale - 15514.04).abs() < 0.5 && (s.envelope_shift - 1.8617).abs() < 1e-3,
        format!(
            "pattern scale {:.2} 1/m, envelope shift {:.4}",
            s.pattern_scale, s.envelope_shift
        ),
        &mut failures,
    );

    if failures > 0 {
        anyhow::bail!("{failures} validation check(s) failed");
    }
    println!("all checks passed");
    Ok(())
}
