//! Two-qubit reconstruction from conditional scans and a dual frame.
//!
//! Arm B's detector parks at six positions whose projection states best
//! approximate the Bloch octahedron; for each, arm A records a coincidence
//! scan. Least-squares fits recover the conditional states, the dual
//! reconstruction operators undo the arm-B projections, and the pieces
//! assemble into the joint density matrix.

use slit_tomo::fixtures::{psi_slits, psi_slits_density, reference_geometry_intermediate};
use slit_tomo::optics::AmplitudeModel;
use slit_tomo::quantum::{condition, Side};
use slit_tomo::sim::{projection_state, simulate_conditional_scan, ScanConfig};
use slit_tomo::tomo::octahedral_points;
use slit_tomo::{
    build_dual_frame, derive_scales, fidelity, fit_conditional, reconstruct_two_qubit, FitOptions,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = reference_geometry_intermediate();
    let s = derive_scales(&g)?;
    let lobe = s.lobe_width();
    let rho_ab = psi_slits_density();

    let points = octahedral_points(&g, AmplitudeModel::Sinc)?;
    let frame = build_dual_frame(&g, &points, AmplitudeModel::Sinc)?;
    println!("frame condition number = {:.3}", frame.condition_number);

    let n = 61;
    let grid: Vec<f64> = (0..n)
        .map(|i| -3.0 * lobe + 6.0 * lobe * i as f64 / (n - 1) as f64)
        .collect();
    let opts = FitOptions {
        poisson_weighted: true,
        ..FitOptions::default()
    };

    // With a fixed acquisition time per arm-B position, the coincidence flux
    // of each scan is proportional to the conditional trace; those relative
    // totals are exactly the weights the frame combination needs.
    let traces: Vec<f64> = points
        .iter()
        .map(|&x_b| {
            let m = projection_state(&g, x_b, AmplitudeModel::Sinc)?;
            Ok(condition(&rho_ab, &m, Side::B)?.trace())
        })
        .collect::<Result<_, Box<dyn std::error::Error>>>()?;
    let trace_sum: f64 = traces.iter().sum();

    let mut conditionals = Vec::new();
    let mut totals = Vec::new();
    for (i, &x_b) in points.iter().enumerate() {
        let cfg = ScanConfig {
            shots: (60_000.0 * traces[i] / trace_sum).round() as u64,
            detector_width: 20e-6,
            accidental_rate: 1.0,
            seed: 40 + i as u64,
            model: AmplitudeModel::Sinc,
        };
        let scan = simulate_conditional_scan(&rho_ab, &g, &grid, &g, x_b, &cfg)?;
        let total = (scan.total_counts() - cfg.accidental_rate * n as f64).max(0.0);
        let fit = fit_conditional(&scan, &opts)?;
        println!(
            "x_b = {:>8.2} um: {:>7.0} counts, fit residual {:.3e}",
            x_b * 1e6,
            total,
            fit.residual
        );
        conditionals.push(fit.density);
        totals.push(total);
    }

    // Re-weight each conditional by its share of the coincidence flux: the
    // trace of a conditional carries the arm-B detection probability.
    let grand: f64 = totals.iter().sum();
    let weighted: Vec<_> = conditionals
        .iter()
        .zip(&totals)
        .map(|(rho, t)| rho.scale(t / grand))
        .collect();

    let (_, projected) = reconstruct_two_qubit(&weighted, &frame)?;
    println!(
        "\njoint fidelity = {:.4}",
        fidelity(&projected, &psi_slits())?
    );
    Ok(())
}
