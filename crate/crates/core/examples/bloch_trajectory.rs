//! Bloch-sphere trajectory traced by the detector's measurement state.
//!
//! As the detector slides along an intermediate plane between the lens focus
//! and the slit image, its back-propagated projection state winds around the
//! Bloch sphere: the azimuth advances linearly with position while the polar
//! angle swings between the poles at the envelope zeros.

use slit_tomo::fixtures::reference_geometry_intermediate;
use slit_tomo::povm::default_trajectory_samples;
use slit_tomo::{bloch_trajectory, derive_scales};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = reference_geometry_intermediate();
    let s = derive_scales(&g)?;
    println!("pattern scale K = {:.2} /m", s.pattern_scale);
    println!("lobe width      = {:.2} um", s.lobe_width() * 1e6);

    let samples = default_trajectory_samples(&g)?;
    let traj = bloch_trajectory(&g, &samples)?;

    // Azimuth slope in the central lobe, by finite differences.
    let lobe = s.lobe_width();
    let central: Vec<_> = traj
        .points
        .iter()
        .filter(|(x, _)| x.abs() < 0.3 * lobe)
        .collect();
    let (x0, b0) = central.first().unwrap();
    let (x1, b1) = central.last().unwrap();
    let mut dphi = b1.azimuth() - b0.azimuth();
    // Unwrap: the slope is steep enough to cross the branch cut.
    let expected = -2.0 * g.slit_separation() / g.slit_width * s.pattern_scale;
    while (dphi - expected * (x1 - x0)).abs() > std::f64::consts::PI {
        dphi -= 2.0 * std::f64::consts::PI * (dphi - expected * (x1 - x0)).signum();
    }
    println!(
        "azimuth slope   = {:.2} rad/m (expected {:.2})",
        dphi / (x1 - x0),
        expected
    );

    println!("\n    x [um]      bx      by      bz");
    for (x, b) in traj.points.iter().step_by(40) {
        println!(
            "{:>10.2}  {:+.3}  {:+.3}  {:+.3}",
            x * 1e6,
            b.bx,
            b.by,
            b.bz
        );
    }
    if !traj.dropped.is_empty() {
        println!("dropped {} degenerate samples", traj.dropped.len());
    }
    Ok(())
}
