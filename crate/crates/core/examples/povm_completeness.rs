//! Completeness of the position-indexed POVM realized by a scanning detector.
//!
//! The rank-one effects |m(x)><m(x)| dx should resolve the identity when the
//! scan covers the whole pattern. The defect |sum_i M_i dx - I| (spectral
//! norm) quantifies what a finite window and step leave out; it shrinks as
//! the window widens and the grid refines.

use slit_tomo::fixtures::reference_geometry_intermediate;
use slit_tomo::{completeness_defect, derive_scales, AmplitudeModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = reference_geometry_intermediate();
    let s = derive_scales(&g)?;
    let lobe = s.lobe_width();

    println!("window [lobes]   step [lobe]   defect");
    for (half_lobes, step_frac) in [(2.0, 0.1), (5.0, 0.05), (10.0, 0.02), (20.0, 0.02)] {
        let window = (-half_lobes * lobe, half_lobes * lobe);
        let step = step_frac * lobe;
        let defect = completeness_defect(&g, window, step, AmplitudeModel::Sinc)?;
        println!("  +-{:<12} {:<13} {:.3e}", half_lobes, step_frac, defect);
    }
    Ok(())
}
