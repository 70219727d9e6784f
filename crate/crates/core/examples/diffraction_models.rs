//! Comparing the closed-form sinc model against Fresnel propagation.
//!
//! The sinc amplitude is the stationary-phase limit of the Fresnel integral
//! through the lens; when the effective curvature radius is large compared to
//! a^2/lambda the two agree to a few percent over the central lobes. At the
//! focal plane the pattern collapses to cos^2 fringes under a broad envelope.

use slit_tomo::fixtures::{reference_geometry, reference_geometry_intermediate};
use slit_tomo::optics::{fresnel_amplitude, sinc_amplitude};
use slit_tomo::quantum::PureState;
use slit_tomo::{derive_scales, detection_probability, AmplitudeModel, DensityMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = reference_geometry_intermediate();
    let s = derive_scales(&g)?;
    let lobe = s.lobe_width();
    println!(
        "effective curvature radius = {:.2} mm",
        s.effective_length * 1e3
    );
    println!(
        "far-field threshold 10 a^2 / lambda = {:.2} mm",
        10.0 * g.slit_width * g.slit_width / g.wavelength * 1e3
    );

    // Relative L2 deviation between the normalized single-slit intensities
    // over the central three lobes.
    let n = 400;
    for r in &g.slit_offsets {
        let mut si = Vec::with_capacity(n);
        let mut fr = Vec::with_capacity(n);
        for i in 0..n {
            let x = -1.5 * lobe + 3.0 * lobe * i as f64 / (n - 1) as f64;
            si.push(sinc_amplitude(&g, *r, x)?.norm_sqr());
            fr.push(fresnel_amplitude(&g, *r, x)?.norm_sqr());
        }
        let (ts, tf) = (si.iter().sum::<f64>(), fr.iter().sum::<f64>());
        let (mut num, mut den) = (0.0, 0.0);
        for (s, f) in si.iter().zip(&fr) {
            num += (s / ts - f / tf).powi(2);
            den += (f / tf).powi(2);
        }
        println!(
            "slit at {:>5.1} um: sinc vs fresnel relative L2 = {:.4}",
            r * 1e6,
            (num / den).sqrt()
        );
    }

    // Focal plane: fringe maxima of the symmetric state sit one period apart.
    let gf = reference_geometry(g.focal_length);
    let period = gf.wavelength * gf.focal_length / gf.slit_separation();
    println!("\nfocal fringe period = {:.1} um", period * 1e6);
    let sq = 1.0 / 2.0_f64.sqrt();
    let plus = DensityMatrix::from_pure(&PureState::from_slice(&[
        num_complex::Complex64::new(sq, 0.0),
        num_complex::Complex64::new(sq, 0.0),
    ]));
    for frac in [0.0, 0.25, 0.5] {
        let x = frac * period;
        let p = detection_probability(&plus, &gf, x, AmplitudeModel::Sinc)?;
        println!("  P({:.1} um) = {:.1} /m", x * 1e6, p);
    }
    Ok(())
}
