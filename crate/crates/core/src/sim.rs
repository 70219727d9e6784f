//! Forward modeling: detection-probability patterns for given states and
//! geometries, post-selected state preparation, synthetic Poisson coincidence
//! scans, and the peak-ratio normalization applied to counted setting pairs.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::optics::{gauss_legendre, AmplitudeModel, OpticalGeometry, OpticsError};
use crate::povm::{focal_plane_state, measurement_state};
use crate::quantum::{DensityMatrix, PureState, QuantumError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("state dimension {0} does not match slit count {1}")]
    SlitCountMismatch(usize, usize),
    #[error("empty scan grid")]
    EmptyGrid,
    #[error("scan positions must be strictly increasing")]
    UnorderedGrid,
    #[error("block has no positive counts")]
    AllZeroBlock,
}

/// Projection state `|m(x)>`, branching to the far-field form when the
/// detector sits in the focal plane.
pub fn projection_state(
    g: &OpticalGeometry,
    x: f64,
    model: AmplitudeModel,
) -> Result<PureState, OpticsError> {
    if (g.lens_to_detector - g.focal_length).abs() < 1e-12 * g.focal_length {
        Ok(focal_plane_state(g, x))
    } else {
        measurement_state(g, x, model)
    }
}

/// Detection probability density `Tr[rho M(x)]` in 1/m. Negative rounding
/// residue (above -1e-12) is clipped to zero.
pub fn detection_probability(
    rho: &DensityMatrix,
    g: &OpticalGeometry,
    x: f64,
    model: AmplitudeModel,
) -> Result<f64, SimError> {
    if rho.dim() != g.slit_count() {
        return Err(SimError::SlitCountMismatch(rho.dim(), g.slit_count()));
    }
    let m = projection_state(g, x, model)?;
    let v = rho.matrix() * m.amplitudes();
    let p = m.amplitudes().dotc(&v).re;
    Ok(p.max(0.0))
}

/// Joint coincidence density `Tr[(M_A(x_A) (x) M_B(x_B)) rho_AB]` in 1/m^2.
pub fn joint_probability(
    rho_ab: &DensityMatrix,
    g_a: &OpticalGeometry,
    x_a: f64,
    g_b: &OpticalGeometry,
    x_b: f64,
    model: AmplitudeModel,
) -> Result<f64, SimError> {
    if rho_ab.dim() != g_a.slit_count() * g_b.slit_count() {
        return Err(SimError::SlitCountMismatch(
            rho_ab.dim(),
            g_a.slit_count() * g_b.slit_count(),
        ));
    }
    let ma = projection_state(g_a, x_a, model)?;
    let mb = projection_state(g_b, x_b, model)?;
    let joint = crate::quantum::tensor_state(&ma, &mb);
    let v = rho_ab.matrix() * joint.amplitudes();
    Ok(joint.amplitudes().dotc(&v).re.max(0.0))
}

/// Non-normalized state prepared in arm A by post-selecting the detector
/// outcome `x_B` in arm B: `<m(x_B)|Psi>_B`.
pub fn prepared_state(
    psi_ab: &PureState,
    g_b: &OpticalGeometry,
    x_b: f64,
    model: AmplitudeModel,
) -> Result<PureState, SimError> {
    let db = g_b.slit_count();
    if !psi_ab.dim().is_multiple_of(db) {
        return Err(SimError::SlitCountMismatch(psi_ab.dim(), db));
    }
    let da = psi_ab.dim() / db;
    let m = projection_state(g_b, x_b, model)?;
    let comps: Vec<C64> = (0..da)
        .map(|a| {
            (0..db)
                .map(|b| m.amplitude(b).conj() * psi_ab.amplitude(a * db + b))
                .sum()
        })
        .collect();
    Ok(PureState::from_slice(&comps))
}

/// What a scan's sample values mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    Counts,
    ProbabilityDensity,
}

/// One detector sweep: ordered (position, value) samples plus the geometry
/// and acquisition settings under which it was taken.
#[derive(Debug, Clone)]
pub struct ScanRecord {
    pub geometry: OpticalGeometry,
    pub samples: Vec<(f64, f64)>,
    pub kind: ScanKind,
    /// Expected total coincidences over the sweep (counts kind).
    pub total_shots: Option<u64>,
    pub seed: Option<u64>,
    pub detector_width: f64,
    pub accidental_rate: f64,
    /// Fixed arm-B detector position for conditional scans.
    pub arm_b_x: Option<f64>,
}

impl ScanRecord {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.samples.is_empty() {
            return Err(SimError::EmptyGrid);
        }
        if self.samples.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(SimError::UnorderedGrid);
        }
        Ok(())
    }

    pub fn positions(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }

    pub fn total_counts(&self) -> f64 {
        self.samples.iter().map(|s| s.1).sum()
    }

    /// Converts a counts scan to a probability density: the recorded
    /// accidental rate is subtracted (clipping at zero) and the result is
    /// normalized to unit trapezoid integral over the scanned window.
    pub fn to_probability_density(&self) -> ScanRecord {
        if self.kind == ScanKind::ProbabilityDensity {
            return self.clone();
        }
        let cleaned: Vec<(f64, f64)> = self
            .samples
            .iter()
            .map(|&(x, c)| (x, (c - self.accidental_rate).max(0.0)))
            .collect();
        let mut integral = 0.0;
        for w in cleaned.windows(2) {
            integral += 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1);
        }
        let scale = if integral > 0.0 { 1.0 / integral } else { 0.0 };
        ScanRecord {
            samples: cleaned.iter().map(|&(x, c)| (x, c * scale)).collect(),
            kind: ScanKind::ProbabilityDensity,
            ..self.clone()
        }
    }
}

/// Acquisition settings for [`simulate_scan`].
#[derive(Debug, Clone, Copy)]
pub struct ScanConfig {
    /// Expected total coincidences over the whole sweep.
    pub shots: u64,
    /// Detector slit width; the pattern is convolved with a top-hat of this
    /// width before counting.
    pub detector_width: f64,
    /// Flat additive expected background counts per grid point.
    pub accidental_rate: f64,
    pub seed: u64,
    pub model: AmplitudeModel,
}

/// `P(x)` convolved with the detector top-hat (5-point Gauss-Legendre over
/// the slit width).
pub fn convolved_probability(
    rho: &DensityMatrix,
    g: &OpticalGeometry,
    x: f64,
    width: f64,
    model: AmplitudeModel,
) -> Result<f64, SimError> {
    if width <= 0.0 {
        return detection_probability(rho, g, x, model);
    }
    let (nodes, weights) = gauss_legendre(5);
    let mut acc = 0.0;
    for (t, w) in nodes.iter().zip(&weights) {
        acc += w * detection_probability(rho, g, x + 0.5 * width * t, model)?;
    }
    Ok(acc / 2.0)
}

/// Draws a synthetic coincidence scan: expected counts are the normalized,
/// top-hat-convolved pattern scaled to `shots`, plus the flat accidental
/// rate; each sample is Poisson. Each grid point uses an RNG stream derived
/// from `(seed, point index)`, so results do not depend on evaluation order.
pub fn simulate_scan(
    rho: &DensityMatrix,
    g: &OpticalGeometry,
    x_grid: &[f64],
    cfg: &ScanConfig,
) -> Result<ScanRecord, SimError> {
    if x_grid.is_empty() {
        return Err(SimError::EmptyGrid);
    }
    if x_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SimError::UnorderedGrid);
    }
    let mut expected: Vec<f64> = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        expected.push(convolved_probability(
            rho,
            g,
            x,
            cfg.detector_width,
            cfg.model,
        )?);
    }
    let total: f64 = expected.iter().sum();
    let samples: Vec<(f64, f64)> = x_grid
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let lambda = cfg.shots as f64 * expected[i] / total + cfg.accidental_rate;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let count = if lambda > 0.0 {
                Poisson::new(lambda).unwrap().sample(&mut rng)
            } else {
                0.0
            };
            (x, count)
        })
        .collect();
    Ok(ScanRecord {
        geometry: g.clone(),
        samples,
        kind: ScanKind::Counts,
        total_shots: Some(cfg.shots),
        seed: Some(cfg.seed),
        detector_width: cfg.detector_width,
        accidental_rate: cfg.accidental_rate,
        arm_b_x: None,
    })
}

/// Simulates a conditional scan of arm A with the arm-B detector fixed at
/// `x_b`: the scanned pattern is that of the (renormalized) conditional
/// state, and the arm-B position is recorded for frame reconstruction.
pub fn simulate_conditional_scan(
    rho_ab: &DensityMatrix,
    g_a: &OpticalGeometry,
    x_grid: &[f64],
    g_b: &OpticalGeometry,
    x_b: f64,
    cfg: &ScanConfig,
) -> Result<ScanRecord, SimError> {
    let m = projection_state(g_b, x_b, cfg.model)?;
    let conditional = crate::quantum::condition(rho_ab, &m, crate::quantum::Side::B)?;
    let mut scan = simulate_scan(&conditional.normalized()?, g_a, x_grid, cfg)?;
    scan.arm_b_x = Some(x_b);
    Ok(scan)
}

/// Normalizes one conjugate-setting 2x2 count block to probabilities.
///
/// `raw` is ordered `[(+,+), (+,-)], [(-,+), (-,-)]`. The efficiency ratio
/// compensates the reduced detection efficiency of the off-axis `|l>-|r>`
/// style settings: minus-row and minus-column entries are scaled by it
/// before dividing by the block total.
pub fn normalize_block(
    raw: [[f64; 2]; 2],
    efficiency_ratio: f64,
) -> Result<[[f64; 2]; 2], SimError> {
    normalize_block_rc(raw, efficiency_ratio, efficiency_ratio)
}

// Same, with independent row/column ratios (a row or column belonging to an
// on-axis setting pair needs no compensation).
pub(crate) fn normalize_block_rc(
    raw: [[f64; 2]; 2],
    row_ratio: f64,
    col_ratio: f64,
) -> Result<[[f64; 2]; 2], SimError> {
    let weighted = [
        [raw[0][0], raw[0][1] * col_ratio],
        [raw[1][0] * row_ratio, raw[1][1] * row_ratio * col_ratio],
    ];
    let total: f64 = weighted.iter().flatten().sum();
    if total <= 0.0 {
        return Err(SimError::AllZeroBlock);
    }
    Ok([
        [weighted[0][0] / total, weighted[0][1] / total],
        [weighted[1][0] / total, weighted[1][1] / total],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{
        psi_slits, psi_slits_density, reference_geometry, reference_geometry_intermediate,
    };
    use crate::optics::{derive_scales, sinc};
    use crate::quantum::{bloch_of_state, condition, DensityMatrix, PureState, Side};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn which_path_state_has_plain_sinc_pattern() {
        // rho = |l><l|: P(x) = (K/pi) sinc^2(Kx - dphi/2), no fringes.
        let g = reference_geometry_intermediate();
        let s = derive_scales(&g).unwrap();
        let rho = DensityMatrix::from_pure(&PureState::basis(2, 0));
        for i in 0..50 {
            let x = (-2.0 + 4.0 * i as f64 / 49.0) * s.lobe_width();
            let p = detection_probability(&rho, &g, x, AmplitudeModel::Sinc).unwrap();
            let expected =
                s.pattern_scale / PI * sinc(s.pattern_scale * x - s.envelope_shift / 2.0).powi(2);
            assert_abs_diff_eq!(p, expected, epsilon = 1e-9 * s.pattern_scale);
        }
    }

    #[test]
    fn mixed_state_pattern_is_envelope_sum() {
        let g = reference_geometry_intermediate();
        let s = derive_scales(&g).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        for i in 0..50 {
            let x = (-2.0 + 4.0 * i as f64 / 49.0) * s.lobe_width();
            let p = detection_probability(&rho, &g, x, AmplitudeModel::Sinc).unwrap();
            let expected = 0.5 * s.pattern_scale / PI
                * (sinc(s.pattern_scale * x - s.envelope_shift / 2.0).powi(2)
                    + sinc(s.pattern_scale * x + s.envelope_shift / 2.0).powi(2));
            assert_abs_diff_eq!(p, expected, epsilon = 1e-9 * s.pattern_scale);
        }
    }

    #[test]
    fn plus_state_pattern_integrates_to_one() {
        let g = reference_geometry_intermediate();
        let s = derive_scales(&g).unwrap();
        let sq = 1.0 / 2.0_f64.sqrt();
        let rho = DensityMatrix::from_pure(&PureState::from_slice(&[c(sq, 0.0), c(sq, 0.0)]));
        let lobe = s.lobe_width();
        // The sinc^2 tails decay as 1/x^2, leaving ~1e-3 beyond +-100 lobes.
        let n = 100_000;
        let width = 200.0 * lobe;
        let dx = width / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x = -width / 2.0 + (i as f64 + 0.5) * dx;
            acc += detection_probability(&rho, &g, x, AmplitudeModel::Sinc).unwrap() * dx;
        }
        assert_abs_diff_eq!(acc, 1.0, epsilon = 2e-3);
    }

    #[test]
    fn fringe_visibility_equals_twice_coherence() {
        // d/a = 3.75: local visibility at the symmetric point matches
        // 2 |rho_lr| within 2%.
        let g = reference_geometry_intermediate();
        let s = derive_scales(&g).unwrap();
        let period = PI * g.slit_width / (g.slit_separation() * s.pattern_scale);
        let sq = 1.0 / 2.0_f64.sqrt();
        for (amp_l, amp_r, coherence) in [
            (c(sq, 0.0), c(sq, 0.0), 0.5),
            (c(0.8, 0.0), c(0.0, 0.6), 0.48),
        ] {
            let rho = DensityMatrix::from_pure(&PureState::from_slice(&[amp_l, amp_r]));
            let mut pmax: f64 = 0.0;
            let mut pmin = f64::INFINITY;
            for i in 0..2000 {
                let x = -period / 2.0 + period * i as f64 / 1999.0;
                let p = detection_probability(&rho, &g, x, AmplitudeModel::Sinc).unwrap();
                pmax = pmax.max(p);
                pmin = pmin.min(p);
            }
            let visibility = (pmax - pmin) / (pmax + pmin);
            // The sinc envelopes droop by a few percent across one fringe
            // period at d/a = 3.75, biasing the plain max/min visibility.
            assert_abs_diff_eq!(visibility, 2.0 * coherence, epsilon = 0.05);
        }
    }

    #[test]
    fn joint_focal_plane_full_visibility() {
        // Both arms in the focal plane, x_B = 0: fringes with visibility 1.
        let g = reference_geometry(50e-3);
        let rho = psi_slits_density();
        let period = g.wavelength * g.focal_length / g.slit_separation();
        let mut pmax: f64 = 0.0;
        let mut pmin = f64::INFINITY;
        for i in 0..400 {
            let x = -period / 2.0 + period * i as f64 / 399.0;
            let p = joint_probability(&rho, &g, x, &g, 0.0, AmplitudeModel::Sinc).unwrap();
            pmax = pmax.max(p);
            pmin = pmin.min(p);
        }
        assert!((pmax - pmin) / (pmax + pmin) > 0.999);
    }

    #[test]
    fn joint_image_side_kills_fringes() {
        // Arm B near the image plane at a slit image: focal-plane fringes in
        // A disappear.
        let g_a = reference_geometry(50e-3);
        let g_b = reference_geometry(1.98 * 50e-3);
        let s_b = derive_scales(&g_b).unwrap();
        let k = s_b.pattern_scale;
        // Zero of the right-slit envelope closest to the left-slit image:
        // a clean which-path herald.
        let image = -s_b.magnification * g_b.slit_offsets[0];
        let order = (k * (image + s_b.magnification * g_b.slit_offsets[1]) / PI).round();
        let x_b = order * PI / k - s_b.magnification * g_b.slit_offsets[1];
        let rho = psi_slits_density();
        let period = g_a.wavelength * g_a.focal_length / g_a.slit_separation();
        let mut pmax: f64 = 0.0;
        let mut pmin = f64::INFINITY;
        for i in 0..400 {
            let x = -period / 2.0 + period * i as f64 / 399.0;
            let p = joint_probability(&rho, &g_a, x, &g_b, x_b, AmplitudeModel::Sinc).unwrap();
            pmax = pmax.max(p);
            pmin = pmin.min(p);
        }
        assert!((pmax - pmin) / (pmax + pmin) < 0.05);
    }

    #[test]
    fn joint_product_state_factorizes() {
        let g = reference_geometry_intermediate();
        let rho_l = DensityMatrix::from_pure(&PureState::basis(2, 0));
        let rho_r = DensityMatrix::from_pure(&PureState::basis(2, 1));
        let rho_ab =
            DensityMatrix::hermitized(crate::quantum::tensor(rho_l.matrix(), rho_r.matrix()));
        let (xa, xb) = (1.1e-4, -0.7e-4);
        let joint = joint_probability(&rho_ab, &g, xa, &g, xb, AmplitudeModel::Sinc).unwrap();
        let pa = detection_probability(&rho_l, &g, xa, AmplitudeModel::Sinc).unwrap();
        let pb = detection_probability(&rho_r, &g, xb, AmplitudeModel::Sinc).unwrap();
        assert_abs_diff_eq!(joint, pa * pb, epsilon = 1e-9 * pa * pb.max(1.0));
    }

    #[test]
    fn joint_marginal_matches_reduced_state() {
        // Integrating the joint density over x_A reproduces the arm-B
        // pattern of the reduced state.
        let g = reference_geometry_intermediate();
        let rho = psi_slits_density();
        let s = derive_scales(&g).unwrap();
        let lobe = s.lobe_width();
        let x_b = 0.6 * lobe;
        let n = 50_000;
        let width = 200.0 * lobe;
        let dx = width / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x_a = -width / 2.0 + (i as f64 + 0.5) * dx;
            acc += joint_probability(&rho, &g, x_a, &g, x_b, AmplitudeModel::Sinc).unwrap() * dx;
        }
        let reduced = DensityMatrix::maximally_mixed(2); // both marginals of Psi_slits
        let expected = detection_probability(&reduced, &g, x_b, AmplitudeModel::Sinc).unwrap();
        // Same 1/x^2 tail loss as the single-arm normalization test.
        assert_abs_diff_eq!(acc / expected, 1.0, epsilon = 2e-3);
    }

    #[test]
    fn prepared_state_limits() {
        let g = reference_geometry_intermediate();
        let s = derive_scales(&g).unwrap();
        let psi = psi_slits();
        // x at a zero of phi_l: prepared state proportional to |l>.
        let x = PI / s.pattern_scale - s.magnification * g.slit_offsets[0];
        let prep = prepared_state(&psi, &g, x, AmplitudeModel::Sinc).unwrap();
        assert!(prep.amplitude(1).norm() < 1e-10 * prep.amplitude(0).norm());
        // x = 0: prepared proportional to |l> + |r> up to phase.
        let prep = prepared_state(&psi, &g, 0.0, AmplitudeModel::Sinc).unwrap();
        assert_abs_diff_eq!(
            prep.amplitude(0).norm(),
            prep.amplitude(1).norm(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn prepared_bloch_mirrors_bz() {
        // Bloch(prepared) = (mx, my, -mz): the X-Y mirror of the
        // measurement state.
        let g = reference_geometry_intermediate();
        let s = derive_scales(&g).unwrap();
        let psi = psi_slits();
        for i in 0..100 {
            let x = (-3.0 + 6.0 * i as f64 / 99.0) * s.lobe_width();
            let m = measurement_state(&g, x, AmplitudeModel::Sinc).unwrap();
            if m.norm() < 1e-9 {
                continue;
            }
            let bm = bloch_of_state(&m).unwrap();
            let bp = bloch_of_state(&prepared_state(&psi, &g, x, AmplitudeModel::Sinc).unwrap())
                .unwrap();
            assert_abs_diff_eq!(bp.bx, bm.bx, epsilon = 1e-9);
            assert_abs_diff_eq!(bp.by, bm.by, epsilon = 1e-9);
            assert_abs_diff_eq!(bp.bz, -bm.bz, epsilon = 1e-9);
        }
    }

    #[test]
    fn prepared_matches_conditioning_route() {
        // Two code paths, one answer: prepared_state on Psi vs conditioning
        // the projector, both renormalized.
        let g = reference_geometry_intermediate();
        let psi = psi_slits();
        let rho = psi_slits_density();
        let s = derive_scales(&g).unwrap();
        for i in 0..20 {
            let x = (-2.5 + 5.0 * i as f64 / 19.0) * s.lobe_width();
            let prep = prepared_state(&psi, &g, x, AmplitudeModel::Sinc)
                .unwrap()
                .normalized()
                .unwrap();
            let m = measurement_state(&g, x, AmplitudeModel::Sinc).unwrap();
            let conditioned = condition(&rho, &m, Side::B).unwrap().normalized().unwrap();
            let overlap = crate::quantum::fidelity(&conditioned, &prep).unwrap();
            assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn scan_determinism() {
        let g = reference_geometry_intermediate();
        let s = derive_scales(&g).unwrap();
        let grid: Vec<f64> = (0..61)
            .map(|i| (-3.0 + 6.0 * i as f64 / 60.0) * s.lobe_width())
            .collect();
        let cfg = ScanConfig {
            shots: 10_000,
            detector_width: 20e-6,
            accidental_rate: 1.0,
            seed: 42,
            model: AmplitudeModel::Sinc,
        };
        let rho = DensityMatrix::maximally_mixed(2);
        let a = simulate_scan(&rho, &g, &grid, &cfg).unwrap();
        let b = simulate_scan(&rho, &g, &grid, &cfg).unwrap();
        assert_eq!(a.samples, b.samples);
        let cfg2 = ScanConfig { seed: 43, ..cfg };
        let c = simulate_scan(&rho, &g, &grid, &cfg2).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn scan_law_of_large_numbers() {
        let g = reference_geometry_intermediate();
        let s = derive_scales(&g).unwrap();
        let grid: Vec<f64> = (0..61)
            .map(|i| (-3.0 + 6.0 * i as f64 / 60.0) * s.lobe_width())
            .collect();
        let sq = 1.0 / 2.0_f64.sqrt();
        let rho = DensityMatrix::from_pure(&PureState::from_slice(&[c(sq, 0.0), c(sq, 0.0)]));
        let cfg = ScanConfig {
            shots: 1_000_000,
            detector_width: 0.0,
            accidental_rate: 0.0,
            seed: 7,
            model: AmplitudeModel::Sinc,
        };
        let scan = simulate_scan(&rho, &g, &grid, &cfg).unwrap();
        let expected: Vec<f64> = grid
            .iter()
            .map(|&x| detection_probability(&rho, &g, x, AmplitudeModel::Sinc).unwrap())
            .collect();
        let norm: f64 = expected.iter().sum();
        for (i, (_, count)) in scan.samples.iter().enumerate() {
            let lambda = cfg.shots as f64 * expected[i] / norm;
            // 5-sigma Poisson bound.
            assert!(
                (count - lambda).abs() <= 5.0 * (lambda + 1.0).sqrt(),
                "point {i}: count {count}, lambda {lambda}"
            );
        }
    }

    #[test]
    fn which_path_scan_has_no_fringes() {
        let g = reference_geometry_intermediate();
        let s = derive_scales(&g).unwrap();
        // Sample one fringe period around the left envelope center.
        let period = PI * g.slit_width / (g.slit_separation() * s.pattern_scale);
        let center = s.envelope_shift / 2.0 / s.pattern_scale;
        let grid: Vec<f64> = (0..41)
            .map(|i| center - period / 2.0 + period * i as f64 / 40.0)
            .collect();
        let rho = DensityMatrix::from_pure(&PureState::basis(2, 0));
        let cfg = ScanConfig {
            shots: 1_000_000,
            detector_width: 0.0,
            accidental_rate: 0.0,
            seed: 11,
            model: AmplitudeModel::Sinc,
        };
        let scan = simulate_scan(&rho, &g, &grid, &cfg).unwrap();
        let vals = scan.values();
        let vmax = vals.iter().cloned().fold(0.0, f64::max);
        let vmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        // Envelope variation over one fringe period is small; Poisson noise
        // at ~2.4k counts/point adds ~2%: empirical visibility stays low.
        assert!((vmax - vmin) / (vmax + vmin) < 0.05);
    }

    #[test]
    fn normalize_block_reference_blocks() {
        // sigma_z (x) sigma_z block, image plane, ratio 1.
        let out = normalize_block([[77.0, 14838.0], [14885.0, 66.0]], 1.0).unwrap();
        assert_abs_diff_eq!(out[0][0], 0.003, epsilon = 5e-4);
        assert_abs_diff_eq!(out[0][1], 0.497, epsilon = 5e-4);
        assert_abs_diff_eq!(out[1][0], 0.498, epsilon = 5e-4);
        assert_abs_diff_eq!(out[1][1], 0.002, epsilon = 5e-4);
        // sigma_x (x) sigma_x block with the fitted efficiency ratio.
        let ratio = crate::fixtures::focal_efficiency_ratio();
        let out = normalize_block([[643.0, 22.0], [22.0, 595.0]], ratio).unwrap();
        assert_abs_diff_eq!(out[0][0], 0.486, epsilon = 5e-4);
        assert_abs_diff_eq!(out[0][1], 0.017, epsilon = 5e-4);
        assert_abs_diff_eq!(out[1][0], 0.017, epsilon = 5e-4);
        assert_abs_diff_eq!(out[1][1], 0.480, epsilon = 5e-4);
    }

    #[test]
    fn normalize_block_uniform_and_empty() {
        let out = normalize_block([[5.0, 5.0], [5.0, 5.0]], 1.0).unwrap();
        for row in out {
            for v in row {
                assert_abs_diff_eq!(v, 0.25, epsilon = 1e-15);
            }
        }
        assert!(normalize_block([[0.0, 0.0], [0.0, 0.0]], 1.0).is_err());
    }
}
