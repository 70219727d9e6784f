//! Position-indexed POVM of a scanning detector: projection states `|m(x)>`,
//! rank-one effects `M(x) = |m(x)><m(x)|`, discretized completeness checks,
//! and Bloch-sphere trajectories traced as the detector sweeps.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::optics::{
    derive_scales, fraunhofer_amplitude, slit_amplitude, AmplitudeModel, OpticalGeometry,
    OpticsError,
};
use crate::quantum::{bloch_of_state, spectral_norm_hermitian, BlochPoint, PureState};

/// Rank-one measurement effect of a point detector at transverse position
/// `x`: the non-normalized projection state and its outer product (units
/// 1/m).
#[derive(Debug, Clone)]
pub struct MeasurementEffect {
    pub x: f64,
    pub state: PureState,
    pub operator: DMatrix<C64>,
}

impl MeasurementEffect {
    pub fn at(g: &OpticalGeometry, x: f64, model: AmplitudeModel) -> Result<Self, OpticsError> {
        let state = measurement_state(g, x, model)?;
        let operator = state.amplitudes() * state.amplitudes().adjoint();
        Ok(Self { x, state, operator })
    }
}

/// Projection state `|m(x)> = sum_n conj(phi_n(x)) |n>` of an N-slit qudit
/// for a detector at `x`; non-normalized by construction.
pub fn measurement_state(
    g: &OpticalGeometry,
    x: f64,
    model: AmplitudeModel,
) -> Result<PureState, OpticsError> {
    let comps: Result<Vec<C64>, OpticsError> = g
        .slit_offsets
        .iter()
        .map(|&r_n| slit_amplitude(g, model, r_n, x).map(|a| a.conj()))
        .collect();
    Ok(PureState::from_slice(&comps?))
}

/// Far-field (z = f) projection state: common sinc envelope with pure phase
/// ramps between the slits (fringe period `lambda f / d`).
pub fn focal_plane_state(g: &OpticalGeometry, x: f64) -> PureState {
    let comps: Vec<C64> = g
        .slit_offsets
        .iter()
        .map(|&r_n| fraunhofer_amplitude(g, r_n, x).conj())
        .collect();
    PureState::from_slice(&comps)
}

/// Spectral norm of `sum_i M(x_i) dx - I` over a uniform grid: how far the
/// discretized effects are from resolving the identity. Rectangle-rule
/// weights with compensated (Kahan) accumulation.
pub fn completeness_defect(
    g: &OpticalGeometry,
    window: (f64, f64),
    step: f64,
    model: AmplitudeModel,
) -> Result<f64, OpticsError> {
    let n = g.slit_count();
    let mut sum = DMatrix::<C64>::zeros(n, n);
    let mut comp = DMatrix::<C64>::zeros(n, n);
    let count = ((window.1 - window.0) / step).round() as usize;
    for i in 0..count {
        let x = window.0 + (i as f64 + 0.5) * step;
        let m = measurement_state(g, x, model)?;
        let op = m.amplitudes() * m.amplitudes().adjoint();
        // Kahan summation per entry.
        for r in 0..n {
            for c in 0..n {
                let y = op[(r, c)] * step - comp[(r, c)];
                let t = sum[(r, c)] + y;
                comp[(r, c)] = (t - sum[(r, c)]) - y;
                sum[(r, c)] = t;
            }
        }
    }
    let defect = sum - DMatrix::<C64>::identity(n, n);
    Ok(spectral_norm_hermitian(&defect))
}

/// One detector sweep mapped onto the Bloch sphere.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<(f64, BlochPoint)>,
    /// Sample positions dropped because both amplitudes vanished.
    pub dropped: Vec<f64>,
}

/// Default trajectory sampling: 400 uniform points across the central three
/// lobes.
pub fn default_trajectory_samples(g: &OpticalGeometry) -> Result<Vec<f64>, OpticsError> {
    let s = derive_scales(g)?;
    let half = 3.0 * s.lobe_width();
    Ok((0..400)
        .map(|i| -half + 2.0 * half * i as f64 / 399.0)
        .collect())
}

/// Bloch coordinates of the normalized measurement state at each sample
/// position (double slit only). Degenerate samples, where both amplitudes
/// fall below `1e-12 sqrt(K/pi)`, are dropped and reported.
pub fn bloch_trajectory(g: &OpticalGeometry, x_samples: &[f64]) -> Result<Trajectory, OpticsError> {
    if g.slit_count() != 2 {
        return Err(OpticsError::InvalidGeometry(
            "Bloch trajectories are defined for double slits only".into(),
        ));
    }
    let s = derive_scales(g)?;
    let floor = 1e-12 * (s.pattern_scale / std::f64::consts::PI).sqrt();
    let mut points = Vec::with_capacity(x_samples.len());
    let mut dropped = Vec::new();
    for &x in x_samples {
        let m = measurement_state(g, x, AmplitudeModel::Sinc)?;
        if m.amplitude(0).norm() < floor && m.amplitude(1).norm() < floor {
            dropped.push(x);
            continue;
        }
        points.push((x, bloch_of_state(&m).expect("non-degenerate sample")));
    }
    Ok(Trajectory { points, dropped })
}

/// Focal-plane trajectory: every state sits on the equator (`bz = 0`).
pub fn focal_plane_trajectory(g: &OpticalGeometry, x_samples: &[f64]) -> Trajectory {
    let mut points = Vec::with_capacity(x_samples.len());
    let mut dropped = Vec::new();
    for &x in x_samples {
        let m = focal_plane_state(g, x);
        match bloch_of_state(&m) {
            Ok(b) => points.push((x, b)),
            Err(_) => dropped.push(x),
        }
    }
    Trajectory { points, dropped }
}
