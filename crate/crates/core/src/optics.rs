//! Single-slit transverse amplitudes in the detection plane: exact
//! Fresnel-Kirchhoff quadrature and the sinc closed form, plus the derived
//! geometric scales (effective propagation length, diffraction scale,
//! envelope displacement, magnification).

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OpticsError {
    #[error("detector plane coincides with the focal plane (z = f); use the far-field branch")]
    FocalPlaneSingularity,
    #[error("detector plane at or beyond the image plane (effective length R = {0:.3e} m)")]
    ImagePlaneSingularity(f64),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("quadrature did not converge to relative tolerance {tol:.1e} within {levels} subdivision levels")]
    QuadratureNonConvergence { tol: f64, levels: u32 },
}

/// Which single-slit amplitude model backs a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeModel {
    /// Full Fresnel-Kirchhoff quadrature over the slit.
    Fresnel,
    /// Closed-form sinc diffraction pattern (valid for R >> a^2 / lambda).
    Sinc,
}

/// Slit-array geometry. All lengths in meters; slit offsets are signed
/// distances of the slit centers from the optical axis and must be strictly
/// increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalGeometry {
    pub wavelength: f64,
    pub slit_width: f64,
    pub slit_offsets: Vec<f64>,
    pub focal_length: f64,
    /// Distance from the slit plane to the lens (L).
    pub slit_to_lens: f64,
    /// Distance from the lens to the detector plane (z).
    pub lens_to_detector: f64,
}

impl OpticalGeometry {
    pub fn validate(&self) -> Result<(), OpticsError> {
        if self.wavelength <= 0.0 || self.slit_width <= 0.0 || self.focal_length <= 0.0 {
            return Err(OpticsError::InvalidGeometry(
                "wavelength, slit_width and focal_length must be positive".into(),
            ));
        }
        if self.slit_offsets.is_empty() {
            return Err(OpticsError::InvalidGeometry("no slit offsets".into()));
        }
        if self.slit_offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(OpticsError::InvalidGeometry(
                "slit offsets must be strictly increasing".into(),
            ));
        }
        if self.slit_to_lens <= self.focal_length {
            return Err(OpticsError::InvalidGeometry(
                "slit_to_lens must exceed the focal length".into(),
            ));
        }
        let z = self.lens_to_detector;
        if z < self.focal_length - 1e-15 {
            return Err(OpticsError::InvalidGeometry(
                "detector must sit at or beyond the focal plane".into(),
            ));
        }
        if z > self.image_plane() + 1e-15 {
            return Err(OpticsError::InvalidGeometry(
                "detector must sit at or before the image plane".into(),
            ));
        }
        Ok(())
    }

    pub fn slit_count(&self) -> usize {
        self.slit_offsets.len()
    }

    /// Span between the outermost slit centers (the slit separation `d` for
    /// a double slit).
    pub fn slit_separation(&self) -> f64 {
        self.slit_offsets.last().unwrap() - self.slit_offsets.first().unwrap()
    }

    /// Image-plane distance `z = L f / (L - f)` behind the lens.
    pub fn image_plane(&self) -> f64 {
        self.slit_to_lens * self.focal_length / (self.slit_to_lens - self.focal_length)
    }

    pub fn with_z(&self, z: f64) -> Self {
        let mut g = self.clone();
        g.lens_to_detector = z;
        g
    }
}

/// Geometry-derived scales of the detection-plane pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// Effective propagation length `R = (Lf + zf - Lz)/(z - f)` in meters.
    pub effective_length: f64,
    /// Diffraction-pattern scale `K = pi a f / (lambda R (z - f))` in 1/m.
    pub pattern_scale: f64,
    /// Envelope displacement `dphi = (z - f) K d / f` (dimensionless) for
    /// the outermost slit pair.
    pub envelope_shift: f64,
    /// Slit-image magnification `(z - f)/f`.
    pub magnification: f64,
}

impl DerivedScales {
    /// Half-width of one diffraction lobe on the detector axis, `pi / K`.
    pub fn lobe_width(&self) -> f64 {
        PI / self.pattern_scale
    }
}

/// Computes the derived scales, rejecting the focal-plane (`z = f`) and
/// image-plane (`R = 0`) singularities; callers must branch to the far-field
/// form at the focal plane.
pub fn derive_scales(g: &OpticalGeometry) -> Result<DerivedScales, OpticsError> {
    g.validate()?;
    let (f, l, z) = (g.focal_length, g.slit_to_lens, g.lens_to_detector);
    let denom = z - f;
    if denom.abs() < 1e-12 * f {
        return Err(OpticsError::FocalPlaneSingularity);
    }
    let r = (l * f + z * f - l * z) / denom;
    if r.abs() < 1e-9 * f {
        return Err(OpticsError::ImagePlaneSingularity(r));
    }
    let k = PI * g.slit_width * f / (g.wavelength * r * denom);
    let dphi = denom * k * g.slit_separation() / f;
    Ok(DerivedScales {
        effective_length: r,
        pattern_scale: k,
        envelope_shift: dphi,
        magnification: denom / f,
    })
}

/// `sin(x)/x` with the removable singularity handled exactly.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Closed-form single-slit amplitude
/// `sqrt(K/pi) exp(i (2 r_n / a) K x) sinc(K (x + m r_n))` where `m` is the
/// magnification. Units 1/sqrt(m).
pub fn sinc_amplitude(g: &OpticalGeometry, r_n: f64, x: f64) -> Result<C64, OpticsError> {
    let s = derive_scales(g)?;
    Ok(sinc_amplitude_scaled(&s, g.slit_width, r_n, x))
}

/// Same as [`sinc_amplitude`] with precomputed scales (hot path for scans).
pub fn sinc_amplitude_scaled(s: &DerivedScales, slit_width: f64, r_n: f64, x: f64) -> C64 {
    let k = s.pattern_scale;
    let envelope = sinc(k * (x + s.magnification * r_n));
    let phase = 2.0 * r_n / slit_width * k * x;
    C64::from_polar((k / PI).sqrt(), phase) * envelope
}

/// Far-field (focal plane, z = f) single-slit amplitude: common sinc
/// envelope of scale `K_f = pi a / (lambda f)` with a pure slit-dependent
/// phase ramp `exp(i 2 pi r_n x / (lambda f))`.
pub fn fraunhofer_amplitude(g: &OpticalGeometry, r_n: f64, x: f64) -> C64 {
    let kf = PI * g.slit_width / (g.wavelength * g.focal_length);
    let envelope = sinc(kf * x);
    let phase = 2.0 * PI * r_n * x / (g.wavelength * g.focal_length);
    C64::from_polar((kf / PI).sqrt(), phase) * envelope
}

/// Quadrature control for [`fresnel_amplitude`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub max_levels: u32,
    pub order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            max_levels: 12,
            order: 20,
        }
    }
}

/// Exact single-slit amplitude by adaptive Gauss-Legendre quadrature of the
/// Fresnel-Kirchhoff integral over the slit aperture:
///
/// ```text
/// phi_n(x) = sqrt(f / (lambda R a (z-f)))
///            * exp(i pi (L-f) x^2 / (lambda R (z-f)))
///            * Int_{-a/2}^{a/2} exp(i pi (x'+r_n)^2 / (lambda R))
///                              exp(i 2 pi f x (x'+r_n) / (lambda R (z-f))) dx'
/// ```
pub fn fresnel_amplitude(g: &OpticalGeometry, r_n: f64, x: f64) -> Result<C64, OpticsError> {
    fresnel_amplitude_cfg(g, r_n, x, &QuadratureConfig::default())
}

pub fn fresnel_amplitude_cfg(
    g: &OpticalGeometry,
    r_n: f64,
    x: f64,
    cfg: &QuadratureConfig,
) -> Result<C64, OpticsError> {
    let s = derive_scales(g)?;
    let (f, l, z) = (g.focal_length, g.slit_to_lens, g.lens_to_detector);
    let lam = g.wavelength;
    let r = s.effective_length;
    let a = g.slit_width;

    let chirp = C64::from_polar(1.0, PI * (l - f) / (lam * r * (z - f)) * x * x);
    let prefactor = (f / (lam * r * a * (z - f))).abs().sqrt();
    let integrand = |xp: f64| -> C64 {
        let u = xp + r_n;
        let quad = PI / (lam * r) * u * u;
        let lin = 2.0 * PI * f * x * u / (lam * r * (z - f));
        C64::from_polar(1.0, quad + lin)
    };
    let integral = adaptive_gauss_legendre(&integrand, -a / 2.0, a / 2.0, cfg)?;
    Ok(chirp * integral * prefactor)
}

/// Evaluates either amplitude model at a point.
pub fn slit_amplitude(
    g: &OpticalGeometry,
    model: AmplitudeModel,
    r_n: f64,
    x: f64,
) -> Result<C64, OpticsError> {
    match model {
        AmplitudeModel::Sinc => sinc_amplitude(g, r_n, x),
        AmplitudeModel::Fresnel => fresnel_amplitude(g, r_n, x),
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = pk;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gl_integrate(f: &impl Fn(f64) -> C64, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> C64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = C64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        acc += f(mid + half * x) * *w;
    }
    acc * half
}

/// Adaptive bisection around a fixed-order Gauss-Legendre rule; an interval
/// is accepted when halving it changes the estimate by less than the
/// tolerance (relative to the whole-integral scale).
fn adaptive_gauss_legendre(
    f: &impl Fn(f64) -> C64,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<C64, OpticsError> {
    let (nodes, weights) = gauss_legendre(cfg.order);
    let whole = gl_integrate(f, a, b, &nodes, &weights);
    let scale = whole.norm().max(1e-300);
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> C64,
        a: f64,
        b: f64,
        coarse: C64,
        level: u32,
        scale: f64,
        cfg: &QuadratureConfig,
        nodes: &[f64],
        weights: &[f64],
    ) -> Result<C64, OpticsError> {
        let mid = 0.5 * (a + b);
        let left = gl_integrate(f, a, mid, nodes, weights);
        let right = gl_integrate(f, mid, b, nodes, weights);
        let fine = left + right;
        if (fine - coarse).norm() <= cfg.rel_tol * scale {
            return Ok(fine);
        }
        if level >= cfg.max_levels {
            return Err(OpticsError::QuadratureNonConvergence {
                tol: cfg.rel_tol,
                levels: cfg.max_levels,
            });
        }
        let l = recurse(f, a, mid, left, level + 1, scale, cfg, nodes, weights)?;
        let r = recurse(f, mid, b, right, level + 1, scale, cfg, nodes, weights)?;
        Ok(l + r)
    }
    recurse(f, a, b, whole, 0, scale, cfg, &nodes, &weights)
}
