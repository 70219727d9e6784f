//! Density-matrix reconstruction by three routes: six-setting Pauli linear
//! inversion, single-scan integral inversion of the interference pattern,
//! and per-position least-squares fits assembled through a dual frame of
//! reconstruction operators.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::optics::{
    derive_scales, gauss_legendre, sinc, AmplitudeModel, OpticalGeometry, OpticsError,
};
use crate::povm::MeasurementEffect;
use crate::quantum::{
    bloch_of_state, pauli, project_physical, tensor, BlochPoint, DensityMatrix, Pauli, PureState,
    QuantumError,
};
use crate::sim::{projection_state, ScanKind, ScanRecord, SimError};

#[derive(Debug, Error)]
pub enum TomoError {
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid setting table: {0}")]
    InvalidTable(String),
    #[error("unknown setting label {0:?}")]
    UnknownSetting(String),
    #[error("scan has the wrong kind: expected {0}")]
    WrongScanKind(&'static str),
    #[error("scan window [{0:.3e}, {1:.3e}] m does not cover the central three lobes (need +-{2:.3e} m)")]
    WindowTooNarrow(f64, f64, f64),
    #[error("pattern inversion is singular at this geometry (beta = {0:.4}); use a conditional fit instead")]
    InversionSingular(f64),
    #[error("need at least {1} samples, got {0}")]
    TooFewSamples(usize, usize),
    #[error("degenerate scan: all sample values equal")]
    DegenerateScan,
    #[error("need at least 4 detector positions, got {0}")]
    TooFewPoints(usize),
    #[error("detector positions give a rank-deficient frame (condition number {0:.3e})")]
    RankDeficient(f64),
    #[error("{0} conditionals for a {1}-point frame")]
    CountMismatch(usize, usize),
}

/// One of the six single-arm detector settings used in the correlation
/// measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    L,
    R,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl Setting {
    pub const ALL: [Setting; 6] = [
        Setting::L,
        Setting::R,
        Setting::Plus,
        Setting::Minus,
        Setting::PlusI,
        Setting::MinusI,
    ];

    pub fn index(self) -> usize {
        match self {
            Setting::L => 0,
            Setting::R => 1,
            Setting::Plus => 2,
            Setting::Minus => 3,
            Setting::PlusI => 4,
            Setting::MinusI => 5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Setting::L => "l",
            Setting::R => "r",
            Setting::Plus => "+",
            Setting::Minus => "-",
            Setting::PlusI => "+i",
            Setting::MinusI => "-i",
        }
    }

    pub fn from_label(s: &str) -> Result<Self, TomoError> {
        match s.trim() {
            "l" => Ok(Setting::L),
            "r" => Ok(Setting::R),
            "+" => Ok(Setting::Plus),
            "-" => Ok(Setting::Minus),
            "+i" => Ok(Setting::PlusI),
            "-i" => Ok(Setting::MinusI),
            other => Err(TomoError::UnknownSetting(other.to_string())),
        }
    }

    /// Pauli axis whose eigenbasis this setting belongs to.
    pub fn axis(self) -> Pauli {
        match self {
            Setting::L | Setting::R => Pauli::Z,
            Setting::Plus | Setting::Minus => Pauli::X,
            Setting::PlusI | Setting::MinusI => Pauli::Y,
        }
    }

    /// Eigenvalue of the setting state under its own axis.
    pub fn sign(self) -> f64 {
        if self.index().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// The pure state the setting projects onto, in the `{|l>, |r>}` basis.
    pub fn state(self) -> PureState {
        let sq = 1.0 / 2.0_f64.sqrt();
        let amps: [C64; 2] = match self {
            Setting::L => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            Setting::R => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            Setting::Plus => [C64::new(sq, 0.0), C64::new(sq, 0.0)],
            Setting::Minus => [C64::new(sq, 0.0), C64::new(-sq, 0.0)],
            Setting::PlusI => [C64::new(sq, 0.0), C64::new(0.0, sq)],
            Setting::MinusI => [C64::new(sq, 0.0), C64::new(0.0, -sq)],
        };
        PureState::from_slice(&amps)
    }

    /// The two settings spanning a Pauli axis, plus eigenstate first.
    pub fn pair(axis: Pauli) -> [Setting; 2] {
        match axis {
            Pauli::Z | Pauli::Identity => [Setting::L, Setting::R],
            Pauli::X => [Setting::Plus, Setting::Minus],
            Pauli::Y => [Setting::PlusI, Setting::MinusI],
        }
    }
}

/// 6x6 grid of coincidence probabilities, rows indexed by the arm-B setting
/// and columns by the arm-A setting, both in the order
/// `l, r, +, -, +i, -i`. Each 2x2 conjugate-setting block sums to 1.
#[derive(Debug, Clone)]
pub struct SettingTable {
    probs: [[f64; 6]; 6],
}

impl SettingTable {
    pub fn new(probs: [[f64; 6]; 6]) -> Result<Self, TomoError> {
        for (i, row) in probs.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                    return Err(TomoError::InvalidTable(format!(
                        "entry ({i}, {j}) = {p} outside [0, 1]"
                    )));
                }
            }
        }
        for bp in 0..3 {
            for ap in 0..3 {
                let sum: f64 = (0..2)
                    .flat_map(|r| (0..2).map(move |c| (r, c)))
                    .map(|(r, c)| probs[2 * bp + r][2 * ap + c])
                    .sum();
                if (sum - 1.0).abs() > 0.02 {
                    return Err(TomoError::InvalidTable(format!(
                        "block ({bp}, {ap}) sums to {sum}, expected 1"
                    )));
                }
            }
        }
        Ok(Self { probs })
    }

    /// Block-normalizes a raw 6x6 count grid. The efficiency ratio is
    /// applied to the `|l>-|r>`-type rows/columns (the off-axis peak) before
    /// each 2x2 conjugate block is divided by its total.
    pub fn from_counts(counts: &[[f64; 6]; 6], efficiency_ratio: f64) -> Result<Self, TomoError> {
        let mut probs = [[0.0; 6]; 6];
        for bp in 0..3 {
            for ap in 0..3 {
                let raw = [
                    [counts[2 * bp][2 * ap], counts[2 * bp][2 * ap + 1]],
                    [counts[2 * bp + 1][2 * ap], counts[2 * bp + 1][2 * ap + 1]],
                ];
                // Only the x-axis pair (+, -) needs the peak-ratio
                // compensation; the z and y settings sit at symmetric or
                // on-axis detector positions.
                let row_ratio = if bp == 1 { efficiency_ratio } else { 1.0 };
                let col_ratio = if ap == 1 { efficiency_ratio } else { 1.0 };
                let block = crate::sim::normalize_block_rc(raw, row_ratio, col_ratio)
                    .map_err(TomoError::Sim)?;
                for r in 0..2 {
                    for c in 0..2 {
                        probs[2 * bp + r][2 * ap + c] = block[r][c];
                    }
                }
            }
        }
        Self::new(probs)
    }

    /// Exact probability table of a two-qubit state (each block is the
    /// Born-rule distribution of the corresponding setting pair).
    pub fn ideal(rho_ab: &DensityMatrix) -> Result<Self, TomoError> {
        if rho_ab.dim() != 4 {
            return Err(TomoError::Quantum(QuantumError::DimensionMismatch(
                rho_ab.dim(),
                4,
            )));
        }
        let mut probs = [[0.0; 6]; 6];
        for sb in Setting::ALL {
            for sa in Setting::ALL {
                let joint = crate::quantum::tensor_state(&sa.state(), &sb.state());
                let v = rho_ab.matrix() * joint.amplitudes();
                probs[sb.index()][sa.index()] = joint.amplitudes().dotc(&v).re.max(0.0);
            }
        }
        Self::new(probs)
    }

    pub fn prob(&self, arm_b: Setting, arm_a: Setting) -> f64 {
        self.probs[arm_b.index()][arm_a.index()]
    }

    pub fn grid(&self) -> &[[f64; 6]; 6] {
        &self.probs
    }
}

/// Two-qubit Pauli correlator `<sigma_a (x) sigma_b>` from the table block
/// of the corresponding setting pair (signed sum of the four entries).
pub fn correlator(t: &SettingTable, axis_a: Pauli, axis_b: Pauli) -> f64 {
    match (axis_a, axis_b) {
        (Pauli::Identity, Pauli::Identity) => 1.0,
        // Single-arm marginals: averaged over the three opposing-arm
        // setting pairs, which agree exactly on ideal tables.
        (a, Pauli::Identity) => {
            let mut acc = 0.0;
            for opp in Pauli::AXES {
                for sa in Setting::pair(a) {
                    for sb in Setting::pair(opp) {
                        acc += sa.sign() * t.prob(sb, sa);
                    }
                }
            }
            acc / 3.0
        }
        (Pauli::Identity, b) => {
            let mut acc = 0.0;
            for opp in Pauli::AXES {
                for sb in Setting::pair(b) {
                    for sa in Setting::pair(opp) {
                        acc += sb.sign() * t.prob(sb, sa);
                    }
                }
            }
            acc / 3.0
        }
        (a, b) => {
            let mut acc = 0.0;
            for sa in Setting::pair(a) {
                for sb in Setting::pair(b) {
                    acc += sa.sign() * sb.sign() * t.prob(sb, sa);
                }
            }
            acc
        }
    }
}

/// Linear inversion of the six-setting correlation table:
/// `rho = (1/4) sum_ij <sigma_i (x) sigma_j> sigma_i (x) sigma_j`.
/// Returns the raw inversion and its physical projection.
pub fn pauli_reconstruct(t: &SettingTable) -> (DensityMatrix, DensityMatrix) {
    let mut mat = DMatrix::<C64>::zeros(4, 4);
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let c = correlator(t, a, b);
            mat += tensor(&pauli(a), &pauli(b)).scale(0.25 * c);
        }
    }
    let raw = DensityMatrix::hermitized(mat);
    let projected = project_physical(&raw);
    (raw, projected)
}

/// Output of the single-scan integral inversion.
#[derive(Debug, Clone)]
pub struct PatternInversion {
    /// Population difference `rho_ll - rho_rr`.
    pub delta: f64,
    /// Off-diagonal element `rho_lr`.
    pub coherence: C64,
    /// Overlap factor of the two shifted sinc envelopes at this geometry.
    pub beta: f64,
    pub raw: DensityMatrix,
    pub projected: DensityMatrix,
}

/// Envelope-overlap factor `beta = 3/(2 dphi^2) (1 - sinc(2 dphi))`.
pub fn envelope_overlap(envelope_shift: f64) -> f64 {
    if envelope_shift.abs() < 1e-8 {
        return 1.0;
    }
    1.5 / (envelope_shift * envelope_shift) * (1.0 - sinc(2.0 * envelope_shift))
}

/// Recovers the qubit density matrix from one probability-density scan by
/// integrating it against the inversion kernels: the population difference
/// against `s_l^2 - s_r^2` and the coherence against the carrier-weighted
/// envelope product, with the closed-form overlap corrections.
pub fn pattern_invert(scan: &ScanRecord) -> Result<PatternInversion, TomoError> {
    if scan.kind != ScanKind::ProbabilityDensity {
        return Err(TomoError::WrongScanKind("probability density"));
    }
    scan.validate()?;
    let g = &scan.geometry;
    let s = derive_scales(g)?;
    let beta = envelope_overlap(s.envelope_shift);
    if (1.0 - beta).abs() < 0.05 {
        return Err(TomoError::InversionSingular(beta));
    }
    let need = 1.5 * s.lobe_width();
    let x_lo = scan.samples.first().unwrap().0;
    let x_hi = scan.samples.last().unwrap().0;
    let tol = 1e-9 * s.lobe_width();
    if x_lo > -need + tol || x_hi < need - tol {
        return Err(TomoError::WindowTooNarrow(x_lo, x_hi, need));
    }

    let k = s.pattern_scale;
    let half_shift = 0.5 * s.envelope_shift;
    let carrier = 2.0 * g.slit_separation() / g.slit_width * k;
    let mut delta_int = 0.0;
    let mut coh_int = C64::new(0.0, 0.0);
    for w in scan.samples.windows(2) {
        let ((x0, p0), (x1, p1)) = (w[0], w[1]);
        let dx = x1 - x0;
        let f = |x: f64, p: f64| {
            let sl = sinc(k * x - half_shift);
            let sr = sinc(k * x + half_shift);
            (
                (sl * sl - sr * sr) * p,
                C64::from_polar(sl * sr * p, carrier * x),
            )
        };
        let (d0, c0) = f(x0, p0);
        let (d1, c1) = f(x1, p1);
        delta_int += 0.5 * dx * (d0 + d1);
        coh_int += (c0 + c1) * 0.5 * dx;
    }
    // No kernel prefactor: the 1/m density scale lives inside P(x).
    let delta = 1.5 / (1.0 - beta) * delta_int;
    let coherence = coh_int * (1.5 / beta);
    let mat = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(0.5 * (1.0 + delta), 0.0),
            coherence,
            coherence.conj(),
            C64::new(0.5 * (1.0 - delta), 0.0),
        ],
    );
    let raw = DensityMatrix::hermitized(mat);
    let projected = project_physical(&raw);
    Ok(PatternInversion {
        delta,
        coherence,
        beta,
        raw,
        projected,
    })
}

/// Options for [`fit_conditional`].
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Also fit the slit-to-lens distance (a 5th parameter).
    pub fit_length: bool,
    /// Weight residuals by the inverse Poisson variance (1/max(counts, 1))
    /// instead of uniformly.
    pub poisson_weighted: bool,
    pub model: AmplitudeModel,
    /// Objective-evaluation budget per start.
    pub max_evaluations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            fit_length: false,
            poisson_weighted: false,
            model: AmplitudeModel::Sinc,
            max_evaluations: 4000,
        }
    }
}

/// Result of a least-squares fit of one counts scan.
#[derive(Debug, Clone)]
pub struct ConditionalFit {
    /// Fitted qubit state (trace 1, physical by construction).
    pub density: DensityMatrix,
    /// Fitted overall amplitude (expected counts per unit density).
    pub amplitude: f64,
    /// Fitted slit-to-lens distance, when requested.
    pub slit_to_lens: Option<f64>,
    /// Weighted sum of squared residuals at the optimum.
    pub residual: f64,
}

// rho(t) = T'T / Tr[T'T] with T = [[t0, 0], [t2 + i t3, t1]].
fn density_from_params(t: &[f64]) -> Option<DensityMatrix> {
    let (t0, t1, t2, t3) = (t[0], t[1], t[2], t[3]);
    let tr = t0 * t0 + t1 * t1 + t2 * t2 + t3 * t3;
    if tr < 1e-300 {
        return None;
    }
    let tl = C64::new(t2, t3);
    let mat = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new((t0 * t0 + tl.norm_sqr()) / tr, 0.0),
            tl.conj() * (t1 / tr),
            tl * (t1 / tr),
            C64::new(t1 * t1 / tr, 0.0),
        ],
    );
    Some(DensityMatrix::hermitized(mat))
}

// Cholesky parameters of a strictly positive qubit density matrix.
fn params_from_density(rho: &DensityMatrix) -> [f64; 4] {
    let m = rho.matrix();
    let t1 = m[(1, 1)].re.max(1e-12).sqrt();
    let tl = m[(1, 0)] / t1;
    let t0 = (m[(0, 0)].re - tl.norm_sqr()).max(0.0).sqrt();
    [t0, t1, tl.re, tl.im]
}

// Tabulated detector-response points for fast repeated pattern evaluation:
// for each scan sample, the Gauss-Legendre sub-positions of the top-hat
// convolution with their weights and the (2-component) projection states.
struct PatternTable {
    // (weight, m0, m1) per sub-position, grouped per sample.
    nodes: Vec<Vec<(f64, C64, C64)>>,
}

impl PatternTable {
    fn build(
        g: &OpticalGeometry,
        xs: &[f64],
        width: f64,
        model: AmplitudeModel,
    ) -> Result<Self, TomoError> {
        let subs: Vec<(f64, f64)> = if width > 0.0 {
            let (n, w) = gauss_legendre(5);
            n.iter()
                .zip(&w)
                .map(|(&t, &w)| (0.5 * width * t, w / 2.0))
                .collect()
        } else {
            vec![(0.0, 1.0)]
        };
        let mut nodes = Vec::with_capacity(xs.len());
        for &x in xs {
            let mut row = Vec::with_capacity(subs.len());
            for &(off, w) in &subs {
                let m = projection_state(g, x + off, model)?;
                row.push((w, m.amplitude(0), m.amplitude(1)));
            }
            nodes.push(row);
        }
        Ok(Self { nodes })
    }

    fn pattern(&self, rho: &DensityMatrix, out: &mut [f64]) {
        let m = rho.matrix();
        let (r00, r01, r11) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
        for (i, row) in self.nodes.iter().enumerate() {
            let mut acc = 0.0;
            for &(w, m0, m1) in row {
                let p = (m0.conj() * (r00 * m0 + r01 * m1)
                    + m1.conj() * (r01.conj() * m0 + r11 * m1))
                    .re;
                acc += w * p.max(0.0);
            }
            out[i] = acc;
        }
    }
}

// Deterministic Nelder-Mead minimizer; returns (argmin, min).
fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: &[f64],
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step[i];
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let (f_best, f_worst) = (simplex[0].1, simplex[n].1);
        if (f_worst - f_best).abs() <= 1e-12 * (f_best.abs() + 1e-30) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].0.clone();
        let reflect: Vec<f64> = (0..n).map(|j| 2.0 * centroid[j] - worst[j]).collect();
        let fr = eval(&reflect, &mut evals);
        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..n).map(|j| 3.0 * centroid[j] - 2.0 * worst[j]).collect();
            let fe = eval(&expand, &mut evals);
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let (contract, fc) = if fr < simplex[n].1 {
                let c: Vec<f64> = (0..n).map(|j| 1.5 * centroid[j] - 0.5 * worst[j]).collect();
                let fc = eval(&c, &mut evals);
                (c, fc)
            } else {
                let c: Vec<f64> = (0..n).map(|j| 0.5 * centroid[j] + 0.5 * worst[j]).collect();
                let fc = eval(&c, &mut evals);
                (c, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (contract, fc);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let v: Vec<f64> = (0..n).map(|j| 0.5 * (best[j] + item.0[j])).collect();
                    let fv = eval(&v, &mut evals);
                    *item = (v, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex.swap_remove(0)
}

const FIT_STARTS: [(f64, f64, f64); 9] = [
    (0.0, 0.0, 0.0),
    (0.7, 0.0, 0.0),
    (-0.7, 0.0, 0.0),
    (0.0, 0.7, 0.0),
    (0.0, -0.7, 0.0),
    (0.0, 0.0, 0.7),
    (0.0, 0.0, -0.7),
    (0.404, 0.404, 0.404),
    (-0.404, -0.404, -0.404),
];

/// Weighted least-squares fit of a counts scan to
/// `A * P(x | rho) + background`, with the state parametrized through a
/// Cholesky factor (so the fit is physical by construction), the amplitude
/// solved in closed form, and a deterministic 9-point multi-start search.
/// The recorded accidental rate of the scan is used as the known flat
/// background.
pub fn fit_conditional(scan: &ScanRecord, opts: &FitOptions) -> Result<ConditionalFit, TomoError> {
    if scan.kind != ScanKind::Counts {
        return Err(TomoError::WrongScanKind("counts"));
    }
    scan.validate()?;
    if scan.samples.len() < 30 {
        return Err(TomoError::TooFewSamples(scan.samples.len(), 30));
    }
    let vals = scan.values();
    if vals.windows(2).all(|w| w[0] == w[1]) {
        return Err(TomoError::DegenerateScan);
    }
    let xs = scan.positions();
    let background = scan.accidental_rate;
    let weights: Vec<f64> = if opts.poisson_weighted {
        vals.iter().map(|&c| 1.0 / c.max(1.0)).collect()
    } else {
        vec![1.0; vals.len()]
    };
    let data: Vec<f64> = vals.iter().map(|&c| c - background).collect();

    let fixed_table = if opts.fit_length {
        None
    } else {
        Some(PatternTable::build(
            &scan.geometry,
            &xs,
            scan.detector_width,
            opts.model,
        )?)
    };

    let mut pattern = vec![0.0; xs.len()];
    let mut objective = |params: &[f64]| -> f64 {
        let rho = match density_from_params(&params[..4]) {
            Some(r) => r,
            None => return f64::MAX,
        };
        match &fixed_table {
            Some(table) => table.pattern(&rho, &mut pattern),
            None => {
                let mut g = scan.geometry.clone();
                g.slit_to_lens = params[4];
                if g.validate().is_err() {
                    return f64::MAX;
                }
                let table = match PatternTable::build(&g, &xs, scan.detector_width, opts.model) {
                    Ok(t) => t,
                    Err(_) => return f64::MAX,
                };
                table.pattern(&rho, &mut pattern);
            }
        }
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..pattern.len() {
            num += weights[i] * data[i] * pattern[i];
            den += weights[i] * pattern[i] * pattern[i];
        }
        let amp = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };
        pattern
            .iter()
            .zip(&data)
            .zip(&weights)
            .map(|((&p, &c), &w)| {
                let r = c - amp * p;
                w * r * r
            })
            .sum()
    };

    let l0 = scan.geometry.slit_to_lens;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for &(bx, by, bz) in &FIT_STARTS {
        let rho0 = crate::quantum::density_from_bloch(BlochPoint::new(bx, by, bz));
        let p4 = params_from_density(&rho0);
        let mut x0 = p4.to_vec();
        let mut step = vec![0.1; 4];
        if opts.fit_length {
            x0.push(l0);
            step.push(0.02 * l0);
        }
        let (x, fx) = nelder_mead(&mut objective, &x0, &step, opts.max_evaluations);
        let better = match &best {
            None => true,
            Some((_, f)) => fx < *f,
        };
        if better {
            best = Some((x, fx));
        }
    }
    let (params, residual) = best.unwrap();
    let rho = density_from_params(&params[..4]).unwrap();

    // Recover the amplitude at the optimum.
    match &fixed_table {
        Some(table) => table.pattern(&rho, &mut pattern),
        None => {
            let mut g = scan.geometry.clone();
            g.slit_to_lens = params[4];
            PatternTable::build(&g, &xs, scan.detector_width, opts.model)?
                .pattern(&rho, &mut pattern);
        }
    }
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..pattern.len() {
        num += weights[i] * data[i] * pattern[i];
        den += weights[i] * pattern[i] * pattern[i];
    }
    let amplitude = if den > 0.0 { (num / den).max(0.0) } else { 0.0 };

    Ok(ConditionalFit {
        density: rho,
        amplitude,
        slit_to_lens: if opts.fit_length {
            Some(params[4])
        } else {
            None
        },
        residual,
    })
}

/// A set of detector positions with their measurement effects and the dual
/// reconstruction operators satisfying
/// `sum_i Tr[M_i sigma] Lambda_i = sigma`.
#[derive(Debug, Clone)]
pub struct DualFrame {
    pub points: Vec<f64>,
    pub effects: Vec<MeasurementEffect>,
    pub lambdas: Vec<DMatrix<C64>>,
    /// Condition number of the trace-normalized effect-overlap matrix.
    pub condition_number: f64,
}

/// Builds the dual frame for detector positions `points`: rows
/// `T_ij = Tr[M(x_i) sigma_j]` are pseudo-inverted and the columns of the
/// pseudo-inverse assembled back in the Pauli basis.
pub fn build_dual_frame(
    g: &OpticalGeometry,
    points: &[f64],
    model: AmplitudeModel,
) -> Result<DualFrame, TomoError> {
    if points.len() < 4 {
        return Err(TomoError::TooFewPoints(points.len()));
    }
    let n = points.len();
    let mut effects = Vec::with_capacity(n);
    let mut t = DMatrix::<f64>::zeros(n, 4);
    let mut t_scaled = DMatrix::<f64>::zeros(n, 4);
    for (i, &x) in points.iter().enumerate() {
        let eff = MeasurementEffect::at(g, x, model)?;
        for (j, axis) in Pauli::ALL.iter().enumerate() {
            let sigma = pauli(*axis);
            let overlap: C64 = (&sigma * &eff.operator).diagonal().iter().sum();
            t[(i, j)] = overlap.re;
        }
        let trace = t[(i, 0)];
        if trace <= 0.0 {
            return Err(TomoError::RankDeficient(f64::INFINITY));
        }
        for j in 0..4 {
            t_scaled[(i, j)] = t[(i, j)] / trace;
        }
        effects.push(eff);
    }
    let sv = t_scaled.svd(false, false).singular_values;
    let (s_max, s_min) = (sv.max(), sv.min());
    let condition_number = if s_min > 0.0 {
        s_max / s_min
    } else {
        f64::INFINITY
    };
    if !condition_number.is_finite() || condition_number > 1e8 {
        return Err(TomoError::RankDeficient(condition_number));
    }
    let svd_t = t.svd(true, true);
    let eps = 1e-12 * svd_t.singular_values.max();
    let pinv = svd_t
        .pseudo_inverse(eps)
        .map_err(|_| TomoError::RankDeficient(condition_number))?;
    let lambdas: Vec<DMatrix<C64>> = (0..n)
        .map(|i| {
            let mut m = DMatrix::<C64>::zeros(2, 2);
            for (j, axis) in Pauli::ALL.iter().enumerate() {
                m += pauli(*axis).scale(pinv[(j, i)]);
            }
            m
        })
        .collect();
    Ok(DualFrame {
        points: points.to_vec(),
        effects,
        lambdas,
        condition_number,
    })
}

/// Detector positions whose normalized measurement-state Bloch vectors best
/// approximate the octahedron vertices `+x, -x, +y, -y, +z, -z`, searched
/// over a dense grid spanning the central three lobes.
pub fn octahedral_points(
    g: &OpticalGeometry,
    model: AmplitudeModel,
) -> Result<Vec<f64>, TomoError> {
    let s = derive_scales(g)?;
    let half = 3.0 * s.lobe_width();
    let n = 24_001;
    let mut blochs: Vec<(f64, BlochPoint)> = Vec::with_capacity(n);
    for i in 0..n {
        let x = -half + 2.0 * half * i as f64 / (n - 1) as f64;
        let m = projection_state(g, x, model)?;
        if let Ok(b) = bloch_of_state(&m) {
            blochs.push((x, b));
        }
    }
    let targets = [
        (1.0, 0.0, 0.0),
        (-1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, -1.0, 0.0),
        (0.0, 0.0, 1.0),
        (0.0, 0.0, -1.0),
    ];
    let mut chosen: Vec<usize> = Vec::with_capacity(6);
    for (tx, ty, tz) in targets {
        let mut best: Option<(usize, f64)> = None;
        for (idx, (_, b)) in blochs.iter().enumerate() {
            if chosen.contains(&idx) {
                continue;
            }
            let dot = tx * b.bx + ty * b.by + tz * b.bz;
            if best.is_none_or(|(_, d)| dot > d) {
                best = Some((idx, dot));
            }
        }
        chosen.push(best.unwrap().0);
    }
    Ok(chosen.into_iter().map(|i| blochs[i].0).collect())
}

/// Assembles the two-qubit state from non-normalized arm-A conditionals:
/// `rho_AB = sum_i rho_A(x_i) (x) Lambda_i`, Hermitized and trace
/// normalized. Returns raw and physically projected outputs. The
/// conditionals must share a common relative scale (their traces carry the
/// per-position detection probabilities).
pub fn reconstruct_two_qubit(
    conditionals: &[DensityMatrix],
    frame: &DualFrame,
) -> Result<(DensityMatrix, DensityMatrix), TomoError> {
    if conditionals.len() != frame.points.len() {
        return Err(TomoError::CountMismatch(
            conditionals.len(),
            frame.points.len(),
        ));
    }
    let mut sum = DMatrix::<C64>::zeros(4, 4);
    for (rho, lambda) in conditionals.iter().zip(&frame.lambdas) {
        if rho.dim() != 2 {
            return Err(TomoError::Quantum(QuantumError::DimensionMismatch(
                rho.dim(),
                2,
            )));
        }
        sum += tensor(rho.matrix(), lambda);
    }
    let raw = DensityMatrix::hermitized(sum).normalized()?;
    let projected = project_physical(&raw);
    Ok((raw, projected))
}
