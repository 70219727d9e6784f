//! Complex-matrix quantum primitives: states, Pauli algebra, tensor products,
//! fidelity, Bloch coordinates, physicality enforcement, and partial
//! conditioning of bipartite states.
//!
//! Basis ordering is fixed globally as `{|l>, |r>}` for one qubit and
//! `{|ll>, |lr>, |rl>, |rr>}` for two (arm A first).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Hermiticity is checked in exact arithmetic terms.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues may dip slightly negative from accumulated rounding.
pub const PHYSICALITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero-norm state")]
    ZeroNorm,
}

/// Hermitian complex matrix holding populations and coherences.
///
/// The trace is not forced to one: conditional (post-selected) states carry
/// their detection probability as the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    /// Wraps a matrix after checking squareness and Hermiticity.
    pub fn new(mat: DMatrix<C64>) -> Result<Self, QuantumError> {
        if mat.nrows() != mat.ncols() {
            return Err(QuantumError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let asym = hermitian_defect(&mat);
        let scale = mat.iter().map(|c| c.norm()).fold(1.0, f64::max);
        if asym > HERMITICITY_TOL * scale {
            return Err(QuantumError::NotHermitian(asym));
        }
        Ok(Self { mat })
    }

    /// Replaces the matrix by its Hermitian part `(M + M^dagger)/2`.
    pub fn hermitized(mat: DMatrix<C64>) -> Self {
        let herm = (&mat + mat.adjoint()).scale(0.5);
        Self { mat: herm }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let m = &psi.amps * psi.amps.adjoint();
        Self { mat: m }
    }

    /// Maximally mixed state `I/dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= PHYSICALITY_TOL
    }

    /// All eigenvalues above `-PHYSICALITY_TOL`.
    pub fn is_physical(&self) -> bool {
        eigvalsh(&self.mat).iter().all(|&ev| ev >= -PHYSICALITY_TOL)
    }

    /// Rescales to unit trace. Errors on (numerically) zero trace.
    pub fn normalized(&self) -> Result<Self, QuantumError> {
        let t = self.trace();
        if t.abs() < 1e-300 {
            return Err(QuantumError::ZeroNorm);
        }
        Ok(Self {
            mat: self.mat.scale(1.0 / t),
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            mat: self.mat.scale(factor),
        }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.mat)
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat).norm()
    }
}

/// Complex state vector; non-normalized vectors are allowed (projection
/// states carry detection amplitudes in their norm).
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: DVector<C64>,
}

impl PureState {
    pub fn new(amps: DVector<C64>) -> Self {
        Self { amps }
    }

    pub fn from_slice(amps: &[C64]) -> Self {
        Self {
            amps: DVector::from_row_slice(amps),
        }
    }

    /// `|l>` for dim 2 (index 0 of the slit basis).
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self { amps: v }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitude(&self, i: usize) -> C64 {
        self.amps[i]
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn normalized(&self) -> Result<Self, QuantumError> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(QuantumError::ZeroNorm);
        }
        Ok(Self {
            amps: self.amps.scale(1.0 / n),
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            amps: self.amps.map(|a| a * c),
        }
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.dotc(&other.amps)
    }
}

/// Unit (or shorter) 3-vector locating a qubit state on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochPoint {
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
}

impl BlochPoint {
    pub fn new(bx: f64, by: f64, bz: f64) -> Self {
        Self { bx, by, bz }
    }

    pub fn norm(&self) -> f64 {
        (self.bx * self.bx + self.by * self.by + self.bz * self.bz).sqrt()
    }

    /// Azimuthal angle in the x-y plane, in `(-pi, pi]`.
    pub fn azimuth(&self) -> f64 {
        self.by.atan2(self.bx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    Identity,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::Identity, Pauli::X, Pauli::Y, Pauli::Z];
    pub const AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
}

/// Standard Pauli matrix in the `{|l>, |r>}` ordering:
/// `sigma_x = |l><r| + |r><l|`, `sigma_y = -i(|l><r| - |r><l|)`,
/// `sigma_z = |l><l| - |r><r|`.
pub fn pauli(axis: Pauli) -> DMatrix<C64> {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let entries = match axis {
        Pauli::Identity => [one, z, z, one],
        Pauli::X => [z, one, one, z],
        Pauli::Y => [z, -i, i, z],
        Pauli::Z => [one, z, z, -one],
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

/// Kronecker product in the `{|ll>, |lr>, |rl>, |rr>}` ordering (first factor
/// is arm A).
pub fn tensor(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub fn tensor_state(a: &PureState, b: &PureState) -> PureState {
    PureState::new(a.amplitudes().kronecker(b.amplitudes()))
}

/// Pure-target fidelity `<psi| rho |psi>`.
pub fn fidelity(rho: &DensityMatrix, psi: &PureState) -> Result<f64, QuantumError> {
    if rho.dim() != psi.dim() {
        return Err(QuantumError::DimensionMismatch(rho.dim(), psi.dim()));
    }
    let v = rho.matrix() * psi.amplitudes();
    let f = psi.amplitudes().dotc(&v);
    Ok(f.re)
}

/// Bloch coordinates `(Tr[rho sigma_x], Tr[rho sigma_y], Tr[rho sigma_z])` of
/// a qubit density matrix, normalized internally.
pub fn bloch_of_density(rho: &DensityMatrix) -> Result<BlochPoint, QuantumError> {
    if rho.dim() != 2 {
        return Err(QuantumError::DimensionMismatch(rho.dim(), 2));
    }
    let t = rho.trace();
    if t.abs() < 1e-300 {
        return Err(QuantumError::ZeroNorm);
    }
    let m = rho.matrix();
    let lr = m[(0, 1)];
    Ok(BlochPoint::new(
        2.0 * lr.re / t,
        -2.0 * lr.im / t,
        (m[(0, 0)].re - m[(1, 1)].re) / t,
    ))
}

pub fn bloch_of_state(psi: &PureState) -> Result<BlochPoint, QuantumError> {
    if psi.dim() != 2 {
        return Err(QuantumError::DimensionMismatch(psi.dim(), 2));
    }
    bloch_of_density(&DensityMatrix::from_pure(&psi.normalized()?))
}

/// Normalized qubit state at the given Bloch point (unit vector expected).
pub fn state_from_bloch(b: BlochPoint) -> PureState {
    let theta = b.bz.clamp(-1.0, 1.0).acos();
    let phi = b.by.atan2(b.bx);
    PureState::from_slice(&[
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ])
}

/// Density matrix `(I + b . sigma)/2`; valid for |b| <= 1.
pub fn density_from_bloch(b: BlochPoint) -> DensityMatrix {
    let half = 0.5;
    let mat = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(half * (1.0 + b.bz), 0.0),
            C64::new(half * b.bx, -half * b.by),
            C64::new(half * b.bx, half * b.by),
            C64::new(half * (1.0 - b.bz), 0.0),
        ],
    );
    DensityMatrix { mat }
}

/// Nearest trace-one positive-semidefinite matrix in Frobenius norm.
///
/// Diagonalizes the (Hermitian) input and projects the eigenvalue vector onto
/// the probability simplex: clip below a uniform shift chosen so the retained
/// eigenvalues sum to one. Idempotent on already-physical input.
pub fn project_physical(rho: &DensityMatrix) -> DensityMatrix {
    let eig = nalgebra::SymmetricEigen::new(rho.matrix().clone());
    let mut evs: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let projected = simplex_project(&mut evs);
    let dim = rho.dim();
    let mut diag = DMatrix::zeros(dim, dim);
    for (i, ev) in projected.iter().enumerate() {
        diag[(i, i)] = C64::new(*ev, 0.0);
    }
    let mat = &eig.eigenvectors * diag * eig.eigenvectors.adjoint();
    DensityMatrix::hermitized(mat)
}

/// Euclidean projection of a real vector onto the unit simplex.
fn simplex_project(v: &mut [f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &val) in sorted.iter().enumerate() {
        cumulative += val;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if val - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Subsystem on which a bipartite state gets conditioned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Partial inner product `<m| rho_ab |m>` on the chosen subsystem.
///
/// The result is a non-normalized qubit state on the remaining arm; its trace
/// is the (relative) probability of the post-selected outcome. `m` may be
/// non-normalized.
pub fn condition(
    rho_ab: &DensityMatrix,
    m: &PureState,
    side: Side,
) -> Result<DensityMatrix, QuantumError> {
    let db = m.dim();
    if !rho_ab.dim().is_multiple_of(db) {
        return Err(QuantumError::DimensionMismatch(rho_ab.dim(), db));
    }
    let da = rho_ab.dim() / db;
    let r = rho_ab.matrix();
    let mv = m.amplitudes();
    let out_dim = match side {
        Side::A => db,
        Side::B => da,
    };
    let mut out = DMatrix::zeros(out_dim, out_dim);
    match side {
        // rho_B[b, b'] = sum_{a, a'} conj(m_a) rho[(a,b),(a',b')] m_{a'}
        Side::A => {
            for b in 0..db {
                for bp in 0..db {
                    let mut acc = C64::new(0.0, 0.0);
                    for a in 0..da {
                        for ap in 0..da {
                            acc += mv[a].conj() * r[(a * db + b, ap * db + bp)] * mv[ap];
                        }
                    }
                    out[(b, bp)] = acc;
                }
            }
        }
        // rho_A[a, a'] = sum_{b, b'} conj(m_b) rho[(a,b),(a',b')] m_{b'}
        Side::B => {
            for a in 0..da {
                for ap in 0..da {
                    let mut acc = C64::new(0.0, 0.0);
                    for b in 0..db {
                        for bp in 0..db {
                            acc += mv[b].conj() * r[(a * db + b, ap * db + bp)] * mv[bp];
                        }
                    }
                    out[(a, ap)] = acc;
                }
            }
        }
    }
    Ok(DensityMatrix::hermitized(out))
}

fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

fn eigvalsh(m: &DMatrix<C64>) -> Vec<f64> {
    nalgebra::SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// Largest singular value of a Hermitian matrix (max |eigenvalue|).
pub fn spectral_norm_hermitian(m: &DMatrix<C64>) -> f64 {
    eigvalsh(m).iter().fold(0.0, |acc, ev| acc.max(ev.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng as _, SeedableRng as _};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_pure(rng: &mut ChaCha8Rng, dim: usize) -> PureState {
        let amps: Vec<C64> = (0..dim)
            .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        PureState::from_slice(&amps).normalized().unwrap()
    }

    #[test]
    fn pauli_z_is_diag_plus_minus() {
        let sz = pauli(Pauli::Z);
        assert_eq!(sz[(0, 0)], c(1.0, 0.0));
        assert_eq!(sz[(1, 1)], c(-1.0, 0.0));
        assert_eq!(sz[(0, 1)], c(0.0, 0.0));
        let id = pauli(Pauli::Identity);
        assert_eq!(id, DMatrix::identity(2, 2));
    }

    #[test]
    fn pauli_involution() {
        for axis in Pauli::ALL {
            let s = pauli(axis);
            let sq = &s * &s;
            assert!((sq - DMatrix::<C64>::identity(2, 2)).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_ordering() {
        let id = pauli(Pauli::Identity);
        assert_eq!(tensor(&id, &id), DMatrix::identity(4, 4));
        // sigma_z (x) I = diag(1, 1, -1, -1) in {|ll>,|lr>,|rl>,|rr>}
        let zi = tensor(&pauli(Pauli::Z), &id);
        let expected: Vec<f64> = vec![1.0, 1.0, -1.0, -1.0];
        for (i, e) in expected.iter().enumerate() {
            assert_abs_diff_eq!(zi[(i, i)].re, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn psi_slits_is_zz_eigenstate() {
        // sigma_z (x) sigma_z |Psi_slits> = -|Psi_slits>
        let psi = crate::fixtures::psi_slits();
        let zz = tensor(&pauli(Pauli::Z), &pauli(Pauli::Z));
        let v = zz * psi.amplitudes();
        let expected = psi.amplitudes().scale(-1.0);
        assert!((v - expected).norm() < 1e-15);
    }

    #[test]
    fn fidelity_of_own_projector_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let psi = random_pure(&mut rng, 2);
            let rho = DensityMatrix::from_pure(&psi);
            assert_abs_diff_eq!(fidelity(&rho, &psi).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(4);
        let psi = PureState::basis(2, 0);
        assert!(fidelity(&rho, &psi).is_err());
    }

    #[test]
    fn bloch_poles_and_equator() {
        let l = PureState::basis(2, 0);
        let b = bloch_of_state(&l).unwrap();
        assert_abs_diff_eq!(b.bz, 1.0, epsilon = 1e-15);
        let plus = PureState::from_slice(&[c(1.0, 0.0), c(1.0, 0.0)]);
        let b = bloch_of_state(&plus).unwrap();
        assert_abs_diff_eq!(b.bx, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.bz, 0.0, epsilon = 1e-15);
        let plus_i = PureState::from_slice(&[c(1.0, 0.0), c(0.0, 1.0)]);
        let b = bloch_of_state(&plus_i).unwrap();
        assert_abs_diff_eq!(b.by, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bloch_zero_norm_errors() {
        let z = PureState::from_slice(&[c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(bloch_of_state(&z).is_err());
    }

    #[test]
    fn project_physical_idempotent_and_clips() {
        let rho = crate::fixtures::psi_slits_density();
        let p = project_physical(&rho);
        assert!(p.frobenius_distance(&rho) < 1e-12);

        let bad = DensityMatrix::hermitized(DMatrix::from_row_slice(
            2,
            2,
            &[c(1.1, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.1, 0.0)],
        ));
        let p = project_physical(&bad);
        assert_abs_diff_eq!(p.entry(0, 0).re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.entry(1, 1).re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn project_physical_random_perturbation_is_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let base = crate::fixtures::pauli_density_matrix();
        for _ in 0..10 {
            let noise = DMatrix::from_fn(4, 4, |_, _| {
                c(
                    0.05 * (rng.gen::<f64>() - 0.5),
                    0.05 * (rng.gen::<f64>() - 0.5),
                )
            });
            let perturbed = DensityMatrix::hermitized(base.matrix() + noise);
            let p = project_physical(&perturbed);
            assert!(p.is_physical());
            assert_abs_diff_eq!(p.trace(), 1.0, epsilon = 1e-9);
        }
    }

    /// Brute-force eigen-oracle: the projection must not increase the
    /// Frobenius distance to any physical matrix.
    #[test]
    fn project_physical_contractivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let herm = DensityMatrix::hermitized(DMatrix::from_fn(2, 2, |_, _| {
                c(rng.gen::<f64>() - 0.2, rng.gen::<f64>() - 0.5)
            }));
            let projected = project_physical(&herm);
            for _ in 0..20 {
                let target = project_physical(&DensityMatrix::hermitized(DMatrix::from_fn(
                    2,
                    2,
                    |_, _| c(rng.gen::<f64>(), rng.gen::<f64>() - 0.5),
                )));
                assert!(
                    projected.frobenius_distance(&target)
                        <= herm.frobenius_distance(&target) + 1e-12
                );
            }
        }
    }

    #[test]
    fn condition_on_basis_state() {
        // <l|_B Psi><Psi|_B l> = 0.5 |r><r|
        let psi = crate::fixtures::psi_slits();
        let rho = DensityMatrix::from_pure(&psi);
        let l = PureState::basis(2, 0);
        let out = condition(&rho, &l, Side::B).unwrap();
        assert_abs_diff_eq!(out.entry(1, 1).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(out.entry(0, 0).re, 0.0, epsilon = 1e-15);
        assert!(out.entry(0, 1).norm() < 1e-15);
    }

    #[test]
    fn condition_on_plus_state() {
        // Conditioning Psi_slits on |+>_B leaves 0.5 |+><+| in A.
        let psi = crate::fixtures::psi_slits();
        let rho = DensityMatrix::from_pure(&psi);
        let s = 1.0 / 2.0_f64.sqrt();
        let plus = PureState::from_slice(&[c(s, 0.0), c(s, 0.0)]);
        let out = condition(&rho, &plus, Side::B).unwrap();
        assert_abs_diff_eq!(out.trace(), 0.5, epsilon = 1e-12);
        let expected = DensityMatrix::from_pure(&plus).scale(0.5);
        assert!(out.frobenius_distance(&expected) < 1e-12);
    }

    #[test]
    fn condition_scales_quadratically() {
        let psi = crate::fixtures::psi_slits();
        let rho = DensityMatrix::from_pure(&psi);
        let m = PureState::from_slice(&[c(0.3, 0.1), c(-0.2, 0.7)]);
        let scaled = m.scale(c(2.0, 1.0));
        let t1 = condition(&rho, &m, Side::B).unwrap().trace();
        let t2 = condition(&rho, &scaled, Side::B).unwrap().trace();
        assert_abs_diff_eq!(t2, t1 * 5.0, epsilon = 1e-12);
    }

    #[test]
    fn condition_linearity_in_rho() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let r1 = DensityMatrix::from_pure(&random_pure(&mut rng, 4));
            let r2 = DensityMatrix::from_pure(&random_pure(&mut rng, 4));
            let m = random_pure(&mut rng, 2);
            let mixed =
                DensityMatrix::hermitized(r1.matrix().scale(0.25) + r2.matrix().scale(0.75));
            let lhs = condition(&mixed, &m, Side::B).unwrap();
            let c1 = condition(&r1, &m, Side::B).unwrap();
            let c2 = condition(&r2, &m, Side::B).unwrap();
            let rhs = DensityMatrix::hermitized(c1.matrix().scale(0.25) + c2.matrix().scale(0.75));
            assert!(lhs.frobenius_distance(&rhs) < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn fidelity_in_unit_interval(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random_pure(&mut rng, 2);
            let target = random_pure(&mut rng, 2);
            let rho = project_physical(&DensityMatrix::from_pure(&psi));
            let f = fidelity(&rho, &target).unwrap();
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&f));
        }

        #[test]
        fn bloch_round_trip(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v: [f64; 3] = [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            prop_assume!(n > 1e-3);
            let b = BlochPoint::new(v[0] / n, v[1] / n, v[2] / n);
            let back = bloch_of_state(&state_from_bloch(b)).unwrap();
            prop_assert!((back.bx - b.bx).abs() < 1e-9);
            prop_assert!((back.by - b.by).abs() < 1e-9);
            prop_assert!((back.bz - b.bz).abs() < 1e-9);
        }
    }
}
