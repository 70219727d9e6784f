//! Bundled reference dataset: the double-slit geometry, the published
//! six-setting coincidence tables, and the two published two-qubit density
//! matrices used as regression targets throughout the test suite.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::optics::OpticalGeometry;
use crate::quantum::{DensityMatrix, PureState};
use crate::tomo::SettingTable;

/// Detector slit width used for the six-setting correlation runs.
pub const DETECTOR_WIDTH_COARSE: f64 = 40e-6;
/// Detector slit width used for the intermediate-plane conditional scans.
pub const DETECTOR_WIDTH_FINE: f64 = 20e-6;

/// Maximally entangled target state `(|lr> + |rl>)/sqrt(2)`.
pub fn psi_slits() -> PureState {
    let s = 1.0 / 2.0_f64.sqrt();
    PureState::from_slice(&[
        C64::new(0.0, 0.0),
        C64::new(s, 0.0),
        C64::new(s, 0.0),
        C64::new(0.0, 0.0),
    ])
}

pub fn psi_slits_density() -> DensityMatrix {
    DensityMatrix::from_pure(&psi_slits())
}

/// Reference double-slit geometry: 810 nm light, 40 um slits separated by
/// 150 um, f = 50 mm lens at L = 2f, detector at distance `z` behind the
/// lens.
pub fn reference_geometry(z: f64) -> OpticalGeometry {
    OpticalGeometry {
        wavelength: 810e-9,
        slit_width: 40e-6,
        slit_offsets: vec![-75e-6, 75e-6],
        focal_length: 50e-3,
        slit_to_lens: 100e-3,
        lens_to_detector: z,
    }
}

/// Reference geometry at the intermediate plane `z = 1.8 f` used for the
/// conditional-scan experiments.
pub fn reference_geometry_intermediate() -> OpticalGeometry {
    reference_geometry(1.8 * 50e-3)
}

/// Raw coincidence counts for the 36 setting pairs. Rows are the fixed arm B
/// setting, columns the scanning arm A setting, both ordered
/// `l, r, +, -, +i, -i`.
pub fn reference_counts() -> [[u64; 6]; 6] {
    [
        [77, 14838, 995, 999, 957, 967],
        [14885, 66, 993, 888, 953, 970],
        [1032, 1071, 643, 22, 340, 288],
        [1050, 986, 22, 595, 290, 313],
        [1063, 1053, 309, 308, 554, 29],
        [1008, 1049, 320, 276, 17, 576],
    ]
}

/// Normalized setting-pair probabilities derived from [`reference_counts`]
/// (each conjugate-setting 2x2 block sums to one after efficiency
/// compensation).
pub fn reference_probabilities() -> SettingTable {
    SettingTable::new([
        [0.003, 0.497, 0.253, 0.262, 0.252, 0.248],
        [0.498, 0.002, 0.252, 0.233, 0.251, 0.249],
        [0.245, 0.255, 0.486, 0.017, 0.275, 0.227],
        [0.258, 0.242, 0.017, 0.480, 0.243, 0.255],
        [0.258, 0.256, 0.254, 0.262, 0.484, 0.025],
        [0.238, 0.248, 0.256, 0.228, 0.014, 0.477],
    ])
    .expect("reference table is well formed")
}

/// Detection-efficiency compensation ratio between the on-axis `|l>+|r>` and
/// off-axis `|l>-|r>` focal-plane detector positions, recovered from the
/// published raw and normalized sigma_x blocks by the two-row consistency
/// condition `w^2 = (p_mm * c_pp) / (p_pp * c_mm)`.
pub fn focal_efficiency_ratio() -> f64 {
    ((0.480 * 643.0) / (0.486 * 595.0_f64)).sqrt()
}

/// Two-qubit density matrix published for the Pauli-setting reconstruction,
/// in the `{|ll>, |lr>, |rl>, |rr>}` basis.
pub fn pauli_density_matrix() -> DensityMatrix {
    let c = C64::new;
    DensityMatrix::hermitized(DMatrix::from_row_slice(
        4,
        4,
        &[
            c(0.003, 0.0),
            c(-0.005, -0.007),
            c(-0.006, 0.0),
            c(0.002, -0.006),
            c(-0.005, 0.007),
            c(0.498, 0.0),
            c(0.463, -0.024),
            c(0.009, 0.001),
            c(-0.006, 0.0),
            c(0.463, 0.024),
            c(0.497, 0.0),
            c(0.008, -0.007),
            c(0.002, 0.006),
            c(0.009, -0.001),
            c(0.008, 0.007),
            c(0.002, 0.0),
        ],
    ))
}

/// Two-qubit density matrix published for the conditional-scan (dual-frame)
/// reconstruction, in the `{|ll>, |lr>, |rl>, |rr>}` basis.
pub fn scan_density_matrix() -> DensityMatrix {
    let c = C64::new;
    DensityMatrix::hermitized(DMatrix::from_row_slice(
        4,
        4,
        &[
            c(0.008, 0.0),
            c(0.008, -0.012),
            c(0.015, 0.021),
            c(-0.018, -0.001),
            c(0.008, 0.012),
            c(0.485, 0.0),
            c(0.347, -0.038),
            c(0.002, -0.027),
            c(0.015, -0.021),
            c(0.347, 0.038),
            c(0.469, 0.0),
            c(0.008, 0.005),
            c(-0.018, 0.001),
            c(0.002, 0.027),
            c(0.008, -0.005),
            c(0.038, 0.0),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::fidelity;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pauli_matrix_fidelity() {
        let f = fidelity(&pauli_density_matrix(), &psi_slits()).unwrap();
        assert_abs_diff_eq!(f, 0.961, epsilon = 1e-3);
    }

    #[test]
    fn scan_matrix_fidelity() {
        let f = fidelity(&scan_density_matrix(), &psi_slits()).unwrap();
        assert_abs_diff_eq!(f, 0.824, epsilon = 1e-3);
    }

    #[test]
    fn efficiency_ratio_value() {
        assert_abs_diff_eq!(focal_efficiency_ratio(), 1.0331, epsilon = 1e-4);
    }
}
