//! Numerical toolkit for spatial qubits and qudits defined by multi-slit
//! apertures.
//!
//! The library models photons whose quantum state is the slit they passed
//! through. It propagates the single-slit wavefunctions through a lens to a
//! scanning detector plane, builds the position-indexed POVM realized by the
//! detector, predicts coincidence patterns for one- and two-qubit states, and
//! reconstructs density matrices from (simulated or recorded) count data by
//! three independent routes:
//!
//! * six-setting Pauli linear inversion from image/focal-plane counts,
//! * single-scan pattern inversion in an intermediate detection plane,
//! * least-squares conditional fits combined through dual-frame
//!   reconstruction operators.
//!
//! All lengths are in meters, all probabilities dimensionless; detection
//! probabilities along a scan axis carry units of 1/m.

pub mod fixtures;
pub mod io;
pub mod optics;
pub mod povm;
pub mod quantum;
pub mod sim;
pub mod tomo;
pub mod units;

pub use optics::{derive_scales, AmplitudeModel, DerivedScales, OpticalGeometry, OpticsError};
pub use povm::{bloch_trajectory, completeness_defect, focal_plane_state, measurement_state};
pub use quantum::{
    bloch_of_density, bloch_of_state, condition, fidelity, pauli, project_physical, tensor,
    BlochPoint, DensityMatrix, Pauli, PureState, QuantumError, Side,
};
pub use sim::{
    detection_probability, joint_probability, normalize_block, prepared_state, simulate_scan,
    ScanKind, ScanRecord,
};
pub use tomo::{
    build_dual_frame, fit_conditional, pattern_invert, pauli_reconstruct, reconstruct_two_qubit,
    DualFrame, FitOptions, Setting, SettingTable, TomoError,
};
