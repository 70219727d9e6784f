//! Six-setting Pauli tomography from a recorded coincidence-count table.
//!
//! Normalizes the raw 6x6 count grid into setting probabilities, inverts the
//! three two-qubit correlators into a density matrix, and scores the result
//! against the ideal symmetric slit state (|lr> + |rl>)/sqrt(2).

use slit_tomo::fixtures::{focal_efficiency_ratio, psi_slits, reference_counts};
use slit_tomo::quantum::Pauli;
use slit_tomo::tomo::correlator;
use slit_tomo::{fidelity, pauli_reconstruct, SettingTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let counts = reference_counts();
    let grid: [[f64; 6]; 6] = counts.map(|row| row.map(|c| c as f64));
    let table = SettingTable::from_counts(&grid, focal_efficiency_ratio())?;

    println!("correlators:");
    for axis in Pauli::AXES {
        println!(
            "  <sigma_{0:?} (x) sigma_{0:?}> = {1:+.4}",
            axis,
            correlator(&table, axis, axis)
        );
    }

    let (raw, projected) = pauli_reconstruct(&table);
    println!("\nreconstructed density matrix (real part):");
    for i in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|j| format!("{:+.3}", projected.entry(i, j).re))
            .collect();
        println!("  [{}]", row.join(", "));
    }

    let target = psi_slits();
    println!("\nfidelity (raw)       = {:.4}", fidelity(&raw, &target)?);
    println!(
        "fidelity (projected) = {:.4}",
        fidelity(&projected, &target)?
    );
    Ok(())
}
