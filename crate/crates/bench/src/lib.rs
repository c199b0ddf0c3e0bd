//! Fixed parameter points shared by the benchmarks.

use induco_core::validation::calibrated_counting_setup;
use induco_core::{DetectionParams, ExperimentParams};

/// Transmission grid for closed-form sweeps.
pub fn t_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Partial transmission with imperfect overlap at moderate gain.
pub fn moderate_gain() -> ExperimentParams {
    ExperimentParams {
        gain: 0.2,
        t_mag: 0.5,
        gamma_mag: 0.855,
        ..ExperimentParams::default()
    }
}

/// Counting setup calibrated to the reference singles rates.
pub fn counting_setup() -> (ExperimentParams, DetectionParams) {
    calibrated_counting_setup(0.77, 0.855, 2024).expect("reference setup is valid")
}
