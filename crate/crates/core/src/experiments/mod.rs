//! Parameter studies, their outputs, and the command-line front end.

pub mod cli;
pub mod config;
pub mod output;
pub mod studies;

use num_complex::Complex64;

pub use config::{PenaltyMode, StudyConfig, StudyKind};
pub use studies::{run_study, write_outputs, StudyOutput, StudyRow};

/// Dispersion-tuned CIP penalty `-sqrt(3)/24 - sqrt(3)/1728 (kh)^2`.
pub fn penalty_gamma(kh: f64) -> Complex64 {
    let s3 = 3f64.sqrt();
    Complex64::new(-s3 / 24.0 - s3 / 1728.0 * kh * kh, 0.0)
}
