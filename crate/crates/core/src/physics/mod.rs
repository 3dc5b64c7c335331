//! Closed-form model of visibility loss from single-photon recoil.
//!
//! A molecule crossing the recoil laser absorbs a Poisson-distributed number of
//! photons. Each absorption kicks it sideways by `h / λ_k`; by the time it
//! reaches the third grating the kick has become a lateral shift
//! `s = h D / (m v λ_k)`. Averaging the shifted and unshifted fringe components
//! reduces the observed contrast.
//!
//! # Mean photon number and the waist convention
//!
//! All waists are 1/e² intensity radii. The recoil beam intensity is
//!
//! ```text
//! I(x, y) = 2 P / (π w_x w_y) · exp(-2 x² / w_x² - 2 y² / w_y²)
//! ```
//!
//! A molecule moving along `x` with speed `v` at height `y` absorbs on average
//!
//! ```text
//! n₀ = σ λ / (h c v) ∫ I(x, y) dx
//!    = σ λ / (h c v) · 2 P / (π w_x w_y) · w_x √(π/2) · exp(-2 y² / w_y²)
//!    = √(2/π) · σ λ P / (h c w_y v) · exp(-2 y² / w_y²)
//! ```
//!
//! so the waist along the flight direction cancels. It is still carried in
//! [`RecoilLaserSpec`] as part of the instrument record.
//!
//! # Velocity averaging
//!
//! For a distribution of velocities the complex fringe factor
//! `exp(-n₀(v) [1 - exp(2πi s(v) / d)])` is averaged first and its modulus is
//! taken afterwards. The Gaussian model is truncated to
//! `[max(v₀ - 8σ_v, 0), v₀ + 8σ_v]` and renormalized on that interval.

mod model;
mod types;

pub use model::{
    first_minimum_distance, mean_photon_number, offset_intensity_factor, recoil_shift,
    reduction_asymptotic, reduction_monochromatic, reduction_velocity_averaged,
    reduction_velocity_averaged_with, revival_period, velocity_averaged_fringe_factor,
    ReductionEstimate,
};
pub use types::{
    ExperimentConfig, InterferometerSpec, MoleculeSpec, RecoilLaserSpec, VelocityModel,
    GAUSSIAN_TRUNCATION_SIGMAS,
};
