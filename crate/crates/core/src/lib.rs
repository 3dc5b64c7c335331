//! Photon-recoil spectroscopy in a three-grating matter-wave interferometer.
//!
//! The crate models how single-photon absorption from a recoil laser reduces the
//! fringe visibility, and inverts measured visibility ratios to absolute
//! absorption cross sections.
//!
//! * [`physics`]: closed-form reduction model, generic over [`Scalar`].
//! * [`quadrature`]: adaptive Gauss–Kronrod integration used for velocity averaging.
//! * [`fringe`]: visibility extraction and auxiliary fits.
//! * [`estimation`]: chi-square fit of the cross section and error budgets.
//! * [`montecarlo`]: seeded particle-ensemble simulator used as an oracle.
//! * [`io`]: configuration files, CSV tables, JSON records and run manifests.

pub mod constants;
pub mod error;
pub mod estimation;
pub mod fringe;
pub mod io;
mod lsq;
pub mod montecarlo;
pub mod physics;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, ErrorClass, Result};
pub use scalar::Scalar;

pub type PhysicalConstants = constants::PhysicalConstants<f64>;
pub type MoleculeSpec = physics::MoleculeSpec<f64>;
pub type RecoilLaserSpec = physics::RecoilLaserSpec<f64>;
pub type InterferometerSpec = physics::InterferometerSpec<f64>;
pub type VelocityModel = physics::VelocityModel<f64>;
pub type ExperimentConfig = physics::ExperimentConfig<f64>;
pub type QuadratureOptions = quadrature::QuadratureOptions<f64>;
pub type ReductionEstimate = physics::ReductionEstimate<f64>;

pub type ExperimentConfigF32 = physics::ExperimentConfig<f32>;
pub type VelocityModelF32 = physics::VelocityModel<f32>;
