//! Particle-ensemble simulator: molecules with sampled velocities absorb a Poisson
//! number of photons, each recoil shifting their fringe by `s(v)`. Provides an
//! independent check on the quadrature model and synthetic scans and curves.
//!
//! Every random draw comes from a ChaCha8 stream addressed by
//! `(seed, purpose, distance index, repeat, chunk)`, so output is independent
//! of the thread count.

mod config;
mod ensemble;
mod rng;
mod scan;

pub use config::{NoiseModel, SimulationConfig, CHUNK_SIZE};
pub use ensemble::{ensemble_reduction, estimate_reduction, sample_ensemble, EnsembleSample, MonteCarloReduction};
pub use rng::POISSON_INVERSION_LIMIT;
pub use scan::{
    default_offset_grid, simulate_fringe_scan, simulate_reduction_curve, SimulatedCurve, SimulatedPoint,
};
