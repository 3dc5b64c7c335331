use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fringe::MIN_SCAN_POINTS;
use crate::ExperimentConfig;

/// Molecules per RNG substream. Fixed so results do not depend on thread count.
pub const CHUNK_SIZE: usize = 1 << 16;
const MAX_CHUNKS: usize = 1 << 16;

/// How simulated observations are perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Infinite-ensemble limit: expected counts, ratios from the averaged fringe
    /// factor, each ratio reported with the nominal `ratio_err`.
    Exact { ratio_err: f64 },
    /// Ensemble estimate of each ratio plus independent normal noise of width `ratio_err`.
    GaussianRatio { ratio_err: f64 },
    /// Poisson-counted fringe scans, visibilities extracted and averaged over repeats.
    Counting,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub experiment: ExperimentConfig,
    /// Cross section used to generate the data, m².
    pub true_sigma: f64,
    /// Ensemble size per perturbed scan (or per ratio in `GaussianRatio` mode).
    pub n_molecules: usize,
    pub rng_seed: u64,
    pub points_per_scan: usize,
    /// Counting time per scan point, s.
    pub dwell_time: f64,
    /// Reference/perturbed scan pairs per distance.
    pub repeats: usize,
    pub noise: NoiseModel,
    /// Full height of a uniformly filled molecular beam around the laser offset, m.
    /// Zero means every molecule crosses at `offset_y`.
    pub beam_height: f64,
}

impl SimulationConfig {
    pub fn new(experiment: ExperimentConfig, true_sigma: f64, rng_seed: u64) -> Self {
        Self {
            experiment,
            true_sigma,
            n_molecules: 100_000,
            rng_seed,
            points_per_scan: 40,
            dwell_time: 1.0,
            repeats: 10,
            noise: NoiseModel::Counting,
            beam_height: 0.0,
        }
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.experiment.validate()?;
        let bad = |m: String| Err(Error::Domain(m));
        if !(self.true_sigma >= 0.0 && self.true_sigma.is_finite()) {
            return bad(format!("true_sigma must be >= 0 (got {})", self.true_sigma));
        }
        if self.n_molecules < 1 || self.n_molecules > CHUNK_SIZE * MAX_CHUNKS {
            return bad(format!("n_molecules out of range (got {})", self.n_molecules));
        }
        if self.points_per_scan < MIN_SCAN_POINTS {
            return bad(format!(
                "points_per_scan must be >= {MIN_SCAN_POINTS} (got {})",
                self.points_per_scan
            ));
        }
        if !(self.dwell_time > 0.0 && self.dwell_time.is_finite()) {
            return bad(format!("dwell_time must be positive (got {})", self.dwell_time));
        }
        if self.repeats < 1 {
            return bad("repeats must be >= 1".into());
        }
        if matches!(self.noise, NoiseModel::Counting) && self.repeats < 2 {
            return bad("counting noise needs at least 2 repeats for an error estimate".into());
        }
        match self.noise {
            NoiseModel::Exact { ratio_err } | NoiseModel::GaussianRatio { ratio_err } => {
                if !(ratio_err > 0.0 && ratio_err.is_finite()) {
                    return bad(format!("ratio_err must be positive (got {ratio_err})"));
                }
            }
            NoiseModel::Counting => {}
        }
        if !(self.beam_height >= 0.0 && self.beam_height.is_finite()) {
            return bad(format!("beam_height must be >= 0 (got {})", self.beam_height));
        }
        if self.beam_height > 0.0 && matches!(self.noise, NoiseModel::Exact { .. }) {
            return bad("exact mode has no closed form for a finite beam height".into());
        }
        Ok(())
    }
}
