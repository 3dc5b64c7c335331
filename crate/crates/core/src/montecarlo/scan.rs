use num_complex::Complex;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::{NoiseModel, SimulationConfig};
use super::ensemble::Sampler;
use super::rng::{poisson, Purpose, StreamId};
use crate::error::{Error, Result};
use crate::estimation::ReductionCurve;
use crate::fringe::{extract_visibility, FringeScan, PeriodMode, RatioPoint};
use crate::physics::velocity_averaged_fringe_factor;
use crate::{ExperimentConfig, QuadratureOptions};

/// `n` G3 offsets `k·d/n`, covering exactly one period.
pub fn default_offset_grid(period: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * period / n as f64).collect()
}

/// Mean fringe phase factor `⟨e^{2πi shift/d}⟩` for one perturbed scan.
fn phase_factor(config: &SimulationConfig, point: usize, repeat: usize) -> Result<Complex<f64>> {
    match config.noise {
        NoiseModel::Exact { .. } => Ok(velocity_averaged_fringe_factor(
            &config.experiment,
            config.true_sigma,
            &QuadratureOptions::default(),
        )?
        .factor),
        NoiseModel::GaussianRatio { .. } | NoiseModel::Counting => {
            let sampler = Sampler::new(config)?;
            let base = StreamId::new(Purpose::Ensemble, point, repeat);
            Ok(sampler
                .phase_moments(config.rng_seed, base, config.n_molecules)
                .mean())
        }
    }
}

fn scan_at(
    config: &SimulationConfig,
    grid: &[f64],
    perturbed: bool,
    point: usize,
    repeat: usize,
) -> Result<FringeScan> {
    let exp = &config.experiment;
    let factor = if perturbed {
        phase_factor(config, point, repeat)?
    } else {
        Complex::new(1.0, 0.0)
    };
    let d = exp.interferometer.grating_period;
    let mu = exp.baseline_mean_rate;
    let v = exp.baseline_visibility;
    let purpose = if perturbed {
        Purpose::PerturbedCounts
    } else {
        Purpose::ReferenceCounts
    };
    let mut rng = StreamId::new(purpose, point, repeat).rng(config.rng_seed);
    let counts = grid
        .iter()
        .map(|&x| {
            let (s, c) = (2.0 * std::f64::consts::PI * x / d).sin_cos();
            let rate = mu * (1.0 + v * (Complex::new(c, s) * factor).re);
            let expected = rate.max(0.0) * config.dwell_time;
            match config.noise {
                NoiseModel::Exact { .. } => expected,
                _ => poisson(&mut rng, expected) as f64,
            }
        })
        .collect();
    Ok(FringeScan::new(grid.to_vec(), counts, config.dwell_time)?
        .with_metadata("source", "simulation")
        .with_metadata("seed", config.rng_seed.to_string())
        .with_metadata("distance_m", format!("{:e}", exp.recoil_laser.distance))
        .with_metadata("perturbed", perturbed.to_string()))
}

/// Simulated G3 scan at the configured recoil distance. Unperturbed scans use a
/// phase factor of 1; perturbed scans use the ensemble (or its exact limit).
pub fn simulate_fringe_scan(config: &SimulationConfig, grid: &[f64], perturbed: bool) -> Result<FringeScan> {
    config.validate()?;
    scan_at(config, grid, perturbed, 0, 0)
}

/// One distance of a simulated reduction curve. `failure` is set, and the ratio
/// left empty, when the point could not be produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedPoint {
    pub distance_m: f64,
    pub ratio: Option<f64>,
    pub ratio_err: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedCurve {
    pub points: Vec<SimulatedPoint>,
    pub config: ExperimentConfig,
}

impl SimulatedCurve {
    pub fn failures(&self) -> impl Iterator<Item = &SimulatedPoint> {
        self.points.iter().filter(|p| p.failure.is_some())
    }

    /// The curve for fitting; an error if any point failed.
    pub fn curve(&self) -> Result<ReductionCurve> {
        if let Some(first) = self.failures().next() {
            return Err(Error::SimulationFailed {
                failed: self.failures().count(),
                total: self.points.len(),
                first_distance_m: first.distance_m,
                first_reason: first.failure.clone().unwrap_or_default(),
            });
        }
        self.successful_curve()
    }

    /// The curve built from successful points only.
    pub fn successful_curve(&self) -> Result<ReductionCurve> {
        let pts = self
            .points
            .iter()
            .filter_map(|p| match (p.ratio, p.ratio_err) {
                (Some(r), Some(e)) => Some(RatioPoint::new(p.distance_m, r, e)),
                _ => None,
            })
            .collect::<Result<Vec<_>>>()?;
        ReductionCurve::new(pts, self.config.clone())
    }
}

fn simulate_point(config: &SimulationConfig, point: usize) -> Result<(f64, f64)> {
    let exp = &config.experiment;
    match config.noise {
        NoiseModel::Exact { ratio_err } => {
            let est = velocity_averaged_fringe_factor(exp, config.true_sigma, &QuadratureOptions::default())?;
            Ok((est.value, ratio_err))
        }
        NoiseModel::GaussianRatio { ratio_err } => {
            let sampler = Sampler::new(config)?;
            let base = StreamId::new(Purpose::Ensemble, point, 0);
            let mc = sampler
                .phase_moments(config.rng_seed, base, config.n_molecules)
                .reduction();
            let mut rng = StreamId::new(Purpose::RatioNoise, point, 0).rng(config.rng_seed);
            let noise = Normal::new(0.0, ratio_err).map_err(|e| Error::Domain(e.to_string()))?;
            Ok((mc.ratio + noise.sample(&mut rng), ratio_err))
        }
        NoiseModel::Counting => {
            let d = exp.interferometer.grating_period;
            let grid = default_offset_grid(d, config.points_per_scan);
            let mut ratios = Vec::with_capacity(config.repeats);
            for r in 0..config.repeats {
                let reference = scan_at(config, &grid, false, point, r)?;
                let perturbed = scan_at(config, &grid, true, point, r)?;
                let v_ref = extract_visibility(&reference, d, PeriodMode::Fixed)?;
                let v_pert = extract_visibility(&perturbed, d, PeriodMode::Fixed)?;
                if v_ref.visibility <= 0.0 {
                    return Err(Error::Domain("reference visibility is zero".into()));
                }
                ratios.push(v_pert.visibility / v_ref.visibility);
            }
            let n = ratios.len() as f64;
            let mean = ratios.iter().sum::<f64>() / n;
            let var = ratios.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok((mean, (var / n).sqrt()))
        }
    }
}

/// Ratio points at each distance in `distances`, generated according to
/// `config.noise`. Per-point failures are recorded, not dropped.
pub fn simulate_reduction_curve(config: &SimulationConfig, distances: &[f64]) -> Result<SimulatedCurve> {
    config.validate()?;
    if distances.is_empty() {
        return Err(Error::domain("distance grid is empty"));
    }
    let l = config.experiment.interferometer.grating_separation;
    if let Some(&bad) = distances.iter().find(|&&d| !(d >= 0.0 && d < l)) {
        return Err(Error::domain(format!("distance {bad} m outside [0, L = {l} m)")));
    }
    let points = distances
        .iter()
        .enumerate()
        .map(|(i, &dist)| {
            let cfg = SimulationConfig {
                experiment: config.experiment.at_distance(dist),
                ..config.clone()
            };
            let outcome = simulate_point(&cfg, i).and_then(|(ratio, err)| {
                if !(ratio > 0.0 && ratio.is_finite()) {
                    Err(Error::Domain(format!("non-positive ratio {ratio}")))
                } else if !(err > 0.0 && err.is_finite()) {
                    Err(Error::Domain(format!("zero spread over repeats (err {err})")))
                } else {
                    Ok((ratio, err))
                }
            });
            match outcome {
                Ok((ratio, err)) => SimulatedPoint {
                    distance_m: dist,
                    ratio: Some(ratio),
                    ratio_err: Some(err),
                    failure: None,
                },
                Err(e) => SimulatedPoint {
                    distance_m: dist,
                    ratio: None,
                    ratio_err: None,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SimulatedCurve {
        points,
        config: config.experiment.clone(),
    })
}
