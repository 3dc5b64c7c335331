use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fringe::RatioPoint;
use crate::physics::{
    mean_photon_number, recoil_shift, reduction_monochromatic, reduction_velocity_averaged_with,
};
use crate::{ExperimentConfig, QuadratureOptions};

/// Visibility ratios measured at several recoil-laser distances `D` (abscissa, m).
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionCurve {
    points: Vec<RatioPoint>,
    config: ExperimentConfig,
}

impl ReductionCurve {
    pub fn new(points: Vec<RatioPoint>, config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        if points.is_empty() {
            return Err(Error::domain("reduction curve needs at least one point"));
        }
        let l = config.interferometer.grating_separation;
        for p in &points {
            p.validate()?;
            if !(p.abscissa >= 0.0 && p.abscissa < l) {
                return Err(Error::domain(format!(
                    "distance {} m outside [0, L = {l} m)",
                    p.abscissa
                )));
            }
        }
        Ok(Self { points, config })
    }

    pub fn points(&self) -> &[RatioPoint] {
        &self.points
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    /// Same data with every error multiplied by `factor`.
    pub fn with_scaled_errors(&self, factor: f64) -> Result<Self> {
        let pts = self
            .points
            .iter()
            .map(|p| RatioPoint::new(p.abscissa, p.ratio, p.ratio_err * factor))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pts, self.config.clone())
    }
}

/// `Σ ((ratio_i - ⟨R⟩(D_i; σ)) / err_i)²`.
pub fn chi_square(curve: &ReductionCurve, sigma_abs: f64) -> Result<f64> {
    chi_square_with(curve, sigma_abs, &QuadratureOptions::default())
}

pub fn chi_square_with(curve: &ReductionCurve, sigma_abs: f64, opts: &QuadratureOptions) -> Result<f64> {
    if !(sigma_abs >= 0.0 && sigma_abs.is_finite()) {
        return Err(Error::domain(format!("cross section must be >= 0 (got {sigma_abs})")));
    }
    let terms = curve
        .points
        .par_iter()
        .map(|p| {
            let cfg = curve.config.at_distance(p.abscissa);
            let model = reduction_velocity_averaged_with(&cfg, sigma_abs, opts)?.value;
            Ok(((p.ratio - model) / p.ratio_err).powi(2))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(terms.iter().sum())
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PredictOptions {
    /// Also tabulate the monochromatic (`v = v₀`) reduction.
    pub monochromatic: bool,
    /// Also tabulate the band between these two cross sections.
    pub band: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePrediction {
    pub distance_m: f64,
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_mono: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_hi: Option<f64>,
}

/// Tabulates `⟨R⟩(D)` over `grid`, optionally with the monochromatic curve and a
/// cross-section band.
pub fn predict_curve(
    config: &ExperimentConfig,
    sigma_abs: f64,
    grid: &[f64],
    options: PredictOptions,
) -> Result<Vec<CurvePrediction>> {
    config.validate()?;
    let l = config.interferometer.grating_separation;
    if let Some(d) = grid.iter().find(|d| !(**d >= 0.0 && **d < l)) {
        return Err(Error::domain(format!("distance {d} m outside [0, L = {l} m)")));
    }
    if let Some((lo, hi)) = options.band {
        if !(lo >= 0.0 && hi >= 0.0) {
            return Err(Error::domain("band cross sections must be >= 0"));
        }
    }
    let opts = QuadratureOptions::default();
    grid.par_iter()
        .map(|&d| {
            let cfg = config.at_distance(d);
            let ratio = reduction_velocity_averaged_with(&cfg, sigma_abs, &opts)?.value;
            let ratio_mono = if options.monochromatic {
                let v0 = cfg.velocity.mean_velocity();
                let n0 = mean_photon_number(&cfg.recoil_laser, sigma_abs, v0)?;
                let s = recoil_shift(&cfg.molecule, cfg.recoil_laser.wavelength, d, v0)?;
                Some(reduction_monochromatic(n0, s, cfg.interferometer.grating_period)?)
            } else {
                None
            };
            let (band_lo, band_hi) = match options.band {
                Some((a, b)) => {
                    let ra = reduction_velocity_averaged_with(&cfg, a, &opts)?.value;
                    let rb = reduction_velocity_averaged_with(&cfg, b, &opts)?.value;
                    (Some(ra.min(rb)), Some(ra.max(rb)))
                }
                None => (None, None),
            };
            Ok(CurvePrediction {
                distance_m: d,
                ratio,
                ratio_mono,
                band_lo,
                band_hi,
            })
        })
        .collect()
}
