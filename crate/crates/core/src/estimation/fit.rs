use serde::{Deserialize, Serialize};

use super::curve::{chi_square_with, ReductionCurve};
use super::minimize::{bisect_root, brent_minimize};
use super::quick::systematic_error;
use crate::error::{Error, Result};
use crate::physics::mean_photon_number;
use crate::QuadratureOptions;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Upper end of the search range, m².
    pub sigma_max: f64,
    /// Size of the coarse scan that locates the global minimum.
    pub prescan_points: usize,
    /// Relative tolerance on the minimizing cross section.
    pub sigma_rtol: f64,
    /// Quadrature settings for each model evaluation. Looser than the
    /// library default: a 1e-8 error in a ratio moves χ² by far less than
    /// the Δχ² = 1 resolution, and the low-velocity tail makes 1e-10 costly.
    pub quadrature: QuadratureOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            sigma_max: 1e-19,
            prescan_points: 64,
            sigma_rtol: 1e-9,
            quadrature: QuadratureOptions {
                rel_tol: 1e-8,
                ..QuadratureOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub sigma_m2: f64,
    pub chi2: f64,
}

/// Outcome of the single-parameter χ² fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaFitResult {
    pub sigma_abs_m2: f64,
    /// Distance from the minimum down to the lower Δχ² = 1 crossing.
    pub stat_err_lo_m2: f64,
    /// Distance from the minimum up to the upper Δχ² = 1 crossing.
    pub stat_err_hi_m2: f64,
    /// False when χ² never rose by 1 before σ = 0; the lower error then runs to 0.
    pub lower_crossing_found: bool,
    /// False when χ² never rose by 1 before `sigma_max`.
    pub upper_crossing_found: bool,
    pub chi2_min: f64,
    pub dof: usize,
    /// Systematic error from recoil power and waist uncertainty, kept separate.
    pub systematic_err_m2: f64,
    /// `n₀` at the configured (maximum) recoil power and `v₀` for the fitted σ.
    pub n0_at_max_power: f64,
    pub fit_trace: Vec<TracePoint>,
}

impl SigmaFitResult {
    /// Standard error on the side facing `truth`, used for pull studies.
    pub fn pull(&self, truth: f64) -> f64 {
        let diff = self.sigma_abs_m2 - truth;
        let err = if diff > 0.0 { self.stat_err_lo_m2 } else { self.stat_err_hi_m2 };
        diff / err
    }
}

pub fn fit_sigma(curve: &ReductionCurve) -> Result<SigmaFitResult> {
    fit_sigma_with(curve, &FitOptions::default())
}

/// Fits `σ_abs` as the only free parameter by minimizing χ² over `[0, sigma_max]`.
///
/// A coarse scan (σ = 0 plus log-spaced values up to `sigma_max`) brackets the
/// global minimum, Brent's method refines it, and bisection locates the
/// `χ²_min + 1` crossings on each side.
pub fn fit_sigma_with(curve: &ReductionCurve, opts: &FitOptions) -> Result<SigmaFitResult> {
    if !(opts.sigma_max > 0.0 && opts.sigma_max.is_finite()) {
        return Err(Error::domain("sigma_max must be positive"));
    }
    if opts.prescan_points < 4 {
        return Err(Error::domain("at least 4 prescan points are required"));
    }
    let mut trace = Vec::new();
    let mut chi2 = |s: f64| -> Result<f64> {
        let c = chi_square_with(curve, s, &opts.quadrature)?;
        trace.push(TracePoint { sigma_m2: s, chi2: c });
        Ok(c)
    };

    let n = opts.prescan_points;
    let decades = 6.0;
    let mut grid = Vec::with_capacity(n);
    grid.push(0.0);
    for i in 0..n - 1 {
        let t = i as f64 / (n - 2) as f64;
        grid.push(opts.sigma_max * 10f64.powf(decades * (t - 1.0)));
    }
    let values = grid.iter().map(|&s| chi2(s)).collect::<Result<Vec<_>>>()?;
    let imin = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    if imin == n - 1 {
        return Err(Error::NoBracket {
            sigma_max: opts.sigma_max,
        });
    }
    let lo = if imin == 0 { 0.0 } else { grid[imin - 1] };
    let hi = grid[imin + 1];
    let atol = opts.sigma_max * 1e-16;
    let (mut sigma, mut chi2_min) = brent_minimize(&mut chi2, lo, hi, opts.sigma_rtol, atol, 500)?;
    if values[imin] < chi2_min {
        (sigma, chi2_min) = (grid[imin], values[imin]);
    }
    let target = chi2_min + 1.0;
    let xtol = (sigma * 1e-9).max(atol);

    let (err_lo, lower_found) = {
        let c0 = if sigma == 0.0 { chi2_min } else { chi2(0.0)? };
        if c0 < target {
            (sigma, false)
        } else {
            let root = bisect_root(|s| Ok(chi2(s)? - target), 0.0, sigma, xtol)?;
            (sigma - root, true)
        }
    };
    let (err_hi, upper_found) = {
        let step0 = if err_lo > 0.0 && lower_found { err_lo } else { sigma.max(opts.sigma_max * 1e-6) };
        let mut upper = (sigma + step0).min(opts.sigma_max);
        let mut found = false;
        loop {
            if chi2(upper)? >= target {
                found = true;
                break;
            }
            if upper >= opts.sigma_max {
                break;
            }
            upper = (sigma + 2.0 * (upper - sigma)).min(opts.sigma_max);
        }
        if found {
            let root = bisect_root(|s| Ok(chi2(s)? - target), sigma, upper, xtol)?;
            (root - sigma, true)
        } else {
            (opts.sigma_max - sigma, false)
        }
    };

    let config = curve.config();
    let n0 = mean_photon_number(&config.recoil_laser, sigma, config.velocity.mean_velocity())?;
    let systematic = systematic_error(sigma, config)?;
    trace.sort_by(|a, b| a.sigma_m2.total_cmp(&b.sigma_m2));

    Ok(SigmaFitResult {
        sigma_abs_m2: sigma,
        stat_err_lo_m2: err_lo,
        stat_err_hi_m2: err_hi,
        lower_crossing_found: lower_found,
        upper_crossing_found: upper_found,
        chi2_min,
        dof: curve.points().len().saturating_sub(1),
        systematic_err_m2: systematic,
        n0_at_max_power: n0,
        fit_trace: trace,
    })
}
