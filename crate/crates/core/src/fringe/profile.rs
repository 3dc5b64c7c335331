use serde::{Deserialize, Serialize};

use super::ratio::RatioPoint;
use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, Residuals};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaistMode {
    Fixed,
    Free,
}

/// Best fit of `ratio(y) = exp(-n_eff · exp(-2 (y - y₀)² / w²))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetProfileFit {
    pub center_y_m: f64,
    pub center_y_err_m: f64,
    /// Effective on-axis `n₀ (1 - cos φ)`, i.e. `-ln` of the deepest ratio.
    pub depth: f64,
    pub depth_err: f64,
    pub waist_m: f64,
    /// Zero in fixed-waist mode.
    pub waist_err_m: f64,
    pub waist_mode: WaistMode,
    pub chi2: f64,
    pub dof: usize,
}

struct Profile<'a> {
    points: &'a [RatioPoint],
    waist: f64,
}

impl Profile<'_> {
    // returns (model, d/dn, d/dy0, d/dw)
    fn model(&self, n: f64, y0: f64, w: f64, y: f64) -> (f64, f64, f64, f64) {
        let dy = y - y0;
        let g = (-2.0 * dy * dy / (w * w)).exp();
        let r = (-n * g).exp();
        (
            r,
            -g * r,
            -n * r * g * 4.0 * dy / (w * w),
            -n * r * g * 4.0 * dy * dy / (w * w * w),
        )
    }
}

impl Residuals<2> for Profile<'_> {
    fn len(&self) -> usize {
        self.points.len()
    }
    fn eval(&self, p: &[f64; 2], r: &mut [f64], j: &mut [[f64; 2]]) {
        for (i, pt) in self.points.iter().enumerate() {
            let (m, dn, dy, _) = self.model(p[0], p[1], self.waist, pt.abscissa);
            let w = 1.0 / pt.ratio_err;
            r[i] = (m - pt.ratio) * w;
            j[i] = [dn * w, dy * w];
        }
    }
}

impl Residuals<3> for Profile<'_> {
    fn len(&self) -> usize {
        self.points.len()
    }
    fn eval(&self, p: &[f64; 3], r: &mut [f64], j: &mut [[f64; 3]]) {
        for (i, pt) in self.points.iter().enumerate() {
            let (m, dn, dy, dw) = self.model(p[0], p[1], p[2], pt.abscissa);
            let w = 1.0 / pt.ratio_err;
            r[i] = (m - pt.ratio) * w;
            j[i] = [dn * w, dy * w, dw * w];
        }
    }
}

/// Fits the visibility ratio measured while moving the recoil laser vertically
/// across the molecular beam.
///
/// `waist` is the fixed 1/e² radius in [`WaistMode::Fixed`] and the starting
/// value in [`WaistMode::Free`].
pub fn fit_offset_profile(points: &[RatioPoint], waist: f64, mode: WaistMode) -> Result<OffsetProfileFit> {
    if points.len() < 4 {
        return Err(Error::domain(format!(
            "offset profile fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    for p in points {
        p.validate()?;
    }
    if !(waist.is_finite() && waist > 0.0) {
        return Err(Error::domain(format!("waist must be positive (got {waist})")));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.abscissa).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let nfree = match mode {
        WaistMode::Fixed => 2,
        WaistMode::Free => 3,
    };
    if xs.len() < nfree + 1 {
        return Err(Error::DegenerateAbscissas(format!(
            "{} distinct offsets for {nfree} free parameters",
            xs.len()
        )));
    }

    let deepest = points
        .iter()
        .min_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .expect("non-empty");
    let n_init = (-deepest.ratio.ln()).max(0.0);
    let y_init = deepest.abscissa;
    let problem = Profile { points, waist };

    let (params, cov, chi2) = match mode {
        WaistMode::Fixed => {
            let sol = levenberg_marquardt::<2, _>(&problem, [n_init, y_init], [1.0, waist], "offset profile fit")?;
            let cov = sol.covariance.map(|c| [[c[0][0], c[0][1], 0.0], [c[1][0], c[1][1], 0.0], [0.0, 0.0, 0.0]]);
            ([sol.params[0], sol.params[1], waist], cov, sol.chi2)
        }
        WaistMode::Free => {
            let sol = levenberg_marquardt::<3, _>(&problem, [n_init, y_init, waist], [1.0, waist, waist], "offset profile fit")?;
            (sol.params, sol.covariance, sol.chi2)
        }
    };
    // with zero depth the center is unconstrained; report an infinite error there
    let err = |i: usize| cov.map_or(f64::INFINITY, |c| c[i][i].max(0.0).sqrt());

    Ok(OffsetProfileFit {
        center_y_m: params[1],
        center_y_err_m: err(1),
        depth: params[0],
        depth_err: err(0),
        waist_m: params[2].abs(),
        waist_err_m: if mode == WaistMode::Free { err(2) } else { 0.0 },
        waist_mode: mode,
        chi2,
        dof: points.len() - nfree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(n: f64, y0: f64, w: f64, err: f64) -> Vec<RatioPoint> {
        (-12..=12)
            .map(|i| {
                let y = i as f64 * 0.25e-3;
                let r = (-n * (-2.0 * (y - y0).powi(2) / (w * w)).exp()).exp();
                RatioPoint::new(y, r, err).unwrap()
            })
            .collect()
    }

    #[test]
    fn flat_profile_has_zero_depth() {
        let pts = profile(0.0, 0.0, 1.23e-3, 0.02);
        let fit = fit_offset_profile(&pts, 1.23e-3, WaistMode::Fixed).unwrap();
        assert!(fit.depth.abs() < 1e-12);
        assert_eq!(fit.chi2, 0.0);
    }

    #[test]
    fn free_waist_round_trip() {
        let pts = profile(0.5, 0.2e-3, 1.23e-3, 0.02);
        let fit = fit_offset_profile(&pts, 1.0e-3, WaistMode::Free).unwrap();
        assert!(((fit.waist_m - 1.23e-3) / 1.23e-3).abs() < 0.02);
        assert!(((fit.waist_m - 1.23e-3) / 1.23e-3).abs() < 1e-6);
        assert!(((fit.depth - 0.5) / 0.5).abs() < 1e-6);
        assert!((fit.center_y_m - 0.2e-3).abs() < 1e-6 * 1.23e-3);
        assert_eq!(fit.dof, 22);
    }

    #[test]
    fn fixed_waist_round_trip() {
        let pts = profile(0.3, -0.4e-3, 1.23e-3, 0.02);
        let fit = fit_offset_profile(&pts, 1.23e-3, WaistMode::Fixed).unwrap();
        assert!(((fit.depth - 0.3) / 0.3).abs() < 1e-6);
        assert!((fit.center_y_m + 0.4e-3).abs() < 1e-9);
        assert_eq!(fit.waist_m, 1.23e-3);
    }

    #[test]
    fn far_offsets_approach_unity() {
        let pts = profile(0.5, 0.0, 1.23e-3, 0.02);
        assert!(pts.first().unwrap().ratio > 0.999 && pts.last().unwrap().ratio > 0.999);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let p = RatioPoint::new(0.0, 0.9, 0.01).unwrap();
        assert!(fit_offset_profile(&[p; 3], 1e-3, WaistMode::Fixed).is_err());
        assert!(matches!(
            fit_offset_profile(&[p; 5], 1e-3, WaistMode::Fixed),
            Err(Error::DegenerateAbscissas(_))
        ));
    }
}
