use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::ratio::RatioPoint;
use crate::error::{Error, Result};

pub const CONFIDENCE_LEVEL: f64 = 0.95;

/// Inverse-variance weighted mean of a set of ratios and a χ² test of constancy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstancyResult {
    pub weighted_mean: f64,
    pub mean_err: f64,
    pub chi2: f64,
    pub dof: usize,
    /// 95th percentile of χ² with `dof` degrees of freedom.
    pub chi2_critical: f64,
    pub consistent: bool,
}

pub fn constancy_check(points: &[RatioPoint]) -> Result<ConstancyResult> {
    if points.len() < 2 {
        return Err(Error::domain(format!(
            "constancy check needs at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.ratio_err.is_finite() && p.ratio_err > 0.0)) {
        return Err(Error::domain(format!("ratio error must be positive (got {})", p.ratio_err)));
    }
    let (mut sw, mut swx) = (0.0, 0.0);
    for p in points {
        let w = p.ratio_err.powi(-2);
        sw += w;
        swx += w * p.ratio;
    }
    let mean = swx / sw;
    let chi2 = points
        .iter()
        .map(|p| ((p.ratio - mean) / p.ratio_err).powi(2))
        .sum::<f64>();
    let dof = points.len() - 1;
    let critical = ChiSquared::new(dof as f64)
        .map_err(|e| Error::domain(e.to_string()))?
        .inverse_cdf(CONFIDENCE_LEVEL);

    Ok(ConstancyResult {
        weighted_mean: mean,
        mean_err: sw.sqrt().recip(),
        chi2,
        dof,
        chi2_critical: critical,
        consistent: chi2 <= critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(r: f64, e: f64) -> RatioPoint {
        RatioPoint {
            abscissa: 0.0,
            ratio: r,
            ratio_err: e,
        }
    }

    #[test]
    fn identical_points() {
        let res = constancy_check(&[pt(0.8, 0.05), pt(0.8, 0.05)]).unwrap();
        assert!(res.chi2 < 1e-25);
        assert!(res.consistent);
        assert_eq!(res.dof, 1);
    }

    #[test]
    fn hand_computed_mean() {
        let res = constancy_check(&[pt(0.70, 0.08), pt(0.80, 0.08), pt(0.84, 0.08)]).unwrap();
        assert!((res.weighted_mean - 0.78).abs() < 1e-12);
        assert!((res.mean_err - 0.08 / 3f64.sqrt()).abs() < 1e-12);
        assert!((res.chi2 - 1.625).abs() < 1e-10);
        assert!((res.chi2_critical - 5.991_464_547_107_979).abs() < 1e-6);
        assert!(res.consistent);
    }

    #[test]
    fn discrepant_points_fail() {
        let res = constancy_check(&[pt(0.5, 0.01), pt(0.9, 0.01)]).unwrap();
        assert!(!res.consistent);
    }

    #[test]
    fn needs_two_points() {
        assert!(constancy_check(&[pt(0.5, 0.01)]).is_err());
    }
}
