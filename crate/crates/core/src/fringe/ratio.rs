use serde::{Deserialize, Serialize};

use super::scan::VisibilityResult;
use crate::error::{Error, Result};

/// One visibility ratio `V'/V` at an abscissa whose meaning depends on the scan:
/// laser offset (m), laser distance (m) or laser power (W).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub abscissa: f64,
    pub ratio: f64,
    pub ratio_err: f64,
}

impl RatioPoint {
    pub fn new(abscissa: f64, ratio: f64, ratio_err: f64) -> Result<Self> {
        let p = Self {
            abscissa,
            ratio,
            ratio_err,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.abscissa.is_finite() {
            return Err(Error::domain(format!("abscissa must be finite (got {})", self.abscissa)));
        }
        if !(self.ratio.is_finite() && self.ratio > 0.0) {
            return Err(Error::domain(format!("ratio must be positive (got {})", self.ratio)));
        }
        if !(self.ratio_err.is_finite() && self.ratio_err > 0.0) {
            return Err(Error::domain(format!(
                "ratio error must be positive (got {})",
                self.ratio_err
            )));
        }
        Ok(())
    }
}

/// `V'/V` with independent errors added in quadrature.
pub fn visibility_ratio(
    perturbed: &VisibilityResult,
    reference: &VisibilityResult,
    abscissa: f64,
) -> Result<RatioPoint> {
    let v = reference.visibility;
    if !(v > 0.0) {
        return Err(Error::domain(format!("reference visibility must be positive (got {v})")));
    }
    let ratio = perturbed.visibility / v;
    let err = (perturbed.visibility_err / v).hypot(ratio * reference.visibility_err / v);
    RatioPoint::new(abscissa, ratio, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vis(v: f64, err: f64) -> VisibilityResult {
        VisibilityResult {
            mean_rate_per_s: 300.0,
            amplitude_per_s: 300.0 * v,
            phase_rad: 0.0,
            visibility: v,
            visibility_err: err,
            period_m: 266e-9,
            period_err_m: 0.0,
            chi2: 0.0,
            dof: 10,
        }
    }

    #[test]
    fn identical_results_give_unity() {
        let x = vis(0.15, 0.01);
        let r = visibility_ratio(&x, &x, 0.035).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert_eq!(r.abscissa, 0.035);
    }

    #[test]
    fn quadrature_error_rule() {
        let r = visibility_ratio(&vis(0.078, 0.008), &vis(0.10, 0.005), 0.0485).unwrap();
        assert!((r.ratio - 0.78).abs() < 1e-12);
        // relative errors 0.008/0.078 and 0.005/0.10
        let expected = 0.78 * ((0.008f64 / 0.078).powi(2) + 0.05f64.powi(2)).sqrt();
        assert!((r.ratio_err - expected).abs() < 1e-12);
        assert!((r.ratio_err - 0.0890).abs() < 5e-4);
    }

    #[test]
    fn zero_reference_is_rejected() {
        assert!(visibility_ratio(&vis(0.1, 0.01), &vis(0.0, 0.01), 0.0).is_err());
    }
}
