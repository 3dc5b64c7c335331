use serde::{Deserialize, Serialize};

use super::ratio::RatioPoint;
use crate::error::{Error, Result};

/// Weighted straight-line fit of `-ln(V'/V)` against recoil power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLinearityFit {
    pub slope_per_w: f64,
    pub slope_err_per_w: f64,
    pub intercept: f64,
    pub intercept_err: f64,
    pub chi2: f64,
    pub dof: usize,
    /// `slope · max(P)`: the largest `-ln(V'/V)` implied by the fit.
    pub max_minus_log: f64,
    pub points_used: usize,
    /// Points dropped because their ratio was not positive.
    pub rejected_points: usize,
}

pub fn fit_power_linearity(points: &[RatioPoint]) -> Result<PowerLinearityFit> {
    if points.len() < 3 {
        return Err(Error::domain(format!(
            "power linearity fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let mut rejected = 0;
    let mut data = Vec::with_capacity(points.len());
    for p in points {
        if !(p.abscissa.is_finite() && p.abscissa >= 0.0) {
            return Err(Error::domain(format!("power must be >= 0 (got {})", p.abscissa)));
        }
        if !(p.ratio_err.is_finite() && p.ratio_err > 0.0) {
            return Err(Error::domain(format!("ratio error must be positive (got {})", p.ratio_err)));
        }
        if !(p.ratio > 0.0 && p.ratio.is_finite()) {
            rejected += 1;
            continue;
        }
        data.push((p.abscissa, -p.ratio.ln(), p.ratio_err / p.ratio));
    }
    if data.len() < 3 {
        return Err(Error::domain(format!(
            "only {} points with positive ratio remain",
            data.len()
        )));
    }

    let (mut s, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for &(x, y, e) in &data {
        let w = 1.0 / (e * e);
        s += w;
        sx += w * x;
        sy += w * y;
    }
    let (xm, ym) = (sx / s, sy / s);
    let (mut stt, mut sty) = (0.0, 0.0);
    for &(x, y, e) in &data {
        let w = 1.0 / (e * e);
        stt += w * (x - xm) * (x - xm);
        sty += w * (x - xm) * (y - ym);
    }
    if stt <= 0.0 {
        return Err(Error::DegenerateAbscissas("all powers are equal".into()));
    }
    let slope = sty / stt;
    let intercept = ym - slope * xm;
    let chi2 = data
        .iter()
        .map(|&(x, y, e)| ((y - intercept - slope * x) / e).powi(2))
        .sum();
    let p_max = data.iter().map(|d| d.0).fold(f64::NEG_INFINITY, f64::max);

    Ok(PowerLinearityFit {
        slope_per_w: slope,
        slope_err_per_w: (1.0 / stt).sqrt(),
        intercept,
        intercept_err: (1.0 / s + xm * xm / stt).sqrt(),
        chi2,
        dof: data.len() - 2,
        max_minus_log: slope * p_max,
        points_used: data.len(),
        rejected_points: rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, r: f64, e: f64) -> RatioPoint {
        RatioPoint {
            abscissa: x,
            ratio: r,
            ratio_err: e,
        }
    }

    #[test]
    fn unit_ratios_give_zero_line() {
        let pts: Vec<_> = (0..5).map(|i| pt(i as f64 * 4.0, 1.0, 0.02)).collect();
        let fit = fit_power_linearity(&pts).unwrap();
        assert_eq!(fit.slope_per_w, 0.0);
        assert_eq!(fit.intercept, 0.0);
        assert_eq!(fit.dof, 3);
    }

    #[test]
    fn exact_line_is_recovered() {
        let pts: Vec<_> = (0..6)
            .map(|i| {
                let p = i as f64 * 3.0;
                pt(p, (-0.02 * p - 0.01).exp(), 0.01 + 0.001 * i as f64)
            })
            .collect();
        let fit = fit_power_linearity(&pts).unwrap();
        assert!((fit.slope_per_w - 0.02).abs() < 1e-14);
        assert!((fit.intercept - 0.01).abs() < 1e-13);
        assert!((fit.max_minus_log - 0.3).abs() < 1e-13);
    }

    #[test]
    fn non_positive_ratios_are_counted_and_dropped() {
        let pts = vec![
            pt(0.0, 1.0, 0.02),
            pt(5.0, 0.9, 0.02),
            pt(10.0, 0.0, 0.02),
            pt(15.0, 0.75, 0.02),
            pt(17.4, -0.1, 0.02),
        ];
        let fit = fit_power_linearity(&pts).unwrap();
        assert_eq!(fit.rejected_points, 2);
        assert_eq!(fit.points_used, 3);
    }

    #[test]
    fn equal_powers_are_degenerate() {
        let pts = vec![pt(1.0, 0.9, 0.01); 4];
        assert!(fit_power_linearity(&pts).is_err());
    }
}
