use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsq::{levenberg_marquardt, Residuals};

pub const MIN_SCAN_POINTS: usize = 8;

/// Counts recorded while translating the third grating laterally.
///
/// `counts` are detected molecules per dwell. Measured scans hold integers;
/// synthetic noiseless scans may carry the expected (non-integer) counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    positions: Vec<f64>,
    counts: Vec<f64>,
    dwell_time: f64,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl FringeScan {
    pub fn new(positions: Vec<f64>, counts: Vec<f64>, dwell_time: f64) -> Result<Self> {
        if positions.len() != counts.len() {
            return Err(Error::domain(format!(
                "scan has {} positions but {} counts",
                positions.len(),
                counts.len()
            )));
        }
        if positions.len() < MIN_SCAN_POINTS {
            return Err(Error::domain(format!(
                "scan needs at least {MIN_SCAN_POINTS} points, got {}",
                positions.len()
            )));
        }
        if !(dwell_time.is_finite() && dwell_time > 0.0) {
            return Err(Error::domain(format!("dwell time must be positive (got {dwell_time})")));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("scan positions must be finite"));
        }
        let increasing = positions.windows(2).all(|w| w[1] > w[0]);
        let decreasing = positions.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::domain("scan positions must be strictly monotonic"));
        }
        if let Some(c) = counts.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::domain(format!("counts must be non-negative (got {c})")));
        }
        Ok(Self {
            positions,
            counts,
            dwell_time,
            metadata: BTreeMap::new(),
        })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn dwell_time(&self) -> f64 {
        self.dwell_time
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodMode {
    /// Period fixed at the grating constant.
    Fixed,
    /// Period floated as a fourth parameter (diagnostic).
    Free,
}

/// Fit of `rate(x) = μ + A cos(2π x / d + φ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityResult {
    pub mean_rate_per_s: f64,
    pub amplitude_per_s: f64,
    pub phase_rad: f64,
    pub visibility: f64,
    pub visibility_err: f64,
    pub period_m: f64,
    /// Zero when the period was held fixed.
    pub period_err_m: f64,
    pub chi2: f64,
    pub dof: usize,
}

/// Harmonic model in centered coordinates: `μ + a cos(k u) + b sin(k u)`.
struct Harmonic<'a> {
    u: &'a [f64],
    rate: &'a [f64],
    sigma: &'a [f64],
    k_fixed: Option<f64>,
}

impl Harmonic<'_> {
    fn model(&self, mu: f64, a: f64, b: f64, k: f64, u: f64) -> (f64, f64, f64) {
        let (s, c) = (k * u).sin_cos();
        (mu + a * c + b * s, c, s)
    }
}

impl Residuals<3> for Harmonic<'_> {
    fn len(&self) -> usize {
        self.u.len()
    }
    fn eval(&self, p: &[f64; 3], r: &mut [f64], j: &mut [[f64; 3]]) {
        let k = self.k_fixed.expect("fixed-period model");
        for i in 0..self.u.len() {
            let (m, c, s) = self.model(p[0], p[1], p[2], k, self.u[i]);
            let w = 1.0 / self.sigma[i];
            r[i] = (m - self.rate[i]) * w;
            j[i] = [w, c * w, s * w];
        }
    }
}

impl Residuals<4> for Harmonic<'_> {
    fn len(&self) -> usize {
        self.u.len()
    }
    fn eval(&self, p: &[f64; 4], r: &mut [f64], j: &mut [[f64; 4]]) {
        for i in 0..self.u.len() {
            let u = self.u[i];
            let (m, c, s) = self.model(p[0], p[1], p[2], p[3], u);
            let w = 1.0 / self.sigma[i];
            r[i] = (m - self.rate[i]) * w;
            j[i] = [w, c * w, s * w, u * (-p[1] * s + p[2] * c) * w];
        }
    }
}

/// Extracts the fringe visibility `A / μ` from a G3 scan.
///
/// Weighted least squares with Poisson standard deviations
/// `sqrt(max(count, 1)) / dwell`. The fit starts from the discrete Fourier
/// component at the grating period. Positions are centered internally; the
/// reported phase refers to the original positions.
pub fn extract_visibility(scan: &FringeScan, period: f64, mode: PeriodMode) -> Result<VisibilityResult> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::domain(format!("fringe period must be positive (got {period})")));
    }
    let n = scan.len();
    let x = scan.positions();
    let (x_min, x_max) = if x[0] < x[n - 1] { (x[0], x[n - 1]) } else { (x[n - 1], x[0]) };
    // N evenly spaced samples cover (N-1)/N of their nominal range
    let coverage = (x_max - x_min) * n as f64 / (n - 1) as f64;
    if coverage < period * (1.0 - 1e-9) {
        return Err(Error::InsufficientSpan {
            periods: coverage / period,
        });
    }

    let dwell = scan.dwell_time();
    let center = 0.5 * (x_min + x_max);
    let u: Vec<f64> = x.iter().map(|xi| xi - center).collect();
    let rate: Vec<f64> = scan.counts().iter().map(|c| c / dwell).collect();
    let sigma: Vec<f64> = scan.counts().iter().map(|c| c.max(1.0).sqrt() / dwell).collect();

    let k = 2.0 * PI / period;
    let w_sum: f64 = sigma.iter().map(|s| s.powi(-2)).sum();
    let mu0 = rate.iter().zip(&sigma).map(|(r, s)| r / (s * s)).sum::<f64>() / w_sum;
    let (mut a0, mut b0) = (0.0, 0.0);
    for (ui, ri) in u.iter().zip(&rate) {
        let (s, c) = (k * ui).sin_cos();
        a0 += (ri - mu0) * c;
        b0 += (ri - mu0) * s;
    }
    a0 *= 2.0 / n as f64;
    b0 *= 2.0 / n as f64;

    let fixed = Harmonic {
        u: &u,
        rate: &rate,
        sigma: &sigma,
        k_fixed: Some(k),
    };
    let typical = mu0.abs().max(1e-300);
    let sol3 = levenberg_marquardt::<3, _>(&fixed, [mu0, a0, b0], [typical; 3], "fringe fit")?;

    let (mu, a, b, k_fit, cov, chi2, nparams) = match mode {
        PeriodMode::Fixed => {
            let [mu, a, b] = sol3.params;
            let cov = sol3.covariance.map(|c| {
                let mut c4 = [[0.0; 4]; 4];
                for i in 0..3 {
                    for j in 0..3 {
                        c4[i][j] = c[i][j];
                    }
                }
                c4
            });
            (mu, a, b, k, cov, sol3.chi2, 3)
        }
        PeriodMode::Free => {
            let free = Harmonic { k_fixed: None, ..fixed };
            let [mu, a, b] = sol3.params;
            let sol4 = levenberg_marquardt::<4, _>(&free, [mu, a, b, k], [typical, typical, typical, k], "free-period fringe fit")?;
            let [mu, a, b, kf] = sol4.params;
            (mu, a, b, kf, sol4.covariance, sol4.chi2, 4)
        }
    };
    let cov = cov.ok_or_else(|| Error::domain("fringe fit covariance is singular"))?;

    if !(mu > 0.0) {
        return Err(Error::domain(format!("fitted mean rate is not positive ({mu})")));
    }
    let amp = a.hypot(b);
    let visibility = amp / mu;
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::VisibilityOutOfRange { visibility });
    }

    let var_v = if amp > 0.0 {
        let grad = [-amp / (mu * mu), a / (amp * mu), b / (amp * mu)];
        let mut v = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                v += grad[i] * cov[i][j] * grad[j];
            }
        }
        v
    } else {
        // direction is undefined at zero amplitude; use the mean quadrature variance
        0.5 * (cov[1][1] + cov[2][2]) / (mu * mu)
    };

    let phase = (-b).atan2(a) - k_fit * center;
    let phase = (phase + PI).rem_euclid(2.0 * PI) - PI;
    let period_fit = 2.0 * PI / k_fit;
    let period_err = match mode {
        PeriodMode::Fixed => 0.0,
        PeriodMode::Free => period_fit * cov[3][3].max(0.0).sqrt() / k_fit,
    };

    Ok(VisibilityResult {
        mean_rate_per_s: mu,
        amplitude_per_s: amp,
        phase_rad: phase,
        visibility,
        visibility_err: var_v.max(0.0).sqrt(),
        period_m: period_fit,
        period_err_m: period_err,
        chi2,
        dof: n.saturating_sub(nparams),
    })
}
