use num_complex::Complex;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::config::{SimulationConfig, CHUNK_SIZE};
use super::rng::{open_unit, poisson, KahanSum, Purpose, StreamId};
use crate::error::{Error, Result};
use crate::physics::{mean_photon_number, recoil_shift};
use crate::VelocityModel;

/// One simulated molecule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSample {
    pub velocity: f64,
    pub absorbed_photons: u64,
    /// Lateral fringe displacement `n · s(v)`, m.
    pub shift: f64,
    /// Height at which the molecule crossed the recoil beam, m.
    pub transverse_offset: f64,
}

/// Ensemble estimate of the visibility reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReduction {
    /// `|⟨exp(2πi shift / d)⟩|`.
    pub ratio: f64,
    pub std_err: f64,
    pub samples: usize,
}

enum Velocity {
    Fixed(f64),
    Truncated { normal: Normal, cdf_lo: f64, cdf_span: f64 },
}

/// Per-configuration constants shared by all draws.
pub(crate) struct Sampler {
    velocity: Velocity,
    /// `n₀ · v` on the beam axis.
    n0_coef: f64,
    /// Single-recoil shift times `v`.
    shift_coef: f64,
    offset_y: f64,
    waist_y: f64,
    beam_height: f64,
    period: f64,
}

impl Sampler {
    pub fn new(config: &SimulationConfig) -> Result<Self> {
        config.validate()?;
        let exp = &config.experiment;
        let laser = &exp.recoil_laser;
        let velocity = match exp.velocity {
            VelocityModel::Monochromatic { v0 } => Velocity::Fixed(v0),
            VelocityModel::Gaussian { v0, sigma_v } => {
                let normal = Normal::new(v0, sigma_v).map_err(|e| Error::Domain(e.to_string()))?;
                let (lo, hi) = exp.velocity.support();
                let cdf_lo = normal.cdf(lo);
                Velocity::Truncated {
                    normal,
                    cdf_lo,
                    cdf_span: normal.cdf(hi) - cdf_lo,
                }
            }
        };
        Ok(Self {
            velocity,
            n0_coef: mean_photon_number(&laser.with_offset(0.0), config.true_sigma, 1.0)?,
            shift_coef: recoil_shift(&exp.molecule, laser.wavelength, laser.distance, 1.0)?,
            offset_y: laser.offset_y,
            waist_y: laser.waist_y,
            beam_height: config.beam_height,
            period: exp.interferometer.grating_period,
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> EnsembleSample {
        let velocity = match self.velocity {
            Velocity::Fixed(v) => v,
            Velocity::Truncated {
                normal,
                cdf_lo,
                cdf_span,
            } => {
                let u = open_unit(rng);
                normal.inverse_cdf(cdf_lo + u * cdf_span).max(f64::MIN_POSITIVE)
            }
        };
        let transverse_offset = if self.beam_height > 0.0 {
            self.offset_y + self.beam_height * (open_unit(rng) - 0.5)
        } else {
            self.offset_y
        };
        let r = transverse_offset / self.waist_y;
        let n0 = self.n0_coef * (-2.0 * r * r).exp() / velocity;
        let absorbed_photons = poisson(rng, n0);
        EnsembleSample {
            velocity,
            absorbed_photons,
            shift: absorbed_photons as f64 * self.shift_coef / velocity,
            transverse_offset,
        }
    }

    /// Draws `n` molecules from the stream family `base`, chunk by chunk.
    pub fn map_chunks<A, F>(&self, seed: u64, base: StreamId, n: usize, f: F) -> Vec<A>
    where
        A: Send,
        F: Fn(&mut dyn FnMut() -> EnsembleSample, usize) -> A + Sync,
    {
        let chunks = n.div_ceil(CHUNK_SIZE);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = base.chunk(c).rng(seed);
                let len = CHUNK_SIZE.min(n - c * CHUNK_SIZE);
                let mut next = || self.draw(&mut rng);
                f(&mut next, len)
            })
            .collect()
    }

    /// Streams `n` molecules into phase-factor moments without storing them.
    pub fn phase_moments(&self, seed: u64, base: StreamId, n: usize) -> PhaseMoments {
        let parts = self.map_chunks(seed, base, n, |next, len| {
            let mut m = PhaseMoments::default();
            for _ in 0..len {
                m.push(phase_of(next().shift, self.period));
            }
            m
        });
        let mut total = PhaseMoments::default();
        for p in &parts {
            total.merge(p);
        }
        total
    }
}

fn phase_of(shift: f64, period: f64) -> Complex<f64> {
    let (s, c) = (2.0 * std::f64::consts::PI * shift / period).sin_cos();
    Complex::new(c, s)
}

/// First and second moments of the unit phase factors `z = e^{2πi shift/d}`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct PhaseMoments {
    n: usize,
    re: KahanSum,
    im: KahanSum,
    re2: KahanSum,
    im2: KahanSum,
    reim: KahanSum,
}

impl PhaseMoments {
    fn push(&mut self, z: Complex<f64>) {
        self.n += 1;
        self.re.add(z.re);
        self.im.add(z.im);
        self.re2.add(z.re * z.re);
        self.im2.add(z.im * z.im);
        self.reim.add(z.re * z.im);
    }

    fn merge(&mut self, other: &Self) {
        self.n += other.n;
        self.re.merge(&other.re);
        self.im.merge(&other.im);
        self.re2.merge(&other.re2);
        self.im2.merge(&other.im2);
        self.reim.merge(&other.reim);
    }

    pub fn mean(&self) -> Complex<f64> {
        let n = self.n as f64;
        Complex::new(self.re.value() / n, self.im.value() / n)
    }

    /// `|mean|` with its linearized (large-sample jackknife) standard error.
    pub fn reduction(&self) -> MonteCarloReduction {
        let n = self.n as f64;
        let z = self.mean();
        let cxx = (self.re2.value() / n - z.re * z.re).max(0.0);
        let cyy = (self.im2.value() / n - z.im * z.im).max(0.0);
        let cxy = self.reim.value() / n - z.re * z.im;
        let r = z.norm();
        let var = if r > 0.0 {
            let (ux, uy) = (z.re / r, z.im / r);
            ux * ux * cxx + uy * uy * cyy + 2.0 * ux * uy * cxy
        } else {
            0.5 * (cxx + cyy)
        };
        let std_err = if self.n > 1 { (var.max(0.0) / (n - 1.0)).sqrt() } else { 0.0 };
        MonteCarloReduction {
            ratio: r.min(1.0),
            std_err,
            samples: self.n,
        }
    }
}

/// Draws `n_molecules` molecules at the configured recoil-laser distance.
pub fn sample_ensemble(config: &SimulationConfig) -> Result<Vec<EnsembleSample>> {
    let sampler = Sampler::new(config)?;
    let base = StreamId::new(Purpose::Ensemble, 0, 0);
    let parts = sampler.map_chunks(config.rng_seed, base, config.n_molecules, |next, len| {
        (0..len).map(|_| next()).collect::<Vec<_>>()
    });
    Ok(parts.concat())
}

/// `|⟨exp(2πi shift / d)⟩|` over `samples` with a leave-one-out jackknife error.
pub fn estimate_reduction(samples: &[EnsembleSample], period_d: f64) -> Result<MonteCarloReduction> {
    if samples.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 samples (got {})",
            samples.len()
        )));
    }
    if !(period_d > 0.0 && period_d.is_finite()) {
        return Err(Error::Domain(format!("period must be positive (got {period_d})")));
    }
    let z: Vec<Complex<f64>> = samples.iter().map(|s| phase_of(s.shift, period_d)).collect();
    let (mut re, mut im) = (KahanSum::default(), KahanSum::default());
    for p in &z {
        re.add(p.re);
        im.add(p.im);
    }
    let total = Complex::new(re.value(), im.value());
    let n = z.len() as f64;
    let ratio = (total.norm() / n).min(1.0);
    let loo: Vec<f64> = z.iter().map(|p| ((total - p) / (n - 1.0)).norm()).collect();
    let mut acc = KahanSum::default();
    loo.iter().for_each(|&x| acc.add(x));
    let mean = acc.value() / n;
    let mut ss = KahanSum::default();
    loo.iter().for_each(|&x| ss.add((x - mean) * (x - mean)));
    Ok(MonteCarloReduction {
        ratio,
        std_err: ((n - 1.0) / n * ss.value()).sqrt(),
        samples: z.len(),
    })
}

/// Streamed equivalent of `estimate_reduction(sample_ensemble(config))` that
/// never materializes the ensemble. Uses the linearized jackknife error.
pub fn ensemble_reduction(config: &SimulationConfig) -> Result<MonteCarloReduction> {
    let sampler = Sampler::new(config)?;
    let base = StreamId::new(Purpose::Ensemble, 0, 0);
    Ok(sampler
        .phase_moments(config.rng_seed, base, config.n_molecules)
        .reduction())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::reduction_velocity_averaged;
    use crate::ExperimentConfig;

    fn sim(sigma: f64, n: usize) -> SimulationConfig {
        let mut c = SimulationConfig::new(ExperimentConfig::c70_reference(), sigma, 11);
        c.n_molecules = n;
        c
    }

    #[test]
    fn zero_cross_section_absorbs_nothing() {
        let s = sample_ensemble(&sim(0.0, 5000)).unwrap();
        assert_eq!(s.len(), 5000);
        assert!(s.iter().all(|x| x.absorbed_photons == 0 && x.shift == 0.0));
        assert!(s.iter().all(|x| x.velocity > 0.0));
    }

    #[test]
    fn monochromatic_velocities_identical() {
        let mut c = sim(1.97e-21, 1000);
        c.experiment = c
            .experiment
            .with_velocity(VelocityModel::Monochromatic { v0: 210.3 });
        let s = sample_ensemble(&c).unwrap();
        assert!(s.iter().all(|x| x.velocity == 210.3));
    }

    #[test]
    fn trivial_shifts() {
        let mk = |shift| EnsembleSample {
            velocity: 200.0,
            absorbed_photons: 1,
            shift,
            transverse_offset: 0.0,
        };
        let d = 266e-9;
        let r = estimate_reduction(&[mk(0.0), mk(0.0), mk(0.0)], d).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert_eq!(r.std_err, 0.0);
        let r = estimate_reduction(&vec![mk(d / 2.0); 4], d).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-15);
        assert!(estimate_reduction(&[mk(0.0)], d).is_err());
    }

    #[test]
    fn chunked_and_materialized_agree() {
        let c = sim(1.97e-21, 3 * CHUNK_SIZE / 2 + 17);
        let s = sample_ensemble(&c).unwrap();
        let a = estimate_reduction(&s, c.experiment.interferometer.grating_period).unwrap();
        let b = ensemble_reduction(&c).unwrap();
        assert!((a.ratio - b.ratio).abs() < 1e-12);
        assert!((a.std_err / b.std_err - 1.0).abs() < 1e-3);
    }

    #[test]
    fn deterministic_for_seed() {
        let c = sim(1.97e-21, 70_000);
        assert_eq!(sample_ensemble(&c).unwrap(), sample_ensemble(&c).unwrap());
        let mut other = c.clone();
        other.rng_seed += 1;
        assert_ne!(sample_ensemble(&c).unwrap(), sample_ensemble(&other).unwrap());
    }

    #[test]
    fn agrees_with_quadrature() {
        let c = sim(1.97e-21, 400_000);
        let mc = ensemble_reduction(&c).unwrap();
        let exact = reduction_velocity_averaged(&c.experiment, c.true_sigma).unwrap();
        assert!((mc.ratio - exact).abs() < 3.0 * mc.std_err, "{mc:?} vs {exact}");
    }

    #[test]
    fn photon_mean_matches_at_fixed_velocity() {
        let mut c = sim(1.97e-21, 1_000_000);
        c.experiment = c
            .experiment
            .with_velocity(VelocityModel::Monochromatic { v0: 210.3 });
        let n0 = mean_photon_number(&c.experiment.recoil_laser, c.true_sigma, 210.3).unwrap();
        let s = sample_ensemble(&c).unwrap();
        let n = s.len() as f64;
        let mean = s.iter().map(|x| x.absorbed_photons as f64).sum::<f64>() / n;
        let var = s.iter().map(|x| (x.absorbed_photons as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - n0).abs() < 4.0 * (n0 / n).sqrt());
        assert!((var - n0).abs() < 4.0 * ((n0 + 2.0 * n0 * n0) / n).sqrt());
    }

    proptest::proptest! {
        #[test]
        fn common_shift_leaves_ratio_unchanged(
            shifts in proptest::collection::vec(0.0f64..1e-6, 2..200),
            offset in -1e-6f64..1e-6,
        ) {
            let d = 266e-9;
            let mk = |shift| EnsembleSample { velocity: 200.0, absorbed_photons: 1, shift, transverse_offset: 0.0 };
            let a: Vec<_> = shifts.iter().map(|&s| mk(s)).collect();
            let b: Vec<_> = shifts.iter().map(|&s| mk(s + offset)).collect();
            let ra = estimate_reduction(&a, d).unwrap();
            let rb = estimate_reduction(&b, d).unwrap();
            proptest::prop_assert!(ra.ratio >= 0.0 && ra.ratio <= 1.0);
            proptest::prop_assert!((ra.ratio - rb.ratio).abs() < 1e-9);
            proptest::prop_assert!((ra.std_err - rb.std_err).abs() < 1e-7);
        }
    }

    #[test]
    fn beam_height_spreads_offsets() {
        let mut c = sim(1.97e-21, 2000);
        c.beam_height = 1e-3;
        let s = sample_ensemble(&c).unwrap();
        assert!(s.iter().all(|x| x.transverse_offset.abs() <= 0.5e-3));
        assert!(s.iter().any(|x| x.transverse_offset.abs() > 0.4e-3));
    }
}
