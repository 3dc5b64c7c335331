use num_complex::Complex;

use super::types::{ExperimentConfig, InterferometerSpec, MoleculeSpec, RecoilLaserSpec, VelocityModel};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::scalar::Scalar;

fn check<T: Scalar>(ok: bool, msg: &str, value: T) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!("{msg} (got {value})")))
    }
}

/// Relative intensity seen by a molecule displaced by `offset_y` from the axis of
/// a Gaussian beam with 1/e² radius `waist_y`: `exp(-2 y² / w²)`.
pub fn offset_intensity_factor<T: Scalar>(offset_y: T, waist_y: T) -> Result<T> {
    check(waist_y > T::zero() && waist_y.is_finite(), "waist must be positive", waist_y)?;
    check(offset_y.is_finite(), "offset must be finite", offset_y)?;
    let r = offset_y / waist_y;
    Ok((-T::lit(2.0) * r * r).exp())
}

/// Poisson mean `n₀` of photons absorbed while crossing the recoil beam at speed `v`.
pub fn mean_photon_number<T: Scalar>(laser: &RecoilLaserSpec<T>, sigma_abs: T, v: T) -> Result<T> {
    check(sigma_abs >= T::zero() && sigma_abs.is_finite(), "cross section must be >= 0", sigma_abs)?;
    check(v > T::zero() && v.is_finite(), "velocity must be positive", v)?;
    Ok(photon_number_coefficient(laser, sigma_abs)? / v)
}

/// `n₀ · v`, i.e. the velocity-independent part of the mean photon number.
fn photon_number_coefficient<T: Scalar>(laser: &RecoilLaserSpec<T>, sigma_abs: T) -> Result<T> {
    laser.validate()?;
    let k = PhysicalConstants::<T>::codata();
    let prefactor = (T::lit(2.0) / T::PI()).sqrt();
    let geometry = offset_intensity_factor(laser.offset_y, laser.waist_y)?;
    // grouped to stay inside f32 range
    let photons_per_joule = laser.wavelength / (k.planck_h() * k.light_speed_c());
    Ok(prefactor * (sigma_abs / laser.waist_y) * photons_per_joule * laser.power * geometry)
}

/// Lateral displacement at the third grating caused by one photon recoil:
/// `s = h D / (m v λ_k)`.
pub fn recoil_shift<T: Scalar>(molecule: &MoleculeSpec<T>, wavelength: T, distance: T, v: T) -> Result<T> {
    molecule.validate()?;
    check(v > T::zero() && v.is_finite(), "velocity must be positive", v)?;
    check(distance >= T::zero() && distance.is_finite(), "distance must be >= 0", distance)?;
    check(wavelength > T::zero() && wavelength.is_finite(), "wavelength must be positive", wavelength)?;
    let h = PhysicalConstants::<T>::codata().planck_h();
    Ok(h / (molecule.mass * v) * (distance / wavelength))
}

/// Contrast reduction for a single velocity: `exp(-n₀ [1 - cos(2π s / d)])`.
pub fn reduction_monochromatic<T: Scalar>(n0: T, shift: T, period: T) -> Result<T> {
    check(n0 >= T::zero() && n0.is_finite(), "n0 must be >= 0", n0)?;
    check(period > T::zero() && period.is_finite(), "period must be positive", period)?;
    check(shift.is_finite(), "shift must be finite", shift)?;
    Ok(monochromatic_unchecked(n0, T::lit(2.0) * T::PI() * shift / period))
}

#[inline]
fn monochromatic_unchecked<T: Scalar>(n0: T, phase: T) -> T {
    (-n0 * (T::one() - phase.cos())).exp()
}

/// Large-distance limit `exp(-n₀)`, valid only for `D ≫ 2 D_min`.
pub fn reduction_asymptotic<T: Scalar>(n0: T) -> Result<T> {
    check(n0 >= T::zero() && n0.is_finite(), "n0 must be >= 0", n0)?;
    Ok((-n0).exp())
}

/// Distance at which one recoil shifts the pattern by half a period for speed `v0`:
/// `d m v₀ λ_k / (2h)`.
pub fn first_minimum_distance<T: Scalar>(
    interferometer: &InterferometerSpec<T>,
    molecule: &MoleculeSpec<T>,
    wavelength: T,
    v0: T,
) -> Result<T> {
    interferometer.validate()?;
    molecule.validate()?;
    check(wavelength > T::zero(), "wavelength must be positive", wavelength)?;
    check(v0 > T::zero(), "v0 must be positive", v0)?;
    let h = PhysicalConstants::<T>::codata().planck_h();
    Ok(interferometer.grating_period * (molecule.mass * v0 / h) * wavelength / T::lit(2.0))
}

/// Spatial period of `V'/V` in `D` for a monochromatic beam, `2 D_min`.
pub fn revival_period<T: Scalar>(
    interferometer: &InterferometerSpec<T>,
    molecule: &MoleculeSpec<T>,
    wavelength: T,
    v0: T,
) -> Result<T> {
    Ok(T::lit(2.0) * first_minimum_distance(interferometer, molecule, wavelength, v0)?)
}

/// Velocity-averaged reduction factor together with its numerical provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionEstimate<T> {
    /// `|⟨exp(-n₀[1 - e^{2πis/d}])⟩_v|`.
    pub value: T,
    /// The averaged complex fringe factor before taking the modulus.
    pub factor: Complex<T>,
    /// Estimated absolute quadrature error on `value`; zero for closed-form cases.
    pub error: T,
    /// Number of quadrature panels used (0 when no quadrature was needed).
    pub intervals: usize,
}

/// Complex fringe factor averaged over the configured velocity distribution.
pub fn velocity_averaged_fringe_factor<T: Scalar>(
    config: &ExperimentConfig<T>,
    sigma_abs: T,
    opts: &QuadratureOptions<T>,
) -> Result<ReductionEstimate<T>> {
    config.validate()?;
    check(sigma_abs >= T::zero() && sigma_abs.is_finite(), "cross section must be >= 0", sigma_abs)?;

    let laser = &config.recoil_laser;
    let n0_v = photon_number_coefficient(laser, sigma_abs)?;
    if n0_v == T::zero() {
        return Ok(ReductionEstimate {
            value: T::one(),
            factor: Complex::new(T::one(), T::zero()),
            error: T::zero(),
            intervals: 0,
        });
    }
    let two_pi = T::lit(2.0) * T::PI();
    // phase per recoil times v
    let phase_v = two_pi
        * recoil_shift(&config.molecule, laser.wavelength, laser.distance, T::one())?
        / config.interferometer.grating_period;

    match config.velocity {
        VelocityModel::Monochromatic { v0 } => {
            let n0 = n0_v / v0;
            let phase = phase_v / v0;
            let factor = (Complex::new(phase.cos() - T::one(), phase.sin()) * n0).exp();
            Ok(ReductionEstimate {
                value: monochromatic_unchecked(n0, phase),
                factor,
                error: T::zero(),
                intervals: 0,
            })
        }
        model @ VelocityModel::Gaussian { .. } => {
            let (lo, hi) = model.support();
            let integrand = |v: T| {
                let p = model.gaussian_density(v);
                if v <= T::zero() {
                    return [T::zero(), T::zero(), p];
                }
                let n0 = n0_v / v;
                let phase = phase_v / v;
                let amp = p * (-n0 * (T::one() - phase.cos())).exp();
                let arg = n0 * phase.sin();
                [amp * arg.cos(), amp * arg.sin(), p]
            };
            let est = integrate(integrand, lo, hi, opts)?;
            let [re, im, norm] = est.value;
            let factor = Complex::new(re / norm, im / norm);
            let value = factor.norm().min(T::one());
            Ok(ReductionEstimate {
                value,
                factor,
                error: est.error * (T::one() + value) / norm,
                intervals: est.intervals,
            })
        }
    }
}

/// `⟨R⟩_v` at the configured laser distance, using default quadrature tolerances.
pub fn reduction_velocity_averaged<T: Scalar>(config: &ExperimentConfig<T>, sigma_abs: T) -> Result<T> {
    Ok(reduction_velocity_averaged_with(config, sigma_abs, &QuadratureOptions::default())?.value)
}

pub fn reduction_velocity_averaged_with<T: Scalar>(
    config: &ExperimentConfig<T>,
    sigma_abs: T,
    opts: &QuadratureOptions<T>,
) -> Result<ReductionEstimate<T>> {
    velocity_averaged_fringe_factor(config, sigma_abs, opts)
}
