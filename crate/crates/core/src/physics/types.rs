use crate::constants::ATOMIC_MASS_UNIT;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Width of the retained Gaussian velocity window on each side of `v₀`, in units of `σ_v`.
pub const GAUSSIAN_TRUNCATION_SIGMAS: f64 = 8.0;

fn require<T: Scalar>(ok: bool, what: &str, value: T) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} (got {value})")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeSpec<T> {
    pub name: String,
    /// Mass in kg.
    pub mass: T,
}

impl<T: Scalar> MoleculeSpec<T> {
    pub fn new(name: impl Into<String>, mass: T) -> Result<Self> {
        let m = Self {
            name: name.into(),
            mass,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_amu(name: impl Into<String>, mass_amu: T) -> Result<Self> {
        Self::new(name, mass_amu * T::lit(ATOMIC_MASS_UNIT))
    }

    pub fn mass_amu(&self) -> T {
        self.mass / T::lit(ATOMIC_MASS_UNIT)
    }

    pub fn validate(&self) -> Result<()> {
        require(
            self.mass.is_finite() && self.mass > T::zero(),
            "molecular mass must be positive",
            self.mass,
        )
    }
}

/// The recoil (probe) laser. Lengths in m, power in W.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoilLaserSpec<T> {
    pub wavelength: T,
    pub power: T,
    /// 1/e² intensity radius across the molecular beam.
    pub waist_y: T,
    /// 1/e² intensity radius along the flight direction. Cancels in `n₀`.
    pub waist_x: T,
    /// Distance from the first grating along the beam.
    pub distance: T,
    /// Vertical displacement of the laser axis from the molecular beam.
    pub offset_y: T,
    /// One-sigma uncertainty of `power`, used for the systematic budget.
    pub power_err: T,
    /// One-sigma uncertainty of `waist_y`.
    pub waist_err: T,
}

impl<T: Scalar> RecoilLaserSpec<T> {
    /// Checks everything except the distance, which needs the grating separation.
    pub fn validate(&self) -> Result<()> {
        let nonneg = |x: T| x.is_finite() && x >= T::zero();
        let pos = |x: T| x.is_finite() && x > T::zero();
        require(nonneg(self.wavelength), "recoil wavelength must be >= 0", self.wavelength)?;
        require(nonneg(self.power), "recoil power must be >= 0", self.power)?;
        require(pos(self.waist_y), "waist_y must be positive", self.waist_y)?;
        require(pos(self.waist_x), "waist_x must be positive", self.waist_x)?;
        require(nonneg(self.distance), "distance D must be >= 0", self.distance)?;
        require(self.offset_y.is_finite(), "offset_y must be finite", self.offset_y)?;
        require(nonneg(self.power_err), "power uncertainty must be >= 0", self.power_err)?;
        require(nonneg(self.waist_err), "waist uncertainty must be >= 0", self.waist_err)
    }

    pub fn with_distance(&self, distance: T) -> Self {
        Self {
            distance,
            ..self.clone()
        }
    }

    pub fn with_power(&self, power: T) -> Self {
        Self {
            power,
            ..self.clone()
        }
    }

    pub fn with_offset(&self, offset_y: T) -> Self {
        Self {
            offset_y,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerSpec<T> {
    pub grating_period: T,
    pub grating_separation: T,
    /// Standing-light-wave grating wavelength; recorded, not used by the model.
    pub grating_laser_wavelength: T,
    /// Standing-light-wave grating power; recorded, not used by the model.
    pub grating_laser_power: T,
}

impl<T: Scalar> InterferometerSpec<T> {
    pub fn validate(&self) -> Result<()> {
        require(
            self.grating_period.is_finite() && self.grating_period > T::zero(),
            "grating period must be positive",
            self.grating_period,
        )?;
        require(
            self.grating_separation.is_finite() && self.grating_separation > T::zero(),
            "grating separation must be positive",
            self.grating_separation,
        )?;
        require(
            self.grating_laser_wavelength >= T::zero(),
            "grating laser wavelength must be >= 0",
            self.grating_laser_wavelength,
        )?;
        require(
            self.grating_laser_power >= T::zero(),
            "grating laser power must be >= 0",
            self.grating_laser_power,
        )
    }
}

/// Longitudinal velocity distribution of the molecular beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityModel<T> {
    /// Normal density with mean `v0` and standard deviation `sigma_v`, truncated to
    /// `v > 0` (and to `v0 ± 8 sigma_v`) and renormalized.
    Gaussian { v0: T, sigma_v: T },
    Monochromatic { v0: T },
}

impl<T: Scalar> VelocityModel<T> {
    pub fn mean_velocity(&self) -> T {
        match *self {
            VelocityModel::Gaussian { v0, .. } | VelocityModel::Monochromatic { v0 } => v0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v0 = self.mean_velocity();
        require(v0.is_finite() && v0 > T::zero(), "v0 must be positive", v0)?;
        if let VelocityModel::Gaussian { sigma_v, .. } = *self {
            require(
                sigma_v.is_finite() && sigma_v > T::zero(),
                "sigma_v must be positive",
                sigma_v,
            )?;
        }
        Ok(())
    }

    /// Support used for averaging; degenerate (`lo == hi`) for a monochromatic beam.
    pub fn support(&self) -> (T, T) {
        match *self {
            VelocityModel::Gaussian { v0, sigma_v } => {
                let k = T::lit(GAUSSIAN_TRUNCATION_SIGMAS);
                ((v0 - k * sigma_v).max(T::zero()), v0 + k * sigma_v)
            }
            VelocityModel::Monochromatic { v0 } => (v0, v0),
        }
    }

    /// Untruncated normal density at `v`; zero for the monochromatic variant.
    pub fn gaussian_density(&self, v: T) -> T {
        match *self {
            VelocityModel::Gaussian { v0, sigma_v } => {
                let z = (v - v0) / sigma_v;
                (-(z * z) / T::lit(2.0)).exp() / (sigma_v * (T::lit(2.0) * T::PI()).sqrt())
            }
            VelocityModel::Monochromatic { .. } => T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<T> {
    pub molecule: MoleculeSpec<T>,
    pub recoil_laser: RecoilLaserSpec<T>,
    pub interferometer: InterferometerSpec<T>,
    pub velocity: VelocityModel<T>,
    /// Unperturbed fringe visibility `V = A / μ`.
    pub baseline_visibility: T,
    /// Unperturbed mean count rate `μ` in counts/s.
    pub baseline_mean_rate: T,
}

impl<T: Scalar> ExperimentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.molecule.validate()?;
        self.recoil_laser.validate()?;
        self.interferometer.validate()?;
        self.velocity.validate()?;
        require(
            self.recoil_laser.distance < self.interferometer.grating_separation,
            "distance D must be smaller than the grating separation L",
            self.recoil_laser.distance,
        )?;
        require(
            self.baseline_visibility > T::zero() && self.baseline_visibility <= T::one(),
            "baseline visibility must lie in (0, 1]",
            self.baseline_visibility,
        )?;
        require(
            self.baseline_mean_rate.is_finite() && self.baseline_mean_rate > T::zero(),
            "baseline mean rate must be positive",
            self.baseline_mean_rate,
        )
    }

    /// Copy with the recoil laser moved to distance `d`.
    pub fn at_distance(&self, distance: T) -> Self {
        Self {
            recoil_laser: self.recoil_laser.with_distance(distance),
            ..self.clone()
        }
    }

    pub fn with_velocity(&self, velocity: VelocityModel<T>) -> Self {
        Self {
            velocity,
            ..self.clone()
        }
    }

    /// Reference setup: C70 at 532.2 nm, 17.4(2) W, 1.23(2) mm waists, D = 3.5 cm,
    /// d = 266 nm, L = 10.5 cm, Gaussian beam with v0 = 210.3 m/s and σ_v = 38.4 m/s.
    pub fn c70_reference() -> Self {
        let l = T::lit;
        Self {
            molecule: MoleculeSpec {
                name: "C70".to_string(),
                mass: l(840.0 * ATOMIC_MASS_UNIT),
            },
            recoil_laser: RecoilLaserSpec {
                wavelength: l(532.2e-9),
                power: l(17.4),
                waist_y: l(1.23e-3),
                waist_x: l(1.23e-3),
                distance: l(0.035),
                offset_y: l(0.0),
                power_err: l(0.2),
                waist_err: l(0.02e-3),
            },
            interferometer: InterferometerSpec {
                grating_period: l(266e-9),
                grating_separation: l(0.105),
                grating_laser_wavelength: l(532e-9),
                grating_laser_power: l(6.5),
            },
            velocity: VelocityModel::Gaussian {
                v0: l(210.3),
                sigma_v: l(38.4),
            },
            baseline_visibility: l(0.15),
            baseline_mean_rate: l(300.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_config_is_valid() {
        ExperimentConfig::<f64>::c70_reference().validate().unwrap();
        ExperimentConfig::<f32>::c70_reference().validate().unwrap();
    }

    #[test]
    fn invariant_violations_are_rejected() {
        let base = ExperimentConfig::<f64>::c70_reference();

        let mut c = base.clone();
        c.recoil_laser.waist_y = 0.0;
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.recoil_laser.distance = c.interferometer.grating_separation;
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.baseline_visibility = 1.2;
        assert!(c.validate().is_err());

        let c = base.with_velocity(VelocityModel::Gaussian { v0: 200.0, sigma_v: 0.0 });
        assert!(c.validate().is_err());

        assert!(MoleculeSpec::from_amu("x", -1.0f64).is_err());
    }

    #[test]
    fn gaussian_support_is_clipped_at_zero() {
        let v = VelocityModel::Gaussian { v0: 210.3f64, sigma_v: 38.4 };
        let (lo, hi) = v.support();
        assert_eq!(lo, 0.0);
        assert!((hi - (210.3 + 8.0 * 38.4)).abs() < 1e-12);

        let narrow = VelocityModel::Gaussian { v0: 200.0f64, sigma_v: 5.0 };
        assert_eq!(narrow.support(), (160.0, 240.0));
    }
}
