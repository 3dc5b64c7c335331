//! CODATA constants used by the recoil model.

use crate::scalar::Scalar;

/// Planck constant in J·s (exact since the 2019 SI redefinition).
pub const PLANCK_H: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s (exact).
pub const LIGHT_SPEED_C: f64 = 299_792_458.0;
/// Unified atomic mass unit in kg (CODATA 2018).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Fundamental constants in the scalar type `T`.
///
/// Values are fixed at build time; the fields are only readable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<T> {
    planck_h: T,
    light_speed_c: T,
    atomic_mass_unit: T,
}

impl<T: Scalar> PhysicalConstants<T> {
    pub fn codata() -> Self {
        Self {
            planck_h: T::lit(PLANCK_H),
            light_speed_c: T::lit(LIGHT_SPEED_C),
            atomic_mass_unit: T::lit(ATOMIC_MASS_UNIT),
        }
    }

    #[inline]
    pub fn planck_h(&self) -> T {
        self.planck_h
    }

    #[inline]
    pub fn light_speed_c(&self) -> T {
        self.light_speed_c
    }

    #[inline]
    pub fn atomic_mass_unit(&self) -> T {
        self.atomic_mass_unit
    }
}

impl<T: Scalar> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::codata()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_positive_in_both_precisions() {
        let c64 = PhysicalConstants::<f64>::codata();
        let c32 = PhysicalConstants::<f32>::codata();
        assert!(c64.planck_h() > 0.0 && c64.light_speed_c() > 0.0 && c64.atomic_mass_unit() > 0.0);
        assert!(c32.planck_h() > 0.0 && c32.light_speed_c() > 0.0 && c32.atomic_mass_unit() > 0.0);
    }
}
