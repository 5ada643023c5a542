//! CODATA 2018 physical constants (exact where the SI defines them).

/// Planck constant (J·s).
pub const H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = H / (2.0 * core::f64::consts::PI);
/// Elementary charge (C).
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Bohr radius (m).
pub const A0: f64 = 5.291_772_109_03e-11;
/// Speed of light in vacuum (m/s).
pub const C: f64 = 299_792_458.0;
/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Boltzmann constant (J/K).
pub const KB: f64 = 1.380_649e-23;
/// Atomic mass constant (kg).
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Mass of a caesium-133 atom (kg).
pub const CS133_MASS: f64 = 132.905_451_961 * AMU;
/// Torr in pascal.
pub const TORR: f64 = 101_325.0 / 760.0;

/// Grouped constants for code that prefers a value over free constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub h: f64,
    pub hbar: f64,
    pub e_charge: f64,
    pub a0: f64,
    pub c: f64,
    pub eps0: f64,
    pub kb: f64,
}

/// The only instance; the fields never change.
pub const CODATA: PhysicalConstants =
    PhysicalConstants { h: H, hbar: HBAR, e_charge: E_CHARGE, a0: A0, c: C, eps0: EPS0, kb: KB };
