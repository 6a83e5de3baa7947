//! CODATA 2018 exact / recommended values, SI units.

/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity [F/m].
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Planck constant [J s].
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant [J s].
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Molar gas constant [J/(mol K)].
pub const GAS_CONSTANT: f64 = 8.314_462_618;
/// 1 cm⁻¹ expressed in Hz.
pub const HZ_PER_WAVENUMBER: f64 = 100.0 * SPEED_OF_LIGHT;

/// Frequency [Hz] to wavenumber [cm⁻¹].
#[inline]
pub fn hz_to_wavenumber(nu: f64) -> f64 {
    nu / HZ_PER_WAVENUMBER
}

/// Wavenumber [cm⁻¹] to frequency [Hz].
#[inline]
pub fn wavenumber_to_hz(k: f64) -> f64 {
    k * HZ_PER_WAVENUMBER
}
