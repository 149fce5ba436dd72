//! Physical constants and unit conversions.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Angular frequency (rad/s) of light with vacuum wavelength `lambda` (m).
pub fn angular_frequency(lambda: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / lambda
}

/// Vacuum wavelength (m) for angular frequency `omega` (rad/s).
pub fn wavelength(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega
}

/// Ordinary-frequency width (Hz) of a wavelength interval `delta_lambda`
/// centered on `lambda`, `Δν = c Δλ / λ²`.
pub fn wavelength_width_to_hz(delta_lambda: f64, lambda: f64) -> f64 {
    SPEED_OF_LIGHT * delta_lambda / (lambda * lambda)
}

/// rad/s to THz (ordinary frequency).
pub fn rad_per_s_to_thz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e12)
}

/// THz (ordinary frequency) to rad/s.
pub fn thz_to_rad_per_s(thz: f64) -> f64 {
    thz * 2.0 * PI * 1e12
}
