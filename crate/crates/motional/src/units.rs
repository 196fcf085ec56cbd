//! Unit conventions and physical constants.
//!
//! Every public interface of this crate uses the same unit system:
//! lengths in micrometres, times in milliseconds, and energies quoted as
//! frequencies E/h in kilohertz. With those choices the Schrodinger phase
//! accumulated by an energy `nu` (kHz) over a time `dt` (ms) is simply
//! `2 pi nu dt`, and kHz, ms and um^-1 form a closed system for the
//! kinetic term.

use std::f64::consts::PI;

/// Planck constant (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant h / 2 pi (J s).
pub const HBAR: f64 = PLANCK / TWO_PI;

/// Mass of a Rb-87 atom (kg).
pub const MASS_RB87: f64 = 1.443_16e-25;

/// Phase advance per unit energy and time: exp(-i * TWO_PI * nu_khz * t_ms).
pub const TWO_PI: f64 = 2.0 * PI;

/// Coefficient of the kinetic energy in grid units.
///
/// For a wavenumber `k` in um^-1 the kinetic energy is
/// `kinetic_coeff(mass) * k^2` in kHz (as E/h). Derived from
/// hbar^2 k^2 / (2 m h) with the length and time scalings folded in.
pub fn kinetic_coeff(mass_kg: f64) -> f64 {
    HBAR / mass_kg * 1e9 / (4.0 * PI)
}

/// Oscillator length sqrt(hbar / (m omega)) in um for a level spacing in kHz.
pub fn oscillator_length_um(mass_kg: f64, nu_khz: f64) -> f64 {
    let omega = TWO_PI * nu_khz * 1e3; // s^-1
    (HBAR / (mass_kg * omega)).sqrt() * 1e6
}

/// Momentum-axis scale factor alpha = m / (hbar t) in um^-2 for an
/// expansion time in ms; positions y in a long-expansion image map onto
/// wavenumbers k = alpha * y.
pub fn tof_alpha_um2(mass_kg: f64, t_tof_ms: f64) -> f64 {
    mass_kg / (HBAR * t_tof_ms * 1e-3) * 1e-12
}
