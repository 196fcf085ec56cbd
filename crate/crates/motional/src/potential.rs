//! Polynomial trap potentials and their rigid displacement.

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::units;

/// Even polynomial trap V(y) = a2 y^2 + a4 y^4 + a6 y^6, coefficients in
/// kHz (as E/h) per um^2, um^4, um^6. `r0` is the reference oscillator
/// length (um) the coefficients were fitted with; it is metadata only.
///
/// A rigid displacement `lambda` evaluates V(y - lambda).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub alpha2: f64,
    pub alpha4: f64,
    pub alpha6: f64,
    pub r0: f64,
}

impl PotentialSpec {
    pub fn new(alpha2: f64, alpha4: f64, alpha6: f64, r0: f64) -> Self {
        Self {
            alpha2,
            alpha4,
            alpha6,
            r0,
        }
    }

    /// Default transverse trap along y: sextic fit of the dressed trap,
    /// a2 = 1.331/(2 r0^2), a4 = 0.0627/r0^4, a6 = -0.00063/r0^6 kHz
    /// with r0 = 0.252 um. The negative sextic term makes this trap turn
    /// over at |y| = 2.13 um; see [`PotentialSpec::confining_radius`].
    pub fn sextic_y() -> Self {
        let r0 = 0.252;
        Self::new(
            1.331 / (2.0 * r0 * r0),
            0.0627 / r0.powi(4),
            -0.00063 / r0.powi(6),
            r0,
        )
    }

    /// Vertical trap along z: quartic fit, a2 = 2.516/(2 r0^2),
    /// a4 = 0.0171/r0^4 kHz with r0 = 0.212 um.
    pub fn quartic_z() -> Self {
        let r0 = 0.212;
        Self::new(2.516 / (2.0 * r0 * r0), 0.0171 / r0.powi(4), 0.0, r0)
    }

    /// Pure harmonic trap with level spacing `nu_khz` for the given mass.
    pub fn harmonic(nu_khz: f64, mass_kg: f64) -> Self {
        let r0 = units::oscillator_length_um(mass_kg, nu_khz);
        Self::new(nu_khz / (2.0 * r0 * r0), 0.0, 0.0, r0)
    }

    /// V(y - lambda) in kHz as E/h.
    #[inline]
    pub fn evaluate(&self, y: f64, lambda: f64) -> f64 {
        let d = y - lambda;
        let d2 = d * d;
        (self.alpha2 + (self.alpha4 + self.alpha6 * d2) * d2) * d2
    }

    /// Tabulate V(y - lambda) over a grid.
    pub fn sample(&self, grid: &SpatialGrid, lambda: f64) -> Vec<f64> {
        grid.points()
            .iter()
            .map(|&y| self.evaluate(y, lambda))
            .collect()
    }

    /// Radius of the confining region: the positive stationary point of V
    /// beyond which a negative sextic term makes the potential decrease
    /// without bound. `None` when V is monotone outward everywhere.
    pub fn confining_radius(&self) -> Option<f64> {
        if self.alpha6 >= 0.0 {
            return None;
        }
        // V'(y)/2y = a2 + 2 a4 u + 3 a6 u^2 with u = y^2
        let (a, b, c) = (3.0 * self.alpha6, 2.0 * self.alpha4, self.alpha2);
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            return None;
        }
        let u = (-b - disc.sqrt()) / (2.0 * a);
        if u > 0.0 {
            Some(u.sqrt())
        } else {
            None
        }
    }

    /// Numerical confinement check: fails when the grid extends past the
    /// local maximum of V, where the sextic term overturns the trap.
    pub fn check_confining_on(&self, grid: &SpatialGrid) -> Result<()> {
        let extent = grid.y_min().abs().max(grid.y_max().abs());
        if let Some(r) = self.confining_radius() {
            if extent > r {
                return Err(Error::NotConfining(format!(
                    "grid extends to {extent} um but V turns over at {r:.4} um"
                )));
            }
        }
        // belt and braces: V must not dip below its center value anywhere
        let v0 = self.evaluate(0.0, 0.0);
        if grid.points().iter().any(|&y| self.evaluate(y, 0.0) < v0) {
            return Err(Error::NotConfining(
                "V falls below its central value inside the grid".into(),
            ));
        }
        Ok(())
    }
}
