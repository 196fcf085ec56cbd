//! Uniform 1D position grid with its conjugate momentum grid.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::sync::Arc;

/// Discretization of the transverse axis: `n_points` equally spaced
/// positions on `[y_min, y_max)` together with the conjugate wavenumber
/// grid in discrete-transform ordering.
///
/// The point count must be a power of two (>= 16) so the spectral
/// transforms stay exact and fast. The momentum grid spans +-pi/dy with
/// spacing 2 pi / (n dy).
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    y_min: f64,
    y_max: f64,
    n_points: usize,
    dy: f64,
    points: Vec<f64>,
    momenta_fft: Vec<f64>,
}

impl SpatialGrid {
    pub fn new(y_min: f64, y_max: f64, n_points: usize) -> Result<Arc<Self>> {
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::BadGridSize(n_points));
        }
        if !(y_max > y_min) || !y_min.is_finite() || !y_max.is_finite() {
            return Err(Error::BadGridBounds { y_min, y_max });
        }
        let n = n_points;
        let dy = (y_max - y_min) / n as f64;
        let points = (0..n).map(|j| y_min + j as f64 * dy).collect();
        let dk = 2.0 * PI / (n as f64 * dy);
        let momenta_fft = (0..n)
            .map(|j| {
                let j = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                j as f64 * dk
            })
            .collect();
        Ok(Arc::new(Self {
            y_min,
            y_max,
            n_points,
            dy,
            points,
            momenta_fft,
        }))
    }

    /// Default discretization of the transverse trap: [-2, 2] um, 1024
    /// points. The sextic default potential turns over at |y| = 2.13 um,
    /// so the box must stay inside that inversion point; 2 um leaves
    /// ~10x margin over the ground-state rms size of 0.18 um.
    pub fn default_trap() -> Arc<Self> {
        Self::new(-2.0, 2.0, 1024).expect("default grid parameters are valid")
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    /// Momentum-grid spacing 2 pi / (n dy).
    pub fn dk(&self) -> f64 {
        2.0 * PI / (self.n_points as f64 * self.dy)
    }

    /// Grid positions (um), ascending.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Wavenumbers (um^-1) in discrete-transform ordering:
    /// 0, dk, ..., +k_max-dk, -k_max, ..., -dk.
    pub fn momenta_fft_order(&self) -> &[f64] {
        &self.momenta_fft
    }

    /// Wavenumbers sorted ascending, i.e. -k_max .. +k_max-dk.
    pub fn momenta_ordered(&self) -> Vec<f64> {
        let n = self.n_points;
        let mut out = Vec::with_capacity(n);
        out.extend_from_slice(&self.momenta_fft[n / 2..]);
        out.extend_from_slice(&self.momenta_fft[..n / 2]);
        out
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n_points == other.n_points
            && (self.y_min - other.y_min).abs() < 1e-12
            && (self.y_max - other.y_max).abs() < 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(
            SpatialGrid::new(-1.0, 1.0, 15),
            Err(Error::BadGridSize(15))
        ));
        assert!(matches!(
            SpatialGrid::new(-1.0, 1.0, 48),
            Err(Error::BadGridSize(48))
        ));
        assert!(matches!(
            SpatialGrid::new(1.0, -1.0, 64),
            Err(Error::BadGridBounds { .. })
        ));
    }

    #[test]
    fn spacing_and_span() {
        let g = SpatialGrid::new(-2.0, 2.0, 256).unwrap();
        assert_relative_eq!(g.dy(), 4.0 / 256.0);
        assert_relative_eq!(g.points()[0], -2.0);
        let k = g.momenta_ordered();
        // spans +-pi/dy with spacing dk
        assert_relative_eq!(k[0], -PI / g.dy());
        assert_relative_eq!(k[1] - k[0], g.dk(), epsilon = 1e-12);
        assert_relative_eq!(*k.last().unwrap(), PI / g.dy() - g.dk(), epsilon = 1e-10);
    }

    #[test]
    fn fft_ordering_starts_at_zero() {
        let g = SpatialGrid::new(-1.0, 1.0, 32).unwrap();
        let k = g.momenta_fft_order();
        assert_eq!(k[0], 0.0);
        assert!(k[16] < 0.0);
    }
}
