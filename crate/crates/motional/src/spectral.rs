//! Spectral transforms between position and momentum representations.

use crate::grid::SpatialGrid;
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Cached forward/inverse transform plans for one grid size.
///
/// `forward`/`inverse` are the raw discrete transforms with 1/n applied
/// on the inverse, so `inverse(forward(x)) == x` up to rounding. The
/// physically normalized continuum transform is provided by
/// [`SpectralTransform::to_momentum_amplitudes`].
pub struct SpectralTransform {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralTransform {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn for_grid(grid: &SpatialGrid) -> Self {
        Self::new(grid.len())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform, no normalization.
    pub fn forward(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.forward.process(buf);
    }

    /// In-place inverse transform including the 1/n factor.
    pub fn inverse(&self, buf: &mut [C64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.inverse.process(buf);
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    /// Continuum-normalized momentum amplitudes in transform ordering:
    /// psi_k(k_j) = dy/sqrt(2 pi) * sum_m psi(y_m) exp(-i k_j y_m),
    /// so that sum |psi_k|^2 dk equals sum |psi|^2 dy.
    pub fn to_momentum_amplitudes(&self, grid: &SpatialGrid, psi: &[C64]) -> Vec<C64> {
        let mut buf = psi.to_vec();
        self.forward(&mut buf);
        let scale = grid.dy() / (2.0 * PI).sqrt();
        for (v, &k) in buf.iter_mut().zip(grid.momenta_fft_order()) {
            // the DFT sums exp(-i k (y - y_min)); restore the absolute origin
            *v *= scale * C64::from_polar(1.0, -k * grid.y_min());
        }
        buf
    }

    /// Inverse of [`Self::to_momentum_amplitudes`].
    pub fn from_momentum_amplitudes(&self, grid: &SpatialGrid, psi_k: &[C64]) -> Vec<C64> {
        let scale = grid.dy() / (2.0 * PI).sqrt();
        let mut buf: Vec<C64> = psi_k
            .iter()
            .zip(grid.momenta_fft_order())
            .map(|(&v, &k)| v / scale * C64::from_polar(1.0, k * grid.y_min()))
            .collect();
        self.inverse(&mut buf);
        buf
    }
}
