//! Complex wavefunctions on a [`SpatialGrid`], basic observables, mode
//! projections, and (de)serialization.

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::spectral::SpectralTransform;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

const NORM_TOL: f64 = 1e-6;
const BASIS_TOL: f64 = 1e-3;
const BINARY_MAGIC: &[u8; 8] = b"BECPSI01";

/// Condensate state: complex amplitudes over a grid, dimension um^-1/2.
#[derive(Debug, Clone)]
pub struct Wavefunction {
    grid: Arc<SpatialGrid>,
    amps: Vec<C64>,
}

impl Wavefunction {
    /// Wrap raw amplitudes; rejects non-finite entries and length mismatch.
    pub fn new(grid: Arc<SpatialGrid>, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if !amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, amps })
    }

    /// Normalized Gaussian centred at `center` with rms width `sigma` (um).
    pub fn gaussian(grid: Arc<SpatialGrid>, center: f64, sigma: f64) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(Error::InvalidInput("gaussian width must be positive".into()));
        }
        let amps = grid
            .points()
            .iter()
            .map(|&y| C64::new((-(y - center).powi(2) / (4.0 * sigma * sigma)).exp(), 0.0))
            .collect();
        let mut psi = Self { grid, amps };
        psi.normalize();
        Ok(psi)
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dy()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Scale to unit norm; afterwards |norm^2 - 1| is at rounding level.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let s = 1.0 / n;
            for a in &mut self.amps {
                *a *= s;
            }
        }
    }

    pub fn check_normalized(&self) -> Result<()> {
        let dev = (self.norm_sq() - 1.0).abs();
        if dev > NORM_TOL {
            return Err(Error::NotNormalized { deviation: dev });
        }
        Ok(())
    }

    /// <self|other> = sum conj(self) * other * dy.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            * self.grid.dy())
    }

    /// Position expectation value <y> in um.
    pub fn mean_position(&self) -> f64 {
        self.amps
            .iter()
            .zip(self.grid.points())
            .map(|(a, &y)| a.norm_sqr() * y)
            .sum::<f64>()
            * self.grid.dy()
    }

    /// Probability density |psi|^2 on the grid.
    pub fn density(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Momentum-space probability density |psi_k(k)|^2 on the ascending
    /// wavenumber grid, normalized so that sum rho dk = 1.
    ///
    /// Rejects inputs whose norm deviates from 1 by more than 1e-6.
    pub fn to_momentum_density(&self) -> Result<MomentumDensity> {
        self.check_normalized()?;
        let t = SpectralTransform::for_grid(&self.grid);
        let amps_k = t.to_momentum_amplitudes(&self.grid, &self.amps);
        let n = self.grid.len();
        let mut rho = Vec::with_capacity(n);
        // reorder to ascending k: negative-frequency half first
        for a in &amps_k[n / 2..] {
            rho.push(a.norm_sqr());
        }
        for a in &amps_k[..n / 2] {
            rho.push(a.norm_sqr());
        }
        Ok(MomentumDensity {
            k: self.grid.momenta_ordered(),
            rho,
            dk: self.grid.dk(),
        })
    }

    /// Populations and phases of `self` in an orthonormal mode basis:
    /// p_k = |<phi_k|psi>|^2, theta_k = arg<phi_k|psi>, plus the leakage
    /// 1 - sum p_k. The basis is verified to be orthonormal to 1e-3.
    pub fn project_populations(&self, basis: &[Wavefunction]) -> Result<Projection> {
        self.check_normalized()?;
        check_orthonormal(basis)?;
        let mut populations = Vec::with_capacity(basis.len());
        let mut phases = Vec::with_capacity(basis.len());
        for phi in basis {
            let ov = phi.inner(self)?;
            populations.push(ov.norm_sqr());
            phases.push(ov.arg());
        }
        let leakage = 1.0 - populations.iter().sum::<f64>();
        Ok(Projection {
            populations,
            phases,
            leakage,
        })
    }

    /// Build sum_k sqrt(p_k) exp(i theta_k) |k> from an orthonormal basis
    /// and normalize the result (the coherent part of the superposition).
    pub fn superpose(params: &SuperpositionParams, basis: &[Wavefunction]) -> Result<Self> {
        params.validate()?;
        if basis.len() < 3 {
            return Err(Error::InvalidInput(
                "superposition needs a three-state basis".into(),
            ));
        }
        let grid = basis[0].grid.clone();
        let thetas = [0.0, params.theta01, params.theta01 + params.theta12];
        let mut amps = vec![C64::new(0.0, 0.0); grid.len()];
        for ((&p, &th), phi) in params.p.iter().zip(&thetas).zip(basis) {
            let c = C64::from_polar(p.sqrt(), th);
            for (a, b) in amps.iter_mut().zip(&phi.amps) {
                *a += c * b;
            }
        }
        let mut psi = Self::new(grid, amps)?;
        if psi.norm() == 0.0 {
            return Err(Error::InvalidInput("superposition has zero norm".into()));
        }
        psi.normalize();
        Ok(psi)
    }

    /// Plain-text serialization: one line per grid point, columns
    /// `y  Re(psi)  Im(psi)`, written with 17 significant digits.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        for (&y, a) in self.grid.points().iter().zip(&self.amps) {
            writeln!(w, "{:.16e} {:.16e} {:.16e}", y, a.re, a.im)?;
        }
        Ok(())
    }

    pub fn read_text<R: Read>(r: R, grid: Arc<SpatialGrid>) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut amps = Vec::with_capacity(grid.len());
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>, i: usize| -> Result<f64> {
                tok.ok_or(Error::Parse {
                    line: i + 1,
                    message: "expected `y re im`".into(),
                })?
                .parse()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("bad float: {e}"),
                })
            };
            let _y = parse(it.next(), i)?;
            let re = parse(it.next(), i)?;
            let im = parse(it.next(), i)?;
            amps.push(C64::new(re, im));
        }
        Self::new(grid, amps)
    }

    /// Compact binary layout: 8-byte magic, little-endian u64 point count,
    /// f64 y_min, f64 y_max, then interleaved Re/Im f64 pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.grid.len() as u64).to_le_bytes())?;
        w.write_all(&self.grid.y_min().to_le_bytes())?;
        w.write_all(&self.grid.y_max().to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Parse {
                line: 0,
                message: "bad magic in binary wavefunction".into(),
            });
        }
        let mut buf8 = [0u8; 8];
        r.read_exact(&mut buf8)?;
        let n = u64::from_le_bytes(buf8) as usize;
        r.read_exact(&mut buf8)?;
        let y_min = f64::from_le_bytes(buf8);
        r.read_exact(&mut buf8)?;
        let y_max = f64::from_le_bytes(buf8);
        let grid = SpatialGrid::new(y_min, y_max, n)?;
        let mut amps = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut buf8)?;
            let re = f64::from_le_bytes(buf8);
            r.read_exact(&mut buf8)?;
            let im = f64::from_le_bytes(buf8);
            amps.push(C64::new(re, im));
        }
        Self::new(grid, amps)
    }

    pub fn save_text(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_text(BufWriter::new(f))
    }

    pub fn load_text(path: &Path, grid: Arc<SpatialGrid>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_text(f, grid)
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_binary(BufWriter::new(f))
    }

    pub fn load_binary(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_binary(BufReader::new(f))
    }
}

/// |psi_k|^2 on the ascending wavenumber grid.
#[derive(Debug, Clone)]
pub struct MomentumDensity {
    pub k: Vec<f64>,
    pub rho: Vec<f64>,
    pub dk: f64,
}

impl MomentumDensity {
    pub fn total(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.dk
    }

    /// <k> of the density.
    pub fn mean_k(&self) -> f64 {
        self.k
            .iter()
            .zip(&self.rho)
            .map(|(&k, &r)| k * r)
            .sum::<f64>()
            * self.dk
    }
}

/// Result of projecting a state onto a mode basis.
#[derive(Debug, Clone)]
pub struct Projection {
    pub populations: Vec<f64>,
    pub phases: Vec<f64>,
    pub leakage: f64,
}

/// Occupations and relative phases of a three-mode superposition.
///
/// `p` are the mode probabilities (each in [0,1], summing to at most 1;
/// any deficit is an unmodeled fraction). `theta01` and `theta12` are the
/// relative phases of modes 1 and 2 against their predecessor, reported
/// in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperpositionParams {
    pub p: [f64; 3],
    pub theta01: f64,
    pub theta12: f64,
}

impl SuperpositionParams {
    pub fn new(p: [f64; 3], theta01: f64, theta12: f64) -> Result<Self> {
        let s = Self {
            p,
            theta01: wrap_phase(theta01),
            theta12: wrap_phase(theta12),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for &p in &self.p {
            if !(0.0..=1.0 + 1e-12).contains(&p) || !p.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "occupation {p} outside [0, 1]"
                )));
            }
        }
        let total: f64 = self.p.iter().sum();
        if total > 1.0 + 1e-9 {
            return Err(Error::InvalidInput(format!(
                "occupations sum to {total} > 1"
            )));
        }
        Ok(())
    }

    /// Coherent fraction sum p_k (the deficit to 1 is unmodeled).
    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_phase(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Max deviation of the basis overlap matrix from the identity.
pub fn orthonormality_deviation(basis: &[Wavefunction]) -> Result<f64> {
    let mut dev: f64 = 0.0;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let s = a.inner(b)?;
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((s - target).norm());
        }
    }
    Ok(dev)
}

fn check_orthonormal(basis: &[Wavefunction]) -> Result<()> {
    if basis.is_empty() {
        return Err(Error::EmptyInput("projection basis"));
    }
    let dev = orthonormality_deviation(basis)?;
    if dev > BASIS_TOL {
        return Err(Error::BasisNotOrthonormal { deviation: dev });
    }
    Ok(())
}

/// Symmetric (Loewdin) orthonormalization: returns the corrected basis
/// together with the pre-correction deviation from orthonormality.
///
/// The corrected vectors are the linear combinations phi_i' =
/// sum_j (S^-1/2)_ji phi_j, the orthonormal set closest to the input in
/// the least-squares sense.
pub fn lowdin_orthonormalize(states: &[Wavefunction]) -> Result<(Vec<Wavefunction>, f64)> {
    if states.is_empty() {
        return Err(Error::EmptyInput("orthonormalization input"));
    }
    let k = states.len();
    let mut overlap = DMatrix::<C64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            overlap[(i, j)] = states[i].inner(&states[j])?;
        }
    }
    let mut dev: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((overlap[(i, j)] - target).norm());
        }
    }
    let eig = overlap.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&w| w <= 0.0) {
        return Err(Error::InvalidInput(
            "overlap matrix is not positive definite; states are linearly dependent".into(),
        ));
    }
    // S^-1/2 = Q diag(w^-1/2) Q^H
    let q = &eig.eigenvectors;
    let mut s_inv_sqrt = DMatrix::<C64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let mut acc = C64::new(0.0, 0.0);
            for m in 0..k {
                acc += q[(i, m)] * q[(j, m)].conj() / eig.eigenvalues[m].sqrt();
            }
            s_inv_sqrt[(i, j)] = acc;
        }
    }
    let grid = states[0].grid.clone();
    let n = grid.len();
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let mut amps = vec![C64::new(0.0, 0.0); n];
        for j in 0..k {
            let c = s_inv_sqrt[(j, i)];
            for (a, b) in amps.iter_mut().zip(&states[j].amps) {
                *a += c * b;
            }
        }
        out.push(Wavefunction::new(grid.clone(), amps)?);
    }
    Ok((out, dev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn grid() -> Arc<SpatialGrid> {
        SpatialGrid::new(-4.0, 4.0, 512).unwrap()
    }

    /// Gaussian with density rms sigma_y transforms to density rms 1/(2 sigma_y).
    #[test]
    fn gaussian_width_fourier_pair() {
        let g = grid();
        let sigma_y = 0.3;
        let psi = Wavefunction::gaussian(g, 0.0, sigma_y).unwrap();
        let rho = psi.to_momentum_density().unwrap();
        let mean = rho.mean_k();
        let var: f64 = rho
            .k
            .iter()
            .zip(&rho.rho)
            .map(|(&k, &r)| (k - mean).powi(2) * r)
            .sum::<f64>()
            * rho.dk;
        assert_relative_eq!(var.sqrt(), 1.0 / (2.0 * sigma_y), epsilon = 1e-6);
    }

    #[test]
    fn momentum_density_is_normalized() {
        let g = grid();
        let psi = Wavefunction::gaussian(g, 0.7, 0.25).unwrap();
        let rho = psi.to_momentum_density().unwrap();
        assert_relative_eq!(rho.total(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn momentum_density_rejects_unnormalized() {
        let g = grid();
        let mut psi = Wavefunction::gaussian(g, 0.0, 0.2).unwrap();
        for a in psi.amplitudes_mut() {
            *a *= 1.01;
        }
        assert!(matches!(
            psi.to_momentum_density(),
            Err(Error::NotNormalized { .. })
        ));
    }

    /// Odd-parity states have a node at k = 0.
    #[test]
    fn odd_state_momentum_node() {
        let g = grid();
        let sigma = 0.3;
        let amps: Vec<C64> = g
            .points()
            .iter()
            .map(|&y| C64::new(y * (-y * y / (4.0 * sigma * sigma)).exp(), 0.0))
            .collect();
        let mut psi = Wavefunction::new(g.clone(), amps).unwrap();
        psi.normalize();
        let rho = psi.to_momentum_density().unwrap();
        let i0 = rho.k.iter().position(|&k| k.abs() < 1e-12).unwrap();
        assert_abs_diff_eq!(rho.rho[i0], 0.0, epsilon = 1e-20);
        // double-peaked: max is away from k = 0
        let imax = rho
            .rho
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(rho.k[imax].abs() > 0.1);
    }

    #[test]
    fn momentum_density_global_phase_invariant() {
        let g = grid();
        let psi = Wavefunction::gaussian(g.clone(), 0.2, 0.3).unwrap();
        let mut rotated = psi.clone();
        let phase = C64::from_polar(1.0, 1.234);
        for a in rotated.amplitudes_mut() {
            *a *= phase;
        }
        let a = psi.to_momentum_density().unwrap();
        let b = rotated.to_momentum_density().unwrap();
        for (x, y) in a.rho.iter().zip(&b.rho) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn even_state_momentum_symmetric() {
        let g = grid();
        let psi = Wavefunction::gaussian(g, 0.0, 0.22).unwrap();
        let rho = psi.to_momentum_density().unwrap();
        let n = rho.k.len();
        // k[j] = -k[n-j] for j >= 1 on the shifted grid
        for j in 1..n / 2 {
            assert_abs_diff_eq!(rho.rho[j], rho.rho[n - j], epsilon = 1e-10);
        }
    }

    #[test]
    fn projection_of_basis_vector() {
        let g = grid();
        let b0 = Wavefunction::gaussian(g.clone(), -1.5, 0.2).unwrap();
        let b1 = Wavefunction::gaussian(g.clone(), 1.5, 0.2).unwrap();
        // far-separated gaussians are orthonormal to high accuracy
        let pr = b0.project_populations(&[b0.clone(), b1]).unwrap();
        assert_relative_eq!(pr.populations[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(pr.populations[1], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(pr.leakage, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn projection_of_constructed_superposition() {
        let g = grid();
        let b0 = Wavefunction::gaussian(g.clone(), -1.5, 0.2).unwrap();
        let b1 = Wavefunction::gaussian(g.clone(), 1.5, 0.2).unwrap();
        let amps: Vec<C64> = b0
            .amplitudes()
            .iter()
            .zip(b1.amplitudes())
            .map(|(a, b)| (a + C64::i() * b) / 2.0f64.sqrt())
            .collect();
        let psi = Wavefunction::new(g, amps).unwrap();
        let pr = psi.project_populations(&[b0, b1]).unwrap();
        assert_relative_eq!(pr.populations[0], 0.5, epsilon = 1e-9);
        assert_relative_eq!(pr.populations[1], 0.5, epsilon = 1e-9);
        assert_relative_eq!(pr.phases[1] - pr.phases[0], PI / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn projection_rejects_nonorthonormal_basis() {
        let g = grid();
        let b0 = Wavefunction::gaussian(g.clone(), -0.05, 0.2).unwrap();
        let b1 = Wavefunction::gaussian(g.clone(), 0.05, 0.2).unwrap();
        let err = b0.clone().project_populations(&[b0, b1]);
        assert!(matches!(err, Err(Error::BasisNotOrthonormal { .. })));
    }

    /// Leakage equals 1 - sum p_k exactly, probed with a state outside
    /// the basis span (direct inner-product oracle on the same grid).
    #[test]
    fn leakage_matches_oracle() {
        let g = grid();
        let b0 = Wavefunction::gaussian(g.clone(), -1.5, 0.2).unwrap();
        let b1 = Wavefunction::gaussian(g.clone(), 1.5, 0.2).unwrap();
        let psi = Wavefunction::gaussian(g, 0.3, 0.35).unwrap();
        let pr = psi.project_populations(&[b0.clone(), b1.clone()]).unwrap();
        let oracle = 1.0
            - b0.inner(&psi).unwrap().norm_sqr()
            - b1.inner(&psi).unwrap().norm_sqr();
        assert_abs_diff_eq!(pr.leakage, oracle, epsilon = 1e-10);
        assert!(pr.populations.iter().sum::<f64>() < 1.0);
    }

    #[test]
    fn lowdin_produces_orthonormal_basis() {
        let g = grid();
        let b0 = Wavefunction::gaussian(g.clone(), -0.10, 0.25).unwrap();
        let b1 = Wavefunction::gaussian(g.clone(), 0.10, 0.25).unwrap();
        let (ortho, dev) = lowdin_orthonormalize(&[b0, b1]).unwrap();
        assert!(dev > 0.5); // heavily overlapping inputs
        assert!(orthonormality_deviation(&ortho).unwrap() < 1e-12);
    }

    #[test]
    fn text_roundtrip() {
        let g = grid();
        let psi = Wavefunction::gaussian(g.clone(), 0.4, 0.3).unwrap();
        let mut buf = Vec::new();
        psi.write_text(&mut buf).unwrap();
        let back = Wavefunction::read_text(&buf[..], g).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(back.amplitudes()) {
            assert_eq!(a, b); // 17 significant digits reproduce f64 exactly
        }
    }

    #[test]
    fn binary_roundtrip() {
        let g = grid();
        let psi = Wavefunction::gaussian(g, -0.2, 0.18).unwrap();
        let mut buf = Vec::new();
        psi.write_binary(&mut buf).unwrap();
        let back = Wavefunction::read_binary(&buf[..]).unwrap();
        assert!(psi.grid().same_as(back.grid()));
        for (a, b) in psi.amplitudes().iter().zip(back.amplitudes()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn superposition_params_validation() {
        assert!(SuperpositionParams::new([0.5, 0.4, 0.2], 0.0, 0.0).is_err());
        assert!(SuperpositionParams::new([0.5, -0.1, 0.1], 0.0, 0.0).is_err());
        let s = SuperpositionParams::new([0.5, 0.3, 0.1], 4.0, -4.0).unwrap();
        assert!(s.theta01 <= PI && s.theta01 > -PI);
        assert!(s.theta12 <= PI && s.theta12 > -PI);
        assert_relative_eq!(s.total(), 0.9);
    }

    #[test]
    fn phase_wrap_convention() {
        assert_relative_eq!(wrap_phase(PI), PI);
        assert_relative_eq!(wrap_phase(-PI), PI);
        assert_relative_eq!(wrap_phase(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-14);
    }
}
