//! Effective two-mode description of the condensate in the lowest two
//! trap modes: overlap integrals, derived Hamiltonian constants, the
//! interaction-driven phase-diffusion rate, and exact small-N evolution
//! in the fixed-N occupation (Dicke) basis.
//!
//! The Hamiltonian is H = dE Jz + U Jz^2 + 4 U01 Jx^2 with
//! dE = E01 - (N-1)(U00 - U11), U = U00 + U11 - 2 U01 and
//! U_ij = (g_1d / 2) int |phi_i|^2 |phi_j|^2 dy over the two lowest
//! single-particle modes.

use crate::error::{Error, Result};
use crate::units::TWO_PI;
use crate::wavefunction::Wavefunction;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use std::io::Write;

/// Derived constants of the two-mode Hamiltonian. The identities
/// `u = u00 + u11 - 2 u01` and `delta_e = e01 - (n-1)(u00 - u11)` hold
/// exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeConstants {
    /// Single-particle level splitting (kHz).
    pub e01_khz: f64,
    /// Mode-overlap interaction energies (Hz as E/h).
    pub u00_hz: f64,
    pub u11_hz: f64,
    pub u01_hz: f64,
    pub n_atoms: u32,
    /// Effective splitting dE (kHz).
    pub delta_e_khz: f64,
    /// Dephasing interaction U (Hz).
    pub u_hz: f64,
}

impl TwoModeConstants {
    pub fn new(e01_khz: f64, u00_hz: f64, u11_hz: f64, u01_hz: f64, n_atoms: u32) -> Result<Self> {
        if n_atoms < 1 {
            return Err(Error::InvalidInput("atom number must be >= 1".into()));
        }
        let delta_e_khz = e01_khz - (n_atoms as f64 - 1.0) * (u00_hz - u11_hz) * 1e-3;
        let u_hz = u00_hz + u11_hz - 2.0 * u01_hz;
        Ok(Self {
            e01_khz,
            u00_hz,
            u11_hz,
            u01_hz,
            n_atoms,
            delta_e_khz,
            u_hz,
        })
    }

    /// Key-value report of all constants.
    pub fn write_report<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n_atoms = {}", self.n_atoms)?;
        writeln!(w, "e01_khz = {:.6}", self.e01_khz)?;
        writeln!(w, "u00_hz = {:.6}", self.u00_hz)?;
        writeln!(w, "u11_hz = {:.6}", self.u11_hz)?;
        writeln!(w, "u01_hz = {:.6}", self.u01_hz)?;
        writeln!(w, "delta_e_khz = {:.6}", self.delta_e_khz)?;
        writeln!(w, "u_hz = {:.6}", self.u_hz)?;
        Ok(())
    }
}

/// Mode-overlap interaction energies (U00, U11, U01) in Hz:
/// U_ij = (g_1d / 2) int |phi_i|^2 |phi_j|^2 dy by trapezoidal
/// quadrature, with `g_1d` in kHz um. The states must be normalized and
/// real up to a global phase.
pub fn overlap_integrals(
    phi0: &Wavefunction,
    phi1: &Wavefunction,
    g_1d_khz_um: f64,
) -> Result<(f64, f64, f64)> {
    if !phi0.grid().same_as(phi1.grid()) {
        return Err(Error::GridMismatch);
    }
    phi0.check_normalized()?;
    phi1.check_normalized()?;
    let d0 = realified_density(phi0)?;
    let d1 = realified_density(phi1)?;
    let dy = phi0.grid().dy();
    let trap = |f: &dyn Fn(usize) -> f64, n: usize| -> f64 {
        let mut acc = 0.5 * (f(0) + f(n - 1));
        for i in 1..n - 1 {
            acc += f(i);
        }
        acc * dy
    };
    let n = d0.len();
    let i00 = trap(&|i| d0[i] * d0[i], n);
    let i11 = trap(&|i| d1[i] * d1[i], n);
    let i01 = trap(&|i| d0[i] * d1[i], n);
    let scale = 0.5 * g_1d_khz_um * 1e3; // kHz -> Hz
    Ok((scale * i00, scale * i11, scale * i01))
}

/// Densities are insensitive to the global phase, but the two-mode
/// reduction assumes real mode functions; verify that assumption.
fn realified_density(phi: &Wavefunction) -> Result<Vec<f64>> {
    let amps = phi.amplitudes();
    let pivot = amps
        .iter()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    let rot = C64::from_polar(1.0, -pivot.arg());
    let mut max_abs: f64 = 0.0;
    let mut max_im: f64 = 0.0;
    for a in amps {
        let v = a * rot;
        max_abs = max_abs.max(v.re.abs());
        max_im = max_im.max(v.im.abs());
    }
    if max_im > 1e-6 * max_abs.max(1e-300) {
        return Err(Error::InvalidInput(
            "mode function is not real up to a global phase".into(),
        ));
    }
    Ok(amps.iter().map(|a| a.norm_sqr()).collect())
}

/// Binomial number-difference fluctuation sqrt(N)/2.
pub fn binomial_delta_jz(n_atoms: u32) -> f64 {
    (n_atoms as f64).sqrt() / 2.0
}

/// Phase-diffusion rate R = 2 dJz U / hbar in mrad/ms. With U as a
/// frequency (Hz) this is 2 dJz * 2 pi U, since rad/s and mrad/ms
/// coincide numerically.
pub fn phase_diffusion_rate(constants: &TwoModeConstants, delta_jz: f64) -> Result<f64> {
    if delta_jz < 0.0 {
        return Err(Error::InvalidInput(
            "number fluctuation must be >= 0".into(),
        ));
    }
    Ok(2.0 * delta_jz * TWO_PI * constants.u_hz)
}

/// Many-body state of N atoms over two modes in the occupation basis;
/// index n is the population of mode 1, with Jz eigenvalue n - N/2.
#[derive(Debug, Clone)]
pub struct SpinState {
    n_atoms: u32,
    amps: Vec<C64>,
}

impl SpinState {
    pub fn new(n_atoms: u32, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != n_atoms as usize + 1 {
            return Err(Error::InvalidInput(format!(
                "need N+1 = {} amplitudes, got {}",
                n_atoms + 1,
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized {
                deviation: (norm - 1.0).abs(),
            });
        }
        Ok(Self { n_atoms, amps })
    }

    /// All atoms in a fixed occupation state |n1 = m>.
    pub fn dicke(n_atoms: u32, m: u32) -> Result<Self> {
        if m > n_atoms {
            return Err(Error::InvalidInput(format!(
                "occupation {m} exceeds atom number {n_atoms}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); n_atoms as usize + 1];
        amps[m as usize] = C64::new(1.0, 0.0);
        Ok(Self { n_atoms, amps })
    }

    /// Equator coherent state: every atom in (|0> + e^{i phi}|1>)/sqrt(2),
    /// giving binomial occupation amplitudes.
    pub fn coherent_equator(n_atoms: u32, phi: f64) -> Self {
        let n = n_atoms as usize;
        let mut amps = Vec::with_capacity(n + 1);
        // c_k = sqrt(C(N,k) / 2^N) e^{i k phi}, built multiplicatively
        let mut mag = 0.5f64.powf(n as f64 / 2.0);
        for k in 0..=n {
            amps.push(C64::from_polar(mag, phi * k as f64));
            if k < n {
                mag *= ((n - k) as f64 / (k + 1) as f64).sqrt();
            }
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Self { n_atoms, amps }
    }

    pub fn n_atoms(&self) -> u32 {
        self.n_atoms
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// <J+> = <Jx> + i <Jy>.
    pub fn j_plus_expect(&self) -> C64 {
        let n = self.n_atoms as usize;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            let elem = (((k + 1) * (n - k)) as f64).sqrt();
            acc += self.amps[k + 1].conj() * elem * self.amps[k];
        }
        acc
    }

    pub fn jx_expect(&self) -> f64 {
        self.j_plus_expect().re
    }

    pub fn jy_expect(&self) -> f64 {
        self.j_plus_expect().im
    }

    pub fn jz_expect(&self) -> f64 {
        let half_n = self.n_atoms as f64 / 2.0;
        self.amps
            .iter()
            .enumerate()
            .map(|(k, a)| (k as f64 - half_n) * a.norm_sqr())
            .sum()
    }

    /// Transverse coherence <Jx>^2 + <Jy>^2.
    pub fn coherence(&self) -> f64 {
        self.j_plus_expect().norm_sqr()
    }
}

/// Largest atom number for which the dense-matrix evolution is allowed.
pub const MAX_DENSE_ATOMS: u32 = 200;

/// Exact evolution under the two-mode Hamiltonian by diagonalizing the
/// (N+1) x (N+1) matrix in the occupation basis. Reusable across times.
pub struct TwoModeEvolver {
    n_atoms: u32,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl TwoModeEvolver {
    pub fn new(constants: &TwoModeConstants) -> Result<Self> {
        let n = constants.n_atoms;
        if n > MAX_DENSE_ATOMS {
            return Err(Error::InvalidInput(format!(
                "N = {n} exceeds the dense-matrix limit {MAX_DENSE_ATOMS}; \
                 reduce the atom number for exact evolution"
            )));
        }
        let h = hamiltonian_matrix(constants);
        let eig = h.symmetric_eigen();
        Ok(Self {
            n_atoms: n,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn evolve(&self, initial: &SpinState, t_ms: f64) -> Result<SpinState> {
        if initial.n_atoms != self.n_atoms {
            return Err(Error::InvalidInput(
                "state and evolver atom numbers differ".into(),
            ));
        }
        let dim = self.n_atoms as usize + 1;
        // coefficients in the eigenbasis
        let mut coeff = vec![C64::new(0.0, 0.0); dim];
        for (m, c) in coeff.iter_mut().enumerate() {
            for k in 0..dim {
                *c += self.eigenvectors[(k, m)] * initial.amps[k];
            }
        }
        for (m, c) in coeff.iter_mut().enumerate() {
            *c *= C64::from_polar(1.0, -TWO_PI * self.eigenvalues[m] * t_ms);
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        for (k, a) in amps.iter_mut().enumerate() {
            for (m, c) in coeff.iter().enumerate() {
                *a += self.eigenvectors[(k, m)] * c;
            }
        }
        SpinState::new(self.n_atoms, normalize_exact(amps))
    }

    /// Transverse coherence <Jx>^2 + <Jy>^2 sampled at the given times.
    pub fn coherence_series(&self, initial: &SpinState, times: &[f64]) -> Result<Vec<f64>> {
        times
            .iter()
            .map(|&t| Ok(self.evolve(initial, t)?.coherence()))
            .collect()
    }
}

fn normalize_exact(mut amps: Vec<C64>) -> Vec<C64> {
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for a in &mut amps {
            *a /= norm;
        }
    }
    amps
}

/// Dense H = dE Jz + U Jz^2 + 4 U01 Jx^2 in kHz, exactly symmetric by
/// construction.
fn hamiltonian_matrix(constants: &TwoModeConstants) -> DMatrix<f64> {
    let n = constants.n_atoms as usize;
    let dim = n + 1;
    let u_khz = constants.u_hz * 1e-3;
    let u01_khz = constants.u01_hz * 1e-3;
    let de_khz = constants.delta_e_khz;
    let half_n = n as f64 / 2.0;

    // Jx in the occupation basis
    let mut jx = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..n {
        let elem = 0.5 * (((k + 1) * (n - k)) as f64).sqrt();
        jx[(k + 1, k)] = elem;
        jx[(k, k + 1)] = elem;
    }
    let jx2 = &jx * &jx;

    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..dim {
        let m = k as f64 - half_n;
        h[(k, k)] = de_khz * m + u_khz * m * m;
    }
    h += 4.0 * u01_khz * jx2;
    // enforce exact symmetry against rounding in the matrix product
    for i in 0..dim {
        for j in 0..i {
            let v = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

/// One-shot evolution helper.
pub fn evolve_two_mode(
    initial: &SpinState,
    constants: &TwoModeConstants,
    t_ms: f64,
) -> Result<SpinState> {
    TwoModeEvolver::new(constants)?.evolve(initial, t_ms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn constants_identities_hold_exactly() {
        let c = TwoModeConstants::new(1.76, 0.34, 0.26, 0.15, 700).unwrap();
        assert_eq!(c.u_hz, 0.34 + 0.26 - 2.0 * 0.15);
        assert_eq!(c.delta_e_khz, 1.76 - 699.0 * (0.34 - 0.26) * 1e-3);
    }

    /// N = 700, U/h = 0.31 Hz, binomial fluctuation: R ~ 52 mrad/ms.
    #[test]
    fn phase_diffusion_rate_reference_point() {
        let c = TwoModeConstants::new(1.83, 0.34, 0.26, 0.145, 700).unwrap();
        assert_relative_eq!(c.u_hz, 0.31, epsilon = 1e-12);
        let r = phase_diffusion_rate(&c, binomial_delta_jz(700)).unwrap();
        assert_relative_eq!(r, 51.5, epsilon = 0.2);
        // no interaction, no diffusion
        let c0 = TwoModeConstants::new(1.83, 0.0, 0.0, 0.0, 700).unwrap();
        assert_eq!(phase_diffusion_rate(&c0, binomial_delta_jz(700)).unwrap(), 0.0);
    }

    /// Quadrupling N doubles R at fixed U in the binomial case.
    #[test]
    fn phase_diffusion_sqrt_n_scaling() {
        let c = TwoModeConstants::new(1.83, 0.4, 0.3, 0.2, 100).unwrap();
        let r1 = phase_diffusion_rate(&c, binomial_delta_jz(100)).unwrap();
        let c4 = TwoModeConstants::new(1.83, 0.4, 0.3, 0.2, 400).unwrap();
        let r4 = phase_diffusion_rate(&c4, binomial_delta_jz(400)).unwrap();
        assert_relative_eq!(r4 / r1, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn overlap_integrals_linear_in_g() {
        let g = SpatialGrid::new(-4.0, 4.0, 256).unwrap();
        let phi0 = Wavefunction::gaussian(g.clone(), 0.0, 0.2).unwrap();
        let phi1 = Wavefunction::gaussian(g, 0.3, 0.25).unwrap();
        let (a, b, c) = overlap_integrals(&phi0, &phi1, 0.0).unwrap();
        assert_eq!((a, b, c), (0.0, 0.0, 0.0));
        let (a1, b1, c1) = overlap_integrals(&phi0, &phi1, 0.4).unwrap();
        let (a2, b2, c2) = overlap_integrals(&phi0, &phi1, 0.8).unwrap();
        assert_relative_eq!(a2 / a1, 2.0, epsilon = 1e-12);
        assert_relative_eq!(b2 / b1, 2.0, epsilon = 1e-12);
        assert_relative_eq!(c2 / c1, 2.0, epsilon = 1e-12);
    }

    /// Closed-form oracle: harmonic-oscillator modes give
    /// U00 : U11 : U01 = 1 : 3/4 : 1/2 from Gaussian-Hermite integrals.
    #[test]
    fn overlap_ratios_harmonic_oracle() {
        let g = SpatialGrid::new(-4.0, 4.0, 1024).unwrap();
        let sigma = 0.22;
        let phi0 = Wavefunction::gaussian(g.clone(), 0.0, sigma).unwrap();
        let amps: Vec<C64> = g
            .points()
            .iter()
            .map(|&y| C64::new(y * (-y * y / (4.0 * sigma * sigma)).exp(), 0.0))
            .collect();
        let mut phi1 = Wavefunction::new(g, amps).unwrap();
        phi1.normalize();
        let (u00, u11, u01) = overlap_integrals(&phi0, &phi1, 1.0).unwrap();
        assert_relative_eq!(u11 / u00, 0.75, epsilon = 1e-9);
        assert_relative_eq!(u01 / u00, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn overlap_rejects_complex_modes() {
        let g = SpatialGrid::new(-4.0, 4.0, 128).unwrap();
        let phi0 = Wavefunction::gaussian(g.clone(), 0.0, 0.3).unwrap();
        let mut phi1 = Wavefunction::gaussian(g, 0.0, 0.35).unwrap();
        let n = phi1.amplitudes().len();
        for (i, a) in phi1.amplitudes_mut().iter_mut().enumerate() {
            // position-dependent phase cannot be removed globally
            *a *= C64::from_polar(1.0, 0.8 * i as f64 / n as f64);
        }
        phi1.normalize();
        assert!(overlap_integrals(&phi0, &phi1, 1.0).is_err());
    }

    #[test]
    fn hamiltonian_is_exactly_hermitian() {
        let c = TwoModeConstants::new(1.76, 0.34, 0.26, 0.15, 40).unwrap();
        let h = hamiltonian_matrix(&c);
        for i in 0..41 {
            for j in 0..41 {
                assert_eq!(h[(i, j)], h[(j, i)]);
            }
        }
    }

    /// Pure linear rotation: U = U01 = 0 precesses <Jx> at dE and keeps
    /// the coherence magnitude constant.
    #[test]
    fn linear_rotation_preserves_coherence() {
        let c = TwoModeConstants::new(1.5, 0.0, 0.0, 0.0, 60).unwrap();
        let ev = TwoModeEvolver::new(&c).unwrap();
        let initial = SpinState::coherent_equator(60, 0.0);
        let c0 = initial.coherence();
        let mut last_angle = 0.0f64;
        for (i, &t) in [0.0, 0.05, 0.1, 0.15].iter().enumerate() {
            let st = ev.evolve(&initial, t).unwrap();
            assert_abs_diff_eq!(st.coherence(), c0, epsilon = 1e-8 * c0);
            assert_abs_diff_eq!(st.norm_sq(), 1.0, epsilon = 1e-10);
            let angle = st.jy_expect().atan2(st.jx_expect());
            if i > 0 {
                let mut step = angle - last_angle;
                while step > std::f64::consts::PI {
                    step -= 2.0 * std::f64::consts::PI;
                }
                while step < -std::f64::consts::PI {
                    step += 2.0 * std::f64::consts::PI;
                }
                // dE Jz rotates the collective phase at 2 pi dE per ms
                assert_abs_diff_eq!(step.abs(), TWO_PI * 1.5 * 0.05, epsilon = 1e-6);
            }
            last_angle = angle;
        }
    }

    /// Brute-force 3x3 oracle at N = 2: build the matrix by hand and
    /// exponentiate through its spectrum.
    #[test]
    fn n2_matches_hand_built_matrix() {
        let c = TwoModeConstants::new(1.9, 0.4, 0.27, 0.13, 2).unwrap();
        let (de, u, u01) = (c.delta_e_khz, c.u_hz * 1e-3, c.u01_hz * 1e-3);
        // basis |n1 = 0, 1, 2>, m = -1, 0, 1; <k+1|Jx|k> = sqrt((k+1)(N-k))/2
        let jx01 = (1.0f64 * 2.0).sqrt() / 2.0;
        let jx12 = (2.0f64 * 1.0).sqrt() / 2.0;
        let jx = nalgebra::Matrix3::new(
            0.0, jx01, 0.0, //
            jx01, 0.0, jx12, //
            0.0, jx12, 0.0,
        );
        let jx2 = jx * jx;
        let jz = nalgebra::Matrix3::from_diagonal(&nalgebra::Vector3::new(-1.0, 0.0, 1.0));
        let jz2 = jz * jz;
        let h = jz * de + jz2 * u + jx2 * (4.0 * u01);
        let eig = nalgebra::SymmetricEigen::new(h);
        let t = 0.37;
        let psi0 = nalgebra::Vector3::new(
            C64::new(0.6, 0.0),
            C64::new(0.0, 0.64),
            C64::new(0.48, 0.0),
        );
        let mut psi_t = nalgebra::Vector3::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for m in 0..3 {
            let mut coeff = C64::new(0.0, 0.0);
            for k in 0..3 {
                coeff += eig.eigenvectors[(k, m)] * psi0[k];
            }
            coeff *= C64::from_polar(1.0, -TWO_PI * eig.eigenvalues[m] * t);
            for k in 0..3 {
                psi_t[k] += eig.eigenvectors[(k, m)] * coeff;
            }
        }
        let initial = SpinState::new(2, vec![psi0[0], psi0[1], psi0[2]]).unwrap();
        let evolved = evolve_two_mode(&initial, &c, t).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(evolved.amplitudes()[k].re, psi_t[k].re, epsilon = 1e-10);
            assert_abs_diff_eq!(evolved.amplitudes()[k].im, psi_t[k].im, epsilon = 1e-10);
        }
    }

    /// Pure Jz^2 dephasing of a binomial coherent state decays the
    /// coherence at the analytic rate R = 2 dJz U / hbar within 20%.
    #[test]
    fn dephasing_rate_matches_analytic() {
        let n = 150u32;
        let u_hz = 6.0;
        let c = TwoModeConstants::new(1.8, u_hz / 2.0, u_hz / 2.0, 0.0, n).unwrap();
        assert_relative_eq!(c.u_hz, u_hz);
        let ev = TwoModeEvolver::new(&c).unwrap();
        let initial = SpinState::coherent_equator(n, 0.0);
        let r_rad_per_ms = phase_diffusion_rate(&c, binomial_delta_jz(n)).unwrap() * 1e-3;
        // coherence decays as exp(-(R t)^2), amplitude as exp(-(R t)^2 / 2)
        let t_probe = 0.5 / r_rad_per_ms;
        let c0 = initial.coherence();
        let ct = ev.evolve(&initial, t_probe).unwrap().coherence();
        let measured_rate = (-(ct / c0).ln()).sqrt() / t_probe;
        assert_relative_eq!(measured_rate, r_rad_per_ms, max_relative = 0.2);
    }

    #[test]
    fn atom_number_is_conserved_and_capped() {
        let c = TwoModeConstants::new(1.8, 0.3, 0.25, 0.12, 80).unwrap();
        let ev = TwoModeEvolver::new(&c).unwrap();
        let initial = SpinState::dicke(80, 30).unwrap();
        let out = ev.evolve(&initial, 1.0).unwrap();
        assert_eq!(out.n_atoms(), 80);
        assert_abs_diff_eq!(out.norm_sq(), 1.0, epsilon = 1e-10);
        let too_big = TwoModeConstants::new(1.8, 0.3, 0.25, 0.12, 201).unwrap();
        assert!(TwoModeEvolver::new(&too_big).is_err());
    }

    #[test]
    fn spin_state_validation() {
        assert!(SpinState::new(2, vec![C64::new(1.0, 0.0); 2]).is_err());
        assert!(SpinState::new(1, vec![C64::new(1.0, 0.0), C64::new(0.1, 0.0)]).is_err());
        assert!(SpinState::dicke(5, 6).is_err());
        let eq = SpinState::coherent_equator(50, 0.3);
        assert_abs_diff_eq!(eq.norm_sq(), 1.0, epsilon = 1e-12);
        // equator: <Jz> = 0, <Jx>^2+<Jy>^2 = (N/2)^2 up to 1/N corrections
        assert_abs_diff_eq!(eq.jz_expect(), 0.0, epsilon = 1e-10);
        assert_relative_eq!(eq.coherence().sqrt(), 25.0, max_relative = 0.02);
    }
}
