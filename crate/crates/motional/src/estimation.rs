//! Forward simulation of time-of-flight momentum-density series from a
//! mode superposition, and the inverse fit of populations and phases.
//!
//! After long ballistic expansion the imaged density is homothetic to the
//! in-trap momentum distribution: an image coordinate `dy` corresponds to
//! a wavenumber `dk = alpha dy` with `alpha = m / (hbar t_tof)`. The fit
//! compares observed (per-slice normalized) densities against simulated
//! ones, scaled by the coherent fraction sum p_k, so a deficit to 1 is
//! read as unmodeled population.

use crate::error::{Error, Result};
use crate::gpe::{GpeSolver, PropagationOpts};
use crate::simplex::{minimize, NelderMeadOpts};
use crate::units;
use crate::wavefunction::{wrap_phase, SuperpositionParams, Wavefunction};
use nalgebra::{DMatrix, SMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::{BufRead, BufReader, Read, Write};

/// Time-of-flight mapping between image positions and wavenumbers.
#[derive(Debug, Clone, Copy)]
pub struct TofScaling {
    /// Expansion time (ms).
    pub t_tof_ms: f64,
    pub mass_kg: f64,
    /// Gaussian imaging blur, rms width in image micrometres; multiply by
    /// alpha for the width in rescaled momentum units.
    pub blur_sigma_um: f64,
}

impl TofScaling {
    pub fn new(t_tof_ms: f64, mass_kg: f64, blur_sigma_um: f64) -> Result<Self> {
        if t_tof_ms <= 0.0 || mass_kg <= 0.0 || blur_sigma_um < 0.0 {
            return Err(Error::InvalidInput(
                "expansion time and mass must be positive, blur non-negative".into(),
            ));
        }
        Ok(Self {
            t_tof_ms,
            mass_kg,
            blur_sigma_um,
        })
    }

    /// 46 ms expansion of Rb-87 with a one-grid-cell-equivalent blur
    /// (about 53 um in the image plane for the default 4 um box).
    pub fn rb87_default() -> Self {
        Self {
            t_tof_ms: 46.0,
            mass_kg: units::MASS_RB87,
            blur_sigma_um: 52.8,
        }
    }

    /// alpha = m / (hbar t_tof) in um^-2.
    pub fn alpha(&self) -> f64 {
        units::tof_alpha_um2(self.mass_kg, self.t_tof_ms)
    }

    /// Blur width in momentum units (um^-1).
    pub fn sigma_k(&self) -> f64 {
        self.alpha() * self.blur_sigma_um
    }
}

/// Momentum densities over a uniform wavenumber grid and a time scan;
/// every slice is normalized to sum rho dk = 1 (observed inputs are
/// pre-normalized on construction).
#[derive(Debug, Clone)]
pub struct MomentumTimeSeries {
    k: Vec<f64>,
    times: Vec<f64>,
    rho: Vec<Vec<f64>>,
}

const SLICE_NORM_TOL: f64 = 1e-4;

impl MomentumTimeSeries {
    pub fn new(k: Vec<f64>, times: Vec<f64>, mut rho: Vec<Vec<f64>>) -> Result<Self> {
        if k.len() < 2 {
            return Err(Error::InvalidInput("need at least two k samples".into()));
        }
        let dk = k[1] - k[0];
        if dk <= 0.0
            || !k
                .windows(2)
                .all(|w| ((w[1] - w[0]) - dk).abs() < 1e-9 * dk.abs().max(1e-12))
        {
            return Err(Error::InvalidInput(
                "wavenumber grid must be uniform and increasing".into(),
            ));
        }
        if times.is_empty() || rho.len() != times.len() {
            return Err(Error::InvalidInput(
                "need one density row per time sample".into(),
            ));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput("times must be strictly increasing".into()));
        }
        for (i, row) in rho.iter_mut().enumerate() {
            if row.len() != k.len() {
                return Err(Error::InvalidInput(format!(
                    "density row {i} has {} entries, expected {}",
                    row.len(),
                    k.len()
                )));
            }
            let total: f64 = row.iter().sum::<f64>() * dk;
            if !(total.is_finite()) || total <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "density slice {i} has non-positive total {total}"
                )));
            }
            if (total - 1.0).abs() > SLICE_NORM_TOL {
                for v in row.iter_mut() {
                    *v /= total;
                }
            }
        }
        Ok(Self { k, times, rho })
    }

    /// Build from an image-plane position series: positions (um) map onto
    /// wavenumbers k = alpha * y.
    pub fn from_position_series(
        positions_um: Vec<f64>,
        times: Vec<f64>,
        densities: Vec<Vec<f64>>,
        scaling: &TofScaling,
    ) -> Result<Self> {
        let alpha = scaling.alpha();
        let k = positions_um.iter().map(|&y| alpha * y).collect();
        // density per dk = density per dy / alpha; the per-slice
        // renormalization in `new` absorbs the constant
        Self::new(k, times, densities)
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn dk(&self) -> f64 {
        self.k[1] - self.k[0]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rho(&self) -> &[Vec<f64>] {
        &self.rho
    }

    /// CSV layout: header `time_ms` followed by the k values; one row per
    /// time sample with the time in the first column.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "time_ms")?;
        for k in &self.k {
            write!(w, ",{k:.9}")?;
        }
        writeln!(w)?;
        for (t, row) in self.times.iter().zip(&self.rho) {
            write!(w, "{t:.6}")?;
            for v in row {
                write!(w, ",{v:.9e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::EmptyInput("momentum series"))?;
        let header = header?;
        let mut cols = header.split(',');
        let first = cols.next().unwrap_or("");
        if first.trim() != "time_ms" {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header starting with `time_ms`, got `{first}`"),
            });
        }
        let k: Vec<f64> = cols
            .map(|c| {
                c.trim().parse().map_err(|e| Error::Parse {
                    line: 1,
                    message: format!("bad wavenumber: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        if k.is_empty() {
            return Err(Error::Parse {
                line: 1,
                message: "header carries no wavenumbers".into(),
            });
        }
        let mut times = Vec::new();
        let mut rho = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let t: f64 = cols
                .next()
                .unwrap()
                .trim()
                .parse()
                .map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("bad time: {e}"),
                })?;
            let row: Vec<f64> = cols
                .map(|c| {
                    c.trim().parse().map_err(|e| Error::Parse {
                        line: idx + 1,
                        message: format!("bad density: {e}"),
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != k.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {} densities, found {}", k.len(), row.len()),
                });
            }
            times.push(t);
            rho.push(row);
        }
        Self::new(k, times, rho)
    }

    /// Binary layout mirroring the wavefunction container: magic,
    /// u64 counts, then k grid, then (time, densities) records, all
    /// little-endian f64.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"BECMTS01")?;
        w.write_all(&(self.k.len() as u64).to_le_bytes())?;
        w.write_all(&(self.times.len() as u64).to_le_bytes())?;
        for v in &self.k {
            w.write_all(&v.to_le_bytes())?;
        }
        for (t, row) in self.times.iter().zip(&self.rho) {
            w.write_all(&t.to_le_bytes())?;
            for v in row {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != b"BECMTS01" {
            return Err(Error::Parse {
                line: 0,
                message: "bad magic in binary momentum series".into(),
            });
        }
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        let nk = u64::from_le_bytes(b) as usize;
        r.read_exact(&mut b)?;
        let nt = u64::from_le_bytes(b) as usize;
        let read_f64 = |r: &mut R| -> Result<f64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        };
        let k: Vec<f64> = (0..nk)
            .map(|_| read_f64(&mut r))
            .collect::<Result<_>>()?;
        let mut times = Vec::with_capacity(nt);
        let mut rho = Vec::with_capacity(nt);
        for _ in 0..nt {
            times.push(read_f64(&mut r)?);
            rho.push((0..nk).map(|_| read_f64(&mut r)).collect::<Result<_>>()?);
        }
        Self::new(k, times, rho)
    }
}

/// Discrete Gaussian convolution along k with rms width `sigma_k`.
pub fn gaussian_blur(rho: &[f64], dk: f64, sigma_k: f64) -> Vec<f64> {
    if sigma_k <= 0.0 {
        return rho.to_vec();
    }
    let half_width = ((4.0 * sigma_k / dk).ceil() as usize).max(1);
    let kernel: Vec<f64> = (0..=2 * half_width)
        .map(|j| {
            let x = (j as f64 - half_width as f64) * dk;
            (-x * x / (2.0 * sigma_k * sigma_k)).exp()
        })
        .collect();
    let ksum: f64 = kernel.iter().sum();
    let n = rho.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for (j, &kv) in kernel.iter().enumerate() {
            let idx = i as i64 + j as i64 - half_width as i64;
            if idx >= 0 && (idx as usize) < n {
                acc += kv * rho[idx as usize];
            }
        }
        out[i] = acc / ksum;
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct ObservationOpts {
    /// Observation sampling interval (ms).
    pub sample_dt: f64,
    /// Propagation step (ms).
    pub dt: f64,
}

impl Default for ObservationOpts {
    fn default() -> Self {
        Self {
            sample_dt: 0.05,
            dt: crate::gpe::DEFAULT_DT_MS,
        }
    }
}

/// Simulate the expansion-image series of an initial three-mode
/// superposition evolving in the static trap: build
/// psi = sum_k sqrt(p_k) e^{i theta_k} |k>, propagate, convert every
/// sample to a blurred momentum density at the observation interval.
pub fn simulate_observation(
    init: &SuperpositionParams,
    basis: &[Wavefunction],
    solver: &GpeSolver,
    duration: f64,
    scaling: &TofScaling,
    opts: &ObservationOpts,
) -> Result<MomentumTimeSeries> {
    init.validate()?;
    if init.total() > 1.0 + 1e-9 {
        return Err(Error::InvalidInput("occupations exceed unity".into()));
    }
    if duration < 0.0 {
        return Err(Error::InvalidInput("duration must be >= 0".into()));
    }
    let psi0 = Wavefunction::superpose(init, basis)?;
    let traj = solver.propagate(
        &psi0,
        None,
        (0.0, duration.max(opts.sample_dt)),
        &PropagationOpts::with_stride(opts.dt, opts.sample_dt),
    )?;
    let sigma_k = scaling.sigma_k();
    let mut times = Vec::new();
    let mut rho = Vec::new();
    for (t, state) in traj.times.iter().zip(&traj.states) {
        if *t > duration + 1e-9 {
            break;
        }
        let md = state.to_momentum_density()?;
        times.push(*t);
        rho.push(gaussian_blur(&md.rho, md.dk, sigma_k));
    }
    let k = solver.grid().momenta_ordered();
    MomentumTimeSeries::new(k, times, rho)
}

/// Outcome of [`fit_populations`].
#[derive(Debug, Clone)]
pub struct PopulationFit {
    pub params: SuperpositionParams,
    /// 1-sigma confidence intervals for (p0, p1, p2, theta01, theta12).
    pub sigma: [f64; 5],
    /// Root of the summed squared density misfit.
    pub residual_l2: f64,
    /// Integrated absolute misfit over integrated observed density; the
    /// unmodeled (higher states plus incoherent) fraction.
    pub residual_fraction: f64,
    /// Fitted global time offset (ms) when enabled.
    pub time_offset: Option<f64>,
    pub cost_evals: usize,
}

impl PopulationFit {
    pub fn write_report<W: Write>(&self, mut w: W) -> Result<()> {
        let p = &self.params;
        writeln!(w, "p0 = {:.6} +- {:.3e}", p.p[0], self.sigma[0])?;
        writeln!(w, "p1 = {:.6} +- {:.3e}", p.p[1], self.sigma[1])?;
        writeln!(w, "p2 = {:.6} +- {:.3e}", p.p[2], self.sigma[2])?;
        writeln!(w, "theta01_rad = {:.6} +- {:.3e}", p.theta01, self.sigma[3])?;
        writeln!(w, "theta12_rad = {:.6} +- {:.3e}", p.theta12, self.sigma[4])?;
        writeln!(w, "coherent_fraction = {:.6}", p.total())?;
        writeln!(w, "residual_l2 = {:.6e}", self.residual_l2)?;
        writeln!(w, "residual_fraction = {:.6}", self.residual_fraction)?;
        if let Some(t0) = self.time_offset {
            writeln!(w, "time_offset_ms = {t0:.6}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitOpts {
    pub restarts: usize,
    pub max_evals_per_restart: usize,
    pub seed: u64,
    /// Fit a global time offset between observation and simulation start
    /// as a sixth parameter.
    pub fit_time_offset: bool,
    pub dt: f64,
}

impl Default for FitOpts {
    fn default() -> Self {
        Self {
            restarts: 2,
            max_evals_per_restart: 600,
            seed: 7,
            fit_time_offset: false,
            dt: 1.0e-3,
        }
    }
}

/// Stick-breaking map from unconstrained coordinates to occupations with
/// p_k >= 0 and sum <= 1.
fn occupations_from(x: &[f64]) -> [f64; 3] {
    let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
    let p0 = sig(x[0]);
    let p1 = (1.0 - p0) * sig(x[1]);
    let p2 = (1.0 - p0 - p1) * sig(x[2]);
    [p0, p1, p2]
}

fn occupations_into(p: &[f64; 3]) -> [f64; 3] {
    let logit = |v: f64| {
        let c = v.clamp(1e-6, 1.0 - 1e-6);
        (c / (1.0 - c)).ln()
    };
    let x0 = logit(p[0]);
    let rest1 = 1.0 - p[0];
    let x1 = logit(if rest1 > 1e-12 { p[1] / rest1 } else { 0.5 });
    let rest2 = 1.0 - p[0] - p[1];
    let x2 = logit(if rest2 > 1e-12 { p[2] / rest2 } else { 0.5 });
    [x0, x1, x2]
}

/// Fit (p0, p1, p2, theta01, theta12) so the simulated density map best
/// matches the observation, by simplex search over a smooth
/// reparameterization that enforces p_k >= 0 and sum p_k <= 1.
/// Confidence intervals come from the local quadratic (Gauss-Newton)
/// model of the residual at the optimum.
pub fn fit_populations(
    observed: &MomentumTimeSeries,
    basis: &[Wavefunction],
    solver: &GpeSolver,
    scaling: &TofScaling,
    opts: &FitOpts,
) -> Result<PopulationFit> {
    let grid = solver.grid();
    let k_sim = grid.momenta_ordered();
    if observed.k()[0] < k_sim[0] - 1e-9
        || observed.k()[observed.k().len() - 1] > k_sim[k_sim.len() - 1] + 1e-9
    {
        return Err(Error::InvalidInput(
            "observed wavenumber range exceeds the simulation bandwidth".into(),
        ));
    }
    let t_end = *observed.times().last().unwrap();
    let n_params = if opts.fit_time_offset { 6 } else { 5 };

    // one propagation per candidate serves every observed time
    let sigma_k = scaling.sigma_k();
    let model_map = |x: &[f64]| -> Result<Vec<Vec<f64>>> {
        let p = occupations_from(x);
        let total = p[0] + p[1] + p[2];
        let sp = SuperpositionParams {
            p,
            theta01: x[3],
            theta12: x[4],
        };
        let offset = if opts.fit_time_offset { x[5] } else { 0.0 };
        let psi0 = Wavefunction::superpose(&sp, basis)?;
        let fine_dt = observed
            .times()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
            .min(0.05)
            / 2.0;
        let traj = solver.propagate(
            &psi0,
            None,
            (0.0, (t_end + offset.max(0.0)).max(fine_dt)),
            &PropagationOpts::with_stride(opts.dt, fine_dt),
        )?;
        let slices: Vec<(f64, Vec<f64>)> = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| {
                let md = s.to_momentum_density()?;
                Ok((*t, gaussian_blur(&md.rho, md.dk, sigma_k)))
            })
            .collect::<Result<_>>()?;
        // interpolate in time and momentum onto the observed grid
        let mut out = Vec::with_capacity(observed.times().len());
        for &t_obs in observed.times() {
            let t_sim = (t_obs + offset).clamp(slices[0].0, slices.last().unwrap().0);
            let j = slices
                .partition_point(|(t, _)| *t <= t_sim)
                .clamp(1, slices.len() - 1);
            let (t_a, row_a) = &slices[j - 1];
            let (t_b, row_b) = &slices[j];
            let w = if t_b > t_a { (t_sim - t_a) / (t_b - t_a) } else { 0.0 };
            let blended: Vec<f64> = row_a
                .iter()
                .zip(row_b)
                .map(|(a, b)| a + w * (b - a))
                .collect();
            let row = resample_linear(&k_sim, &blended, observed.k())
                .into_iter()
                .map(|v| total * v)
                .collect();
            out.push(row);
        }
        Ok(out)
    };

    let pending: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let evals = std::cell::RefCell::new(0usize);
    let ssr_of = |x: &[f64]| -> f64 {
        if pending.borrow().is_some() {
            return f64::INFINITY;
        }
        match model_map(x) {
            Ok(model) => {
                *evals.borrow_mut() += 1;
                let mut ssr = 0.0;
                for (m_row, o_row) in model.iter().zip(observed.rho()) {
                    for (m, o) in m_row.iter().zip(o_row) {
                        ssr += (m - o) * (m - o);
                    }
                }
                ssr * observed.dk()
            }
            Err(e) => {
                *pending.borrow_mut() = Some(e);
                f64::INFINITY
            }
        }
    };

    // neutral start: equal occupations, zero phases
    let mut x0 = vec![0.0; n_params];
    let xp = occupations_into(&[0.35, 0.35, 0.2]);
    x0[..3].copy_from_slice(&xp);
    let mut steps = vec![0.6, 0.6, 0.6, 0.8, 0.8];
    if opts.fit_time_offset {
        steps.push(0.02);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best_x = x0.clone();
    let mut best_ssr = f64::INFINITY;
    for restart in 0..opts.restarts.max(1) {
        let mut start = best_x.clone();
        if restart > 0 {
            for (i, v) in start.iter_mut().enumerate() {
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                *v += 0.5 * steps[i.min(steps.len() - 1)]
                    * (-2.0 * u1.ln()).sqrt()
                    * (2.0 * PI * u2).cos();
            }
        }
        let out = minimize(
            |x| ssr_of(x),
            &start,
            &steps,
            &NelderMeadOpts {
                max_evals: opts.max_evals_per_restart,
                f_tol: 1e-14,
                x_tol: 1e-8,
            },
        );
        if let Some(e) = pending.borrow_mut().take() {
            return Err(e);
        }
        if out.fx < best_ssr {
            best_ssr = out.fx;
            best_x = out.x;
        }
    }
    if !best_ssr.is_finite() {
        return Err(Error::NotConverged {
            context: "population fit".into(),
            residual: best_ssr,
        });
    }

    // final model, residual fraction, and the quadratic error model
    let model = model_map(&best_x)?;
    let mut abs_misfit = 0.0;
    let mut abs_obs = 0.0;
    for (m_row, o_row) in model.iter().zip(observed.rho()) {
        for (m, o) in m_row.iter().zip(o_row) {
            abs_misfit += (m - o).abs();
            abs_obs += o.abs();
        }
    }
    let residual_fraction = abs_misfit / abs_obs.max(1e-300);

    let sigma = confidence_intervals(&best_x, best_ssr, &model, observed, &model_map)?;

    let p = occupations_from(&best_x);
    let params = SuperpositionParams {
        p,
        theta01: wrap_phase(best_x[3]),
        theta12: wrap_phase(best_x[4]),
    };
    let cost_evals = *evals.borrow();
    Ok(PopulationFit {
        params,
        sigma,
        residual_l2: best_ssr.sqrt(),
        residual_fraction,
        time_offset: if opts.fit_time_offset {
            Some(best_x[5])
        } else {
            None
        },
        cost_evals,
    })
}

/// Gauss-Newton covariance of the physical parameters at the optimum,
/// via finite-difference sensitivities in the unconstrained coordinates
/// mapped through the reparameterization Jacobian.
fn confidence_intervals<F>(
    x_opt: &[f64],
    ssr: f64,
    model_opt: &[Vec<f64>],
    observed: &MomentumTimeSeries,
    model_map: &F,
) -> Result<[f64; 5]>
where
    F: Fn(&[f64]) -> Result<Vec<Vec<f64>>>,
{
    let n_data: usize = model_opt.iter().map(|r| r.len()).sum();
    let flat_opt: Vec<f64> = model_opt.iter().flatten().copied().collect();
    let h = 1e-3;
    let mut jac = DMatrix::<f64>::zeros(n_data, 5);
    for j in 0..5 {
        let mut xp = x_opt.to_vec();
        xp[j] += h;
        let mp: Vec<f64> = model_map(&xp)?.into_iter().flatten().collect();
        for i in 0..n_data {
            jac[(i, j)] = (mp[i] - flat_opt[i]) / h;
        }
    }
    let jtj = jac.transpose() * &jac;
    let dof = (n_data as f64 - x_opt.len() as f64).max(1.0);
    let s2 = ssr / observed.dk() / dof;
    let cov_x = match jtj.try_inverse() {
        Some(inv) => inv * s2,
        None => return Ok([f64::NAN; 5]),
    };
    // chain rule through the stick-breaking map; phases map identically
    let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
    let dsig = |v: f64| {
        let s = sig(v);
        s * (1.0 - s)
    };
    let (x0, x1, x2) = (x_opt[0], x_opt[1], x_opt[2]);
    let p0 = sig(x0);
    let p1 = (1.0 - p0) * sig(x1);
    let mut m = SMatrix::<f64, 5, 5>::zeros();
    m[(0, 0)] = dsig(x0);
    m[(1, 0)] = -dsig(x0) * sig(x1);
    m[(1, 1)] = (1.0 - p0) * dsig(x1);
    m[(2, 0)] = (-dsig(x0) - m[(1, 0)]) * sig(x2);
    m[(2, 1)] = -m[(1, 1)] * sig(x2);
    m[(2, 2)] = (1.0 - p0 - p1) * dsig(x2);
    m[(3, 3)] = 1.0;
    m[(4, 4)] = 1.0;
    let cov5 = {
        let mut c = SMatrix::<f64, 5, 5>::zeros();
        for i in 0..5 {
            for j in 0..5 {
                c[(i, j)] = cov_x[(i, j)];
            }
        }
        m * c * m.transpose()
    };
    let mut sigma = [0.0; 5];
    for i in 0..5 {
        sigma[i] = cov5[(i, i)].max(0.0).sqrt();
    }
    Ok(sigma)
}

/// Linear resampling of `(xs, ys)` onto `targets` (all ascending).
fn resample_linear(xs: &[f64], ys: &[f64], targets: &[f64]) -> Vec<f64> {
    targets
        .iter()
        .map(|&t| {
            if t <= xs[0] {
                return ys[0];
            }
            if t >= xs[xs.len() - 1] {
                return ys[ys.len() - 1];
            }
            let j = xs.partition_point(|&x| x <= t).clamp(1, xs.len() - 1);
            let w = (t - xs[j - 1]) / (xs[j] - xs[j - 1]);
            ys[j - 1] + w * (ys[j] - ys[j - 1])
        })
        .collect()
}

/// Mean wavenumber of each slice, useful for beat-frequency checks.
pub fn mean_k_series(series: &MomentumTimeSeries) -> Vec<f64> {
    let dk = series.dk();
    series
        .rho()
        .iter()
        .map(|row| {
            row.iter()
                .zip(series.k())
                .map(|(&r, &k)| r * k)
                .sum::<f64>()
                * dk
        })
        .collect()
}
