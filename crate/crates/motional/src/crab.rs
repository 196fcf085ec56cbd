//! Optimization of control-waveform coefficients: the two transfer cost
//! functions, the simplex search over the truncated Fourier basis with
//! seeded restarts and optional block-coordinate cycling, and the
//! second-pulse evaluation context.

use crate::control::{ControlWaveform, Envelope};
use crate::error::{Error, Result};
use crate::gpe::GpeSolver;
use crate::simplex::{minimize, NelderMeadOpts};
use crate::wavefunction::Wavefunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

/// Which cost a problem minimizes; informational for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    /// State-transfer infidelity of the first pulse.
    Pulse1,
    /// Fringe-quality cost of the readout pulse.
    Pulse2,
    Custom,
}

/// Search-space and budget description for [`optimize`].
///
/// The parameter vector is `[amplitudes || phases]`, length
/// `2 * n_components`. The seed fully determines the restart sequence.
#[derive(Debug, Clone)]
pub struct OptimizationProblem {
    pub kind: CostKind,
    /// Pulse duration (ms).
    pub duration: f64,
    pub n_components: usize,
    /// Displacement bound (um); violations are penalized, not clipped.
    pub lambda_max: f64,
    pub envelope: Envelope,
    /// Weight of the quadratic bound penalty w (max|lambda| - bound)^2.
    pub penalty_weight: f64,
    /// Total cost-evaluation budget across all restarts.
    pub budget: usize,
    /// Number of seeded simplex restarts (>= 1).
    pub restarts: usize,
    pub seed: u64,
    /// `Some(b)`: optimize components in cycling blocks of `b` instead of
    /// all at once; much better conditioned beyond ~20 components.
    pub block_size: Option<usize>,
    /// Initial simplex displacement for amplitudes (um).
    pub amp_step: f64,
    /// Initial simplex displacement for phases (rad).
    pub phase_step: f64,
    /// Optional warm start; zero waveform otherwise.
    pub initial: Option<ControlWaveform>,
}

impl OptimizationProblem {
    pub fn new(kind: CostKind, duration: f64, n_components: usize) -> Self {
        Self {
            kind,
            duration,
            n_components,
            lambda_max: 1.0,
            envelope: Envelope::default(),
            penalty_weight: 25.0,
            budget: 3000,
            restarts: 3,
            seed: 1,
            block_size: None,
            amp_step: 0.02,
            phase_step: 0.3,
            initial: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget < 1 {
            return Err(Error::InvalidInput("budget must be >= 1".into()));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidInput("restarts must be >= 1".into()));
        }
        if self.n_components < 1 {
            return Err(Error::InvalidInput("need at least one component".into()));
        }
        if let Some(b) = self.block_size {
            if b < 1 {
                return Err(Error::InvalidInput("block size must be >= 1".into()));
            }
        }
        if let Some(w) = &self.initial {
            if w.n_components() != self.n_components
                || (w.duration() - self.duration).abs() > 1e-12
            {
                return Err(Error::InvalidInput(
                    "warm start does not match the problem layout".into(),
                ));
            }
        }
        Ok(())
    }

    fn waveform_from(&self, params: &[f64]) -> Result<ControlWaveform> {
        let n = self.n_components;
        ControlWaveform::new_unbounded(
            self.duration,
            params[..n].to_vec(),
            params[n..].to_vec(),
            self.lambda_max,
            self.envelope,
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TraceRecord {
    pub eval: usize,
    pub cost: f64,
    pub best: f64,
}

/// Per-evaluation record of an optimization run.
#[derive(Debug, Clone)]
pub struct OptimizationTrace {
    pub records: Vec<TraceRecord>,
    pub final_cost: f64,
    pub converged: bool,
    pub wall_time_ms: f64,
}

impl OptimizationTrace {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "evaluation,cost,best")?;
        for r in &self.records {
            writeln!(w, "{},{:.12e},{:.12e}", r.eval, r.cost, r.best)?;
        }
        Ok(())
    }
}

/// Transfer infidelity 1 - (Re<target|psi>)^2, exactly in the real-part
/// squared form, which is sensitive to the global phase of `psi`.
pub fn cost_pulse1(final_state: &Wavefunction, target: &Wavefunction) -> Result<f64> {
    final_state.check_normalized()?;
    target.check_normalized()?;
    let ov = target.inner(final_state)?;
    Ok(1.0 - ov.re * ov.re)
}

/// Global-phase-insensitive variant 1 - |<target|psi>|^2, for comparison
/// studies.
pub fn cost_pulse1_modulus(final_state: &Wavefunction, target: &Wavefunction) -> Result<f64> {
    final_state.check_normalized()?;
    target.check_normalized()?;
    Ok(1.0 - target.inner(final_state)?.norm_sqr())
}

/// Fringe-quality cost over the hold-time scan:
/// max_h(1 - p0 - p1) + |1 - max_h p0 + min_h p0| + |1 - max_h p1 + min_h p1|.
///
/// The first term penalizes population leaving the two-level system, the
/// other two reward full-swing oscillations of each population.
pub fn cost_pulse2(populations: &[(f64, f64)]) -> Result<f64> {
    if populations.is_empty() {
        return Err(Error::EmptyInput("hold-time population list"));
    }
    let tol = 1e-9;
    for &(p0, p1) in populations {
        if !(-tol..=1.0 + tol).contains(&p0) || !(-tol..=1.0 + tol).contains(&p1) {
            return Err(Error::InvalidInput(format!(
                "populations must lie in [0, 1], got ({p0}, {p1})"
            )));
        }
    }
    let leak = populations
        .iter()
        .map(|&(p0, p1)| 1.0 - p0 - p1)
        .fold(f64::NEG_INFINITY, f64::max);
    let (min0, max0) = populations
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(p0, _)| {
            (lo.min(p0), hi.max(p0))
        });
    let (min1, max1) = populations
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, p1)| {
            (lo.min(p1), hi.max(p1))
        });
    Ok(leak + (1.0 - max0 + min0).abs() + (1.0 - max1 + min1).abs())
}

/// Minimize `cost` over the waveform coefficients.
///
/// Deterministic given the problem seed. A run that exhausts its budget
/// returns the best waveform found, flagged `converged = false` in the
/// trace rather than as an error. Propagation errors from the callback
/// abort the search and bubble up.
pub fn optimize<F>(
    problem: &OptimizationProblem,
    cost: F,
) -> Result<(ControlWaveform, OptimizationTrace)>
where
    F: Fn(&ControlWaveform) -> Result<f64>,
{
    problem.validate()?;
    let start = Instant::now();
    let n = problem.n_components;
    let dim = 2 * n;

    let records: RefCell<Vec<TraceRecord>> = RefCell::new(Vec::new());
    let pending_error: RefCell<Option<Error>> = RefCell::new(None);
    let evals = RefCell::new(0usize);

    let full_cost = |params: &[f64]| -> f64 {
        if pending_error.borrow().is_some() {
            return f64::INFINITY;
        }
        let w = match problem.waveform_from(params) {
            Ok(w) => w,
            Err(e) => {
                *pending_error.borrow_mut() = Some(e);
                return f64::INFINITY;
            }
        };
        let penalty = problem.penalty_weight * w.bound_excess().powi(2);
        match cost(&w) {
            Ok(c) => {
                let total = c + penalty;
                let mut rec = records.borrow_mut();
                let mut ev = evals.borrow_mut();
                *ev += 1;
                let best = rec.last().map_or(total, |r| r.best.min(total));
                rec.push(TraceRecord {
                    eval: *ev,
                    cost: total,
                    best,
                });
                total
            }
            Err(e) => {
                *pending_error.borrow_mut() = Some(e);
                f64::INFINITY
            }
        }
    };

    let mut best_params: Vec<f64> = match &problem.initial {
        Some(w) => {
            let mut p = w.amplitudes().to_vec();
            p.extend_from_slice(w.phases());
            p
        }
        None => vec![0.0; dim],
    };
    let mut best_cost = full_cost(&best_params);
    if let Some(e) = pending_error.borrow_mut().take() {
        return Err(e);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(problem.seed);
    let per_restart = (problem.budget / problem.restarts).max(1);

    'restarts: for restart in 0..problem.restarts {
        let used = *evals.borrow();
        if used >= problem.budget {
            break;
        }
        let restart_budget = per_restart.min(problem.budget - used);

        let mut x0 = best_params.clone();
        if restart > 0 {
            for (i, v) in x0.iter_mut().enumerate() {
                let scale = if i < n {
                    problem.amp_step
                } else {
                    problem.phase_step
                };
                // Box-Muller Gaussian perturbation
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                *v += scale * (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos();
            }
        }

        match problem.block_size {
            None => {
                let steps = simplex_steps(problem, 0, n);
                let opts = NelderMeadOpts {
                    max_evals: restart_budget,
                    ..NelderMeadOpts::default()
                };
                let out = minimize(|p| full_cost(p), &x0, &steps, &opts);
                if let Some(e) = pending_error.borrow_mut().take() {
                    return Err(e);
                }
                if out.fx < best_cost {
                    best_cost = out.fx;
                    best_params = out.x;
                }
            }
            Some(b) => {
                // cycle component blocks, polishing the embedding each pass
                let n_blocks = n.div_ceil(b);
                let chunk = (restart_budget / (2 * n_blocks)).max(60 * b);
                let mut current = x0;
                let mut current_cost = full_cost(&current);
                if current_cost < best_cost {
                    best_cost = current_cost;
                    best_params = current.clone();
                }
                'sweeps: loop {
                    let mut improved = false;
                    for block in 0..n_blocks {
                        let used = *evals.borrow();
                        if used >= problem.budget
                            || used >= (restart + 1) * per_restart
                        {
                            if current_cost < best_cost {
                                best_cost = current_cost;
                                best_params = current.clone();
                            }
                            if used >= problem.budget {
                                break 'restarts;
                            }
                            break 'sweeps;
                        }
                        let lo = block * b;
                        let hi = (lo + b).min(n);
                        let idx: Vec<usize> =
                            (lo..hi).chain(n + lo..n + hi).collect();
                        let sub0: Vec<f64> = idx.iter().map(|&i| current[i]).collect();
                        let sub_steps = simplex_steps(problem, lo, hi - lo)
                            .into_iter()
                            .collect::<Vec<_>>();
                        let embed = |sub: &[f64]| {
                            let mut full = current.clone();
                            for (&i, &v) in idx.iter().zip(sub) {
                                full[i] = v;
                            }
                            full
                        };
                        let out = minimize(
                            |sub| full_cost(&embed(sub)),
                            &sub0,
                            &sub_steps,
                            &NelderMeadOpts {
                                max_evals: chunk,
                                ..NelderMeadOpts::default()
                            },
                        );
                        if let Some(e) = pending_error.borrow_mut().take() {
                            return Err(e);
                        }
                        if out.fx < current_cost - 1e-15 {
                            current = embed(&out.x);
                            current_cost = out.fx;
                            improved = true;
                        }
                    }
                    if current_cost < best_cost {
                        best_cost = current_cost;
                        best_params = current.clone();
                    }
                    if !improved {
                        break;
                    }
                }
            }
        }
    }

    let waveform = problem.waveform_from(&best_params)?;
    let records = records.into_inner();
    let converged = *evals.borrow() < problem.budget;
    Ok((
        waveform,
        OptimizationTrace {
            final_cost: best_cost,
            converged,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            records,
        },
    ))
}

fn simplex_steps(problem: &OptimizationProblem, _first: usize, count: usize) -> Vec<f64> {
    let mut steps = vec![problem.amp_step; count];
    steps.extend(vec![problem.phase_step; count]);
    steps
}

/// Deterministic warm start: scan single-harmonic waveforms near the
/// resonant component for the best (amplitude, phase) combination.
pub fn scan_seed<F>(
    problem: &OptimizationProblem,
    resonance_khz: f64,
    cost: F,
) -> Result<ControlWaveform>
where
    F: Fn(&ControlWaveform) -> Result<f64>,
{
    problem.validate()?;
    let n = problem.n_components;
    let center = (resonance_khz * problem.duration).round() as i64;
    let candidates: Vec<usize> = [center - 1, center, center + 1]
        .iter()
        .filter_map(|&c| {
            if c >= 1 && c as usize <= n {
                Some(c as usize - 1)
            } else {
                None
            }
        })
        .collect();
    let amp_grid = [0.05, 0.10, 0.15, 0.22, 0.30, 0.42];
    let phase_grid = [0.0, PI / 2.0, PI, 3.0 * PI / 2.0];
    let mut best: Option<(f64, ControlWaveform)> = None;
    for &comp in &candidates {
        for &a in &amp_grid {
            for &ph in &phase_grid {
                let mut amps = vec![0.0; n];
                let mut phases = vec![0.0; n];
                amps[comp] = a;
                phases[comp] = ph;
                let w = ControlWaveform::new_unbounded(
                    problem.duration,
                    amps,
                    phases,
                    problem.lambda_max,
                    problem.envelope,
                )?;
                let c = cost(&w)?;
                if best.as_ref().map_or(true, |(bc, _)| c < *bc) {
                    best = Some((c, w));
                }
            }
        }
    }
    Ok(best.expect("scan grid is never empty").1)
}

/// First-pulse evaluation context: drives the interacting ground state
/// toward the balanced superposition of the two lowest modes.
pub struct Pulse1Context {
    solver: GpeSolver,
    initial: Wavefunction,
    target: Wavefunction,
    dt: f64,
    /// Use the modulus-squared fidelity instead of the real-part form.
    pub modulus_fidelity: bool,
}

impl Pulse1Context {
    pub fn new(
        solver: GpeSolver,
        initial: Wavefunction,
        target: Wavefunction,
        dt: f64,
    ) -> Result<Self> {
        initial.check_normalized()?;
        target.check_normalized()?;
        if !initial.grid().same_as(solver.grid()) || !target.grid().same_as(solver.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            solver,
            initial,
            target,
            dt,
            modulus_fidelity: false,
        })
    }

    /// Balanced target (|0> + |1>)/sqrt(2) from an orthonormal mode pair.
    pub fn balanced_target(phi0: &Wavefunction, phi1: &Wavefunction) -> Result<Wavefunction> {
        let amps = phi0
            .amplitudes()
            .iter()
            .zip(phi1.amplitudes())
            .map(|(a, b)| (a + b) / 2.0f64.sqrt())
            .collect();
        let mut t = Wavefunction::new(phi0.grid().clone(), amps)?;
        t.normalize();
        Ok(t)
    }

    pub fn evaluate(&self, w: &ControlWaveform) -> Result<f64> {
        let final_state =
            self.solver
                .propagate_final(&self.initial, Some(w), (0.0, w.duration()), self.dt)?;
        if self.modulus_fidelity {
            cost_pulse1_modulus(&final_state, &self.target)
        } else {
            cost_pulse1(&final_state, &self.target)
        }
    }

    pub fn final_state(&self, w: &ControlWaveform) -> Result<Wavefunction> {
        self.solver
            .propagate_final(&self.initial, Some(w), (0.0, w.duration()), self.dt)
    }
}

/// Input-state convention for the second-pulse optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pulse2Inputs {
    /// Propagate the first-pulse output through each hold time (default).
    Pulse1Outputs,
    /// Idealized equator states (|0> + e^{i theta}|1>)/sqrt(2) at equally
    /// spaced phases.
    IdealEquator,
}

/// Second-pulse evaluation context: the held input states are prepared
/// once; every candidate waveform is then propagated from each of them in
/// parallel and scored with [`cost_pulse2`].
pub struct Pulse2Context {
    solver: GpeSolver,
    basis: Vec<Wavefunction>,
    inputs: Vec<Wavefunction>,
    dt: f64,
}

impl Pulse2Context {
    /// Prepare the hold-time inputs. `basis` must be the orthonormalized
    /// projection basis; `hold_times` must be non-empty and ascending.
    pub fn prepare(
        solver: GpeSolver,
        pulse1: &ControlWaveform,
        hold_times: &[f64],
        basis: Vec<Wavefunction>,
        mode: Pulse2Inputs,
        dt: f64,
    ) -> Result<Self> {
        if hold_times.is_empty() {
            return Err(Error::EmptyInput("hold-time list"));
        }
        if basis.len() < 2 {
            return Err(Error::InvalidInput(
                "projection basis needs at least two states".into(),
            ));
        }
        let inputs = match mode {
            Pulse2Inputs::Pulse1Outputs => {
                if !hold_times.windows(2).all(|w| w[1] > w[0])
                    || hold_times[0] < 0.0
                {
                    return Err(Error::InvalidInput(
                        "hold times must be non-negative and strictly increasing".into(),
                    ));
                }
                let ground = solver.solve_stationary(1, &Default::default())?;
                let after_p1 = solver.propagate_final(
                    &ground.states[0],
                    Some(pulse1),
                    (0.0, pulse1.duration()),
                    dt,
                )?;
                let mut states = Vec::with_capacity(hold_times.len());
                let mut current = after_p1;
                let mut t_prev = 0.0;
                for &t_h in hold_times {
                    current = solver.propagate_final(&current, None, (t_prev, t_h), dt)?;
                    t_prev = t_h;
                    states.push(current.clone());
                }
                states
            }
            Pulse2Inputs::IdealEquator => {
                let n_h = hold_times.len();
                (0..n_h)
                    .map(|h| {
                        let theta = 2.0 * PI * h as f64 / n_h as f64;
                        let amps = basis[0]
                            .amplitudes()
                            .iter()
                            .zip(basis[1].amplitudes())
                            .map(|(a, b)| {
                                (a + b * num_complex::Complex64::from_polar(1.0, theta))
                                    / 2.0f64.sqrt()
                            })
                            .collect();
                        let mut psi = Wavefunction::new(basis[0].grid().clone(), amps)?;
                        psi.normalize();
                        Ok(psi)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Self {
            solver,
            basis,
            inputs,
            dt,
        })
    }

    /// Populations (p0, p1) after applying `w` to every held input.
    pub fn populations(&self, w: &ControlWaveform) -> Result<Vec<(f64, f64)>> {
        self.inputs
            .par_iter()
            .map(|input| {
                let out =
                    self.solver
                        .propagate_final(input, Some(w), (0.0, w.duration()), self.dt)?;
                let pr = out.project_populations(&self.basis)?;
                Ok((pr.populations[0], pr.populations[1]))
            })
            .collect()
    }

    pub fn evaluate(&self, w: &ControlWaveform) -> Result<f64> {
        cost_pulse2(&self.populations(w)?)
    }

    pub fn inputs(&self) -> &[Wavefunction] {
        &self.inputs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;
    use crate::wavefunction::Wavefunction;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_complex::Complex64 as C64;

    fn two_modes() -> (Wavefunction, Wavefunction) {
        let g = SpatialGrid::new(-4.0, 4.0, 256).unwrap();
        (
            Wavefunction::gaussian(g.clone(), -1.5, 0.2).unwrap(),
            Wavefunction::gaussian(g, 1.5, 0.2).unwrap(),
        )
    }

    #[test]
    fn pulse1_cost_perfect_transfer() {
        let (b0, b1) = two_modes();
        let target = Pulse1Context::balanced_target(&b0, &b1).unwrap();
        assert_abs_diff_eq!(cost_pulse1(&target, &target).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pulse1_cost_half_overlap() {
        let (b0, b1) = two_modes();
        let target = Pulse1Context::balanced_target(&b0, &b1).unwrap();
        // psi = |0>: overlap 1/sqrt(2), cost 1 - 1/2
        assert_relative_eq!(cost_pulse1(&b0, &target).unwrap(), 0.5, epsilon = 1e-9);
    }

    /// The real-part form is global-phase sensitive: e^{i pi/2} * target
    /// has zero real overlap and cost 1.
    #[test]
    fn pulse1_cost_global_phase_sensitivity() {
        let (b0, b1) = two_modes();
        let target = Pulse1Context::balanced_target(&b0, &b1).unwrap();
        let mut rotated = target.clone();
        for a in rotated.amplitudes_mut() {
            *a *= C64::i();
        }
        assert_relative_eq!(cost_pulse1(&rotated, &target).unwrap(), 1.0, epsilon = 1e-12);
        // while the modulus form is insensitive
        assert_abs_diff_eq!(
            cost_pulse1_modulus(&rotated, &target).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn pulse1_cost_rejects_grid_mismatch() {
        let g1 = SpatialGrid::new(-4.0, 4.0, 256).unwrap();
        let g2 = SpatialGrid::new(-4.0, 4.0, 128).unwrap();
        let a = Wavefunction::gaussian(g1, 0.0, 0.3).unwrap();
        let b = Wavefunction::gaussian(g2, 0.0, 0.3).unwrap();
        assert!(matches!(cost_pulse1(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn pulse2_cost_ideal_rotation() {
        // p0 sweeps the full range [0, 1], p1 mirrors it, no leakage
        let pops: Vec<(f64, f64)> = (0..15)
            .map(|h| {
                let x = 0.5 + 0.5 * (PI * h as f64 / 7.0).cos();
                (x, 1.0 - x)
            })
            .collect();
        let c = cost_pulse2(&pops).unwrap();
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pulse2_cost_identity_pulse() {
        let pops = vec![(0.5, 0.5); 15];
        assert_relative_eq!(cost_pulse2(&pops).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn pulse2_cost_full_leakage() {
        let pops = vec![(0.0, 0.0); 15];
        assert_relative_eq!(cost_pulse2(&pops).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn pulse2_cost_rejects_empty_and_bad() {
        assert!(cost_pulse2(&[]).is_err());
        assert!(cost_pulse2(&[(1.2, 0.0)]).is_err());
    }

    #[test]
    fn pulse2_cost_invariant_under_permutation_and_duplication() {
        let pops = vec![(0.9, 0.05), (0.3, 0.65), (0.55, 0.40)];
        let c = cost_pulse2(&pops).unwrap();
        let mut rev = pops.clone();
        rev.reverse();
        assert_eq!(c, cost_pulse2(&rev).unwrap());
        let doubled: Vec<_> = pops.iter().chain(&pops).copied().collect();
        assert_eq!(c, cost_pulse2(&doubled).unwrap());
    }

    #[test]
    fn optimize_quadratic_bowl() {
        // custom 2-parameter problem (1 component): cost from coefficients
        let problem = OptimizationProblem {
            budget: 500,
            restarts: 1,
            ..OptimizationProblem::new(CostKind::Custom, 1.0, 1)
        };
        let (a, b) = (0.12, -0.8);
        let (w, trace) = optimize(&problem, |w: &ControlWaveform| {
            Ok((w.amplitudes()[0] - a).powi(2) + (w.phases()[0] - b).powi(2))
        })
        .unwrap();
        assert!(trace.final_cost < 1e-6, "cost = {}", trace.final_cost);
        assert!((w.amplitudes()[0] - a).abs() < 1e-3);
        assert!((w.phases()[0] - b).abs() < 1e-3);
        assert!(trace.converged);
    }

    #[test]
    fn optimize_rosenbrock_with_restarts() {
        let problem = OptimizationProblem {
            budget: 6000,
            restarts: 4,
            amp_step: 0.3,
            phase_step: 0.3,
            ..OptimizationProblem::new(CostKind::Custom, 1.0, 1)
        };
        let (_, trace) = optimize(&problem, |w: &ControlWaveform| {
            let (x, y) = (w.amplitudes()[0], w.phases()[0]);
            Ok((1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2))
        })
        .unwrap();
        assert!(trace.final_cost < 1e-3, "cost = {}", trace.final_cost);
    }

    #[test]
    fn trace_best_is_monotone_and_matches_min() {
        let problem = OptimizationProblem {
            budget: 300,
            restarts: 2,
            ..OptimizationProblem::new(CostKind::Custom, 1.0, 2)
        };
        let (_, trace) = optimize(&problem, |w: &ControlWaveform| {
            Ok(w.amplitudes().iter().map(|a| a * a).sum::<f64>()
                + w.phases().iter().map(|p| (p - 0.3).powi(2)).sum::<f64>())
        })
        .unwrap();
        let mut best = f64::INFINITY;
        for r in &trace.records {
            best = best.min(r.cost);
            assert_eq!(r.best, best);
        }
        assert_eq!(trace.final_cost, best);
    }

    #[test]
    fn optimize_is_seed_reproducible() {
        let mk = || {
            let problem = OptimizationProblem {
                budget: 400,
                restarts: 3,
                seed: 99,
                ..OptimizationProblem::new(CostKind::Custom, 1.0, 2)
            };
            optimize(&problem, |w: &ControlWaveform| {
                Ok((w.amplitudes()[0] - 0.2).powi(2)
                    + (w.amplitudes()[1] + 0.1).powi(2)
                    + w.phases().iter().map(|p| p.sin().powi(2)).sum::<f64>())
            })
            .unwrap()
        };
        let (w1, t1) = mk();
        let (w2, t2) = mk();
        assert_eq!(w1, w2);
        assert_eq!(t1.records.len(), t2.records.len());
        for (a, b) in t1.records.iter().zip(&t2.records) {
            assert_eq!(a.cost, b.cost);
        }
    }

    #[test]
    fn zero_budget_returns_initial() {
        let problem = OptimizationProblem {
            budget: 1,
            restarts: 1,
            ..OptimizationProblem::new(CostKind::Custom, 1.0, 2)
        };
        let (w, trace) = optimize(&problem, |_w: &ControlWaveform| Ok(7.0)).unwrap();
        assert!(!trace.converged);
        assert_eq!(trace.final_cost, 7.0);
        assert!(w.amplitudes().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn penalty_activates_only_beyond_bound() {
        let problem = OptimizationProblem {
            penalty_weight: 100.0,
            budget: 1,
            ..OptimizationProblem::new(CostKind::Custom, 1.0, 1)
        };
        // compliant waveform: cost equals raw cost
        let w_ok = ControlWaveform::new_unbounded(
            1.0,
            vec![0.2],
            vec![0.0],
            problem.lambda_max,
            problem.envelope,
        )
        .unwrap();
        assert_eq!(w_ok.bound_excess(), 0.0);
        let w_bad = ControlWaveform::new_unbounded(
            1.0,
            vec![1.8],
            vec![0.0],
            problem.lambda_max,
            problem.envelope,
        )
        .unwrap();
        assert!(w_bad.bound_excess() > 0.0);
    }

    #[test]
    fn callback_errors_bubble_up() {
        let problem = OptimizationProblem {
            budget: 100,
            ..OptimizationProblem::new(CostKind::Custom, 1.0, 1)
        };
        let r = optimize(&problem, |_w: &ControlWaveform| {
            Err(Error::EmptyInput("synthetic failure"))
        });
        assert!(matches!(r, Err(Error::EmptyInput(_))));
    }
}
