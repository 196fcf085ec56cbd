//! Command-line front end binding the simulation modules into
//! reproducible, config-driven runs.

mod config;
mod report;

use clap::{Parser, Subcommand, ValueEnum};
use config::RunConfig;
use motional::control::ControlWaveform;
use motional::crab::{
    optimize, scan_seed, CostKind, OptimizationProblem, Pulse1Context, Pulse2Context,
};
use motional::error::Error;
use motional::estimation::{
    fit_populations, simulate_observation, FitOpts, MomentumTimeSeries, ObservationOpts,
    TofScaling,
};
use motional::gpe::{calibrate_nonlinearity, GpeSolver, PropagationOpts, StationaryOpts};
use motional::ramsey::{run_ramsey, RamseyOpts, RamseySpec};
use motional::twomode::{
    binomial_delta_jz, overlap_integrals, phase_diffusion_rate, TwoModeConstants,
};
use motional::SuperpositionParams;
use report::{atomic_write, Table};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Process exit codes: 0 success, 1 usage or configuration error,
/// 2 numerical failure, 3 budget exhausted but artifacts usable.
const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "motional",
    about = "Simulation and optimal control of transverse motional states of a quasi-1D condensate",
    version
)]
struct Cli {
    /// Configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for generated files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Override the configured optimizer evaluation budget.
    #[arg(long, global = true)]
    budget: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WhichPulse {
    Pulse1,
    Pulse2,
}

#[derive(Subcommand)]
enum Command {
    /// Write the documented default configuration and exit.
    InitConfig {
        /// Destination path (stdout when omitted).
        path: Option<PathBuf>,
    },
    /// Solve the stationary spectrum for g_n = 0 and the configured g_n.
    Spectrum,
    /// Solve the nonlinearity g_n that reaches the configured chemical
    /// potential target.
    Calibrate,
    /// Optimize a control pulse and write waveform + trace files.
    Optimize {
        #[arg(long, value_enum)]
        which: WhichPulse,
        /// First-pulse waveform file (required for pulse2).
        #[arg(long)]
        pulse1: Option<PathBuf>,
    },
    /// Run the full two-pulse sequence over the hold-time scan.
    Ramsey {
        #[arg(long)]
        pulse1: PathBuf,
        #[arg(long)]
        pulse2: PathBuf,
    },
    /// Fit mode populations and phases to an observed momentum-density
    /// series (CSV).
    Fit {
        #[arg(long)]
        observed: PathBuf,
    },
    /// Simulate an observed momentum-density series for given occupations
    /// (forward model of `fit`).
    Observe {
        /// Occupations p0,p1,p2 (comma separated).
        #[arg(long, default_value = "0.5,0.5,0.0")]
        occupations: String,
        /// Relative phases theta01,theta12 in rad.
        #[arg(long, default_value = "0.0,0.0")]
        phases: String,
    },
    /// Evaluate the two-mode constants and the phase-diffusion rate.
    Twomode,
    /// Chain spectrum, calibration, both pulse optimizations, the
    /// interferometer and the two-mode constants; print a summary table
    /// against the reference targets.
    Reproduce,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let mut cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(budget) = cli.budget {
        cfg.optimizer.budget = budget;
    }

    match run(&cli, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Parse { .. } | Error::InvalidInput(_) | Error::EmptyInput(_) => EXIT_USAGE,
                Error::Io(_) => EXIT_USAGE,
                _ => EXIT_NUMERICAL,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli, cfg: &RunConfig) -> motional::Result<ExitCode> {
    match &cli.command {
        Command::InitConfig { path } => {
            match path {
                Some(p) => atomic_write(p, RunConfig::default_text().as_bytes())?,
                None => print!("{}", RunConfig::default_text()),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum => cmd_spectrum(cli, cfg),
        Command::Calibrate => cmd_calibrate(cli, cfg).map(|_| ExitCode::SUCCESS),
        Command::Optimize { which, pulse1 } => cmd_optimize(cli, cfg, *which, pulse1.as_deref()),
        Command::Ramsey { pulse1, pulse2 } => cmd_ramsey(cli, cfg, pulse1, pulse2),
        Command::Fit { observed } => cmd_fit(cli, cfg, observed),
        Command::Observe {
            occupations,
            phases,
        } => cmd_observe(cli, cfg, occupations, phases),
        Command::Twomode => cmd_twomode(cli, cfg),
        Command::Reproduce => cmd_reproduce(cli, cfg),
    }
}

fn ensure_out_dir(cli: &Cli) -> motional::Result<()> {
    std::fs::create_dir_all(&cli.out_dir)?;
    Ok(())
}

fn stationary_opts() -> StationaryOpts {
    StationaryOpts::default()
}

fn cmd_spectrum(cli: &Cli, cfg: &RunConfig) -> motional::Result<ExitCode> {
    ensure_out_dir(cli)?;
    let grid = cfg.build_grid()?;
    let params0 = cfg.gpe_params()?.with_g_n(0.0)?;
    let solver0 = GpeSolver::new(grid.clone(), params0)?;
    let set0 = solver0.solve_stationary(3, &stationary_opts())?;

    let mut out = String::new();
    out.push_str("# stationary spectrum (kHz as E/h)\n");
    out.push_str("g_n_khz_um = 0\n");
    for (k, mu) in set0.mus.iter().enumerate() {
        out.push_str(&format!("mu{k} = {mu:.6}\n"));
    }
    out.push_str(&format!("e01 = {:.6}\ne12 = {:.6}\n", set0.e01(), set0.e12()));

    let g_n = cfg.gpe.g_n_khz_um;
    if g_n > 0.0 {
        let solver = GpeSolver::new(grid.clone(), cfg.gpe_params()?)?;
        let set = solver.solve_stationary(3, &stationary_opts())?;
        let (_, dev) = set.orthonormal_basis()?;
        out.push_str(&format!("\ng_n_khz_um = {g_n}\n"));
        for (k, mu) in set.mus.iter().enumerate() {
            out.push_str(&format!("mu{k} = {mu:.6}\n"));
        }
        out.push_str(&format!("e01 = {:.6}\ne12 = {:.6}\n", set.e01(), set.e12()));
        out.push_str(&format!("basis_orthonormality_deviation = {dev:.3e}\n"));
        for (k, state) in set.states.iter().enumerate() {
            let mut buf = Vec::new();
            state.write_text(&mut buf)?;
            atomic_write(&cli.out_dir.join(format!("phi{k}.txt")), &buf)?;
            let mut bin = Vec::new();
            state.write_binary(&mut bin)?;
            atomic_write(&cli.out_dir.join(format!("phi{k}.wf")), &bin)?;
        }
    }
    print!("{out}");
    atomic_write(&cli.out_dir.join("spectrum.txt"), out.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_calibrate(cli: &Cli, cfg: &RunConfig) -> motional::Result<f64> {
    ensure_out_dir(cli)?;
    let grid = cfg.build_grid()?;
    let base = cfg.gpe_params()?.with_g_n(0.0)?;
    let solver0 = GpeSolver::new(grid.clone(), base.clone())?;
    let mu0 = solver0.solve_stationary(1, &stationary_opts())?.mus[0];
    let target_abs = if cfg.gpe.calibrate_absolute {
        cfg.gpe.calibrate_mu_target_khz
    } else {
        // quasi-1D convention: the quoted chemical potential is measured
        // from the single-particle ground level
        mu0 + cfg.gpe.calibrate_mu_target_khz
    };
    let g_n = calibrate_nonlinearity(&grid, &base, target_abs, 1e-3)?;
    let solver = GpeSolver::new(grid, base.with_g_n(g_n)?)?;
    let mu = solver.solve_stationary(1, &stationary_opts())?.mus[0];
    let mut out = String::new();
    out.push_str(&format!("mu_noninteracting_khz = {mu0:.6}\n"));
    out.push_str(&format!("target_mu_khz = {target_abs:.6}\n"));
    out.push_str(&format!("g_n_khz_um = {g_n:.9}\n"));
    out.push_str(&format!("mu_khz = {mu:.6}\n"));
    out.push_str(&format!("mu_shift_khz = {:.6}\n", mu - mu0));
    print!("{out}");
    atomic_write(&cli.out_dir.join("calibration.txt"), out.as_bytes())?;
    Ok(g_n)
}

struct PulseProblem {
    problem: OptimizationProblem,
    resonance_khz: f64,
}

fn pulse_problem(cfg: &RunConfig, which: WhichPulse, resonance_khz: f64) -> PulseProblem {
    let (kind, duration, seed_offset) = match which {
        WhichPulse::Pulse1 => (CostKind::Pulse1, cfg.control.pulse1_duration_ms, 0),
        WhichPulse::Pulse2 => (CostKind::Pulse2, cfg.control.pulse2_duration_ms, 1),
    };
    let mut problem = OptimizationProblem::new(kind, duration, cfg.control.n_components);
    problem.lambda_max = cfg.control.lambda_max_um;
    problem.envelope = cfg.envelope();
    problem.penalty_weight = cfg.optimizer.penalty_weight;
    problem.budget = cfg.optimizer.budget;
    problem.restarts = cfg.optimizer.restarts;
    problem.seed = cfg.seed.wrapping_add(seed_offset);
    problem.block_size = cfg.optimizer.block_size;
    problem.amp_step = cfg.optimizer.amp_step_um;
    problem.phase_step = cfg.optimizer.phase_step_rad;
    PulseProblem {
        problem,
        resonance_khz,
    }
}

fn cmd_optimize(
    cli: &Cli,
    cfg: &RunConfig,
    which: WhichPulse,
    pulse1_path: Option<&Path>,
) -> motional::Result<ExitCode> {
    ensure_out_dir(cli)?;
    let grid = cfg.build_grid()?;
    let params = cfg.gpe_params()?;
    let solver = GpeSolver::new(grid.clone(), params.clone())?;
    let set = solver.solve_stationary(3, &stationary_opts())?;
    let (basis, _) = set.orthonormal_basis()?;
    let resonance = set.mus[1] - set.mus[0];
    let dt = cfg.gpe.dt_ms;

    let (name, waveform, trace) = match which {
        WhichPulse::Pulse1 => {
            let target = Pulse1Context::balanced_target(&basis[0], &basis[1])?;
            let ctx =
                Pulse1Context::new(solver, set.states[0].clone(), target, dt)?;
            let mut pp = pulse_problem(cfg, which, resonance);
            let seed_w = scan_seed(&pp.problem, pp.resonance_khz, |w| ctx.evaluate(w))?;
            pp.problem.initial = Some(seed_w);
            let (w, trace) = optimize(&pp.problem, |w| ctx.evaluate(w))?;
            ("pulse1", w, trace)
        }
        WhichPulse::Pulse2 => {
            let p1_path = pulse1_path.ok_or_else(|| {
                Error::InvalidInput(
                    "optimizing pulse2 needs --pulse1 <waveform file>".into(),
                )
            })?;
            let pulse1 = ControlWaveform::load_text(p1_path)?;
            let beat = 1.0 / resonance;
            let n_h = cfg.optimizer.n_hold_times;
            let holds: Vec<f64> = (0..n_h)
                .map(|h| 1e-4 + h as f64 * beat / n_h as f64)
                .collect();
            let ctx = Pulse2Context::prepare(
                solver,
                &pulse1,
                &holds,
                basis,
                cfg.optimizer.pulse2_inputs,
                dt,
            )?;
            let mut pp = pulse_problem(cfg, which, resonance);
            let seed_w = scan_seed(&pp.problem, pp.resonance_khz, |w| ctx.evaluate(w))?;
            pp.problem.initial = Some(seed_w);
            let (w, trace) = optimize(&pp.problem, |w| ctx.evaluate(w))?;
            ("pulse2", w, trace)
        }
    };

    let mut wave_text = Vec::new();
    waveform.write_text(&mut wave_text)?;
    atomic_write(&cli.out_dir.join(format!("{name}.wave")), &wave_text)?;
    let mut trace_csv = Vec::new();
    trace.write_csv(&mut trace_csv)?;
    atomic_write(&cli.out_dir.join(format!("{name}_trace.csv")), &trace_csv)?;

    // trajectory of the optimized pulse, for inspection and plotting
    if let WhichPulse::Pulse1 = which {
        let solver = GpeSolver::new(grid, params)?;
        let set = solver.solve_stationary(3, &stationary_opts())?;
        let (basis, _) = set.orthonormal_basis()?;
        let traj = solver.propagate(
            &set.states[0],
            Some(&waveform),
            (0.0, waveform.duration()),
            &PropagationOpts::with_stride(dt, 0.05),
        )?;
        let mut csv = Vec::new();
        traj.write_csv_summary(&basis, &mut csv)?;
        atomic_write(&cli.out_dir.join("pulse1_trajectory.csv"), &csv)?;
        let mut bin = Vec::new();
        traj.write_binary(&mut bin)?;
        atomic_write(&cli.out_dir.join("pulse1_trajectory.bin"), &bin)?;
    }

    println!(
        "{name}: cost = {:.6}, evaluations = {}, converged = {}, max|lambda| = {:.4} um",
        trace.final_cost,
        trace.records.len(),
        trace.converged,
        waveform.max_abs()
    );
    if trace.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(EXIT_BUDGET))
    }
}

fn cmd_ramsey(
    cli: &Cli,
    cfg: &RunConfig,
    pulse1: &Path,
    pulse2: &Path,
) -> motional::Result<ExitCode> {
    ensure_out_dir(cli)?;
    for p in [pulse1, pulse2] {
        if !p.exists() {
            return Err(Error::InvalidInput(format!(
                "waveform file not found: {}",
                p.display()
            )));
        }
    }
    let spec = RamseySpec {
        pulse1: ControlWaveform::load_text(pulse1)?,
        pulse2: ControlWaveform::load_text(pulse2)?,
        hold_times: cfg.hold_times(),
        params: cfg.gpe_params()?,
    };
    let grid = cfg.build_grid()?;
    let opts = RamseyOpts {
        dt: cfg.gpe.dt_ms,
        stationary: stationary_opts(),
    };
    let fringe = run_ramsey(&spec, &grid, &opts)?;
    let mut csv = Vec::new();
    fringe.write_csv(&mut csv)?;
    atomic_write(&cli.out_dir.join("fringe.csv"), &csv)?;

    let c0 = fringe.contrast_p0()?;
    let c1 = fringe.contrast_p1()?;
    let mut out = String::new();
    out.push_str(&format!("contrast_p0 = {c0:.6}\n"));
    out.push_str(&format!("contrast_p1 = {c1:.6}\n"));
    let max_out = fringe
        .rows
        .iter()
        .map(|r| r.outside_two_level())
        .fold(0.0f64, f64::max);
    out.push_str(&format!("max_population_outside_two_level = {max_out:.6}\n"));
    if cfg.ramsey.fit_fringe {
        match fringe.period_fit() {
            Ok(fit) => {
                out.push_str(&format!("fringe_period_ms = {:.6}\n", fit.period));
                let mut rep = Vec::new();
                fit.write_report(&mut rep)?;
                atomic_write(&cli.out_dir.join("fringe_fit.txt"), &rep)?;
            }
            Err(e) => out.push_str(&format!("fringe_period_ms = unavailable ({e})\n")),
        }
    }
    for (t, msg) in &fringe.failures {
        out.push_str(&format!("failed_hold_time_ms = {t} ({msg})\n"));
    }
    print!("{out}");
    atomic_write(&cli.out_dir.join("ramsey.txt"), out.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn estimation_context(
    cfg: &RunConfig,
) -> motional::Result<(GpeSolver, Vec<motional::Wavefunction>, TofScaling)> {
    let grid = cfg.build_grid()?;
    let params = cfg.gpe_params()?;
    let solver = GpeSolver::new(grid, params)?;
    let set = solver.solve_stationary(3, &stationary_opts())?;
    let (basis, _) = set.orthonormal_basis()?;
    let scaling = TofScaling::new(
        cfg.estimation.t_tof_ms,
        cfg.gpe.mass_kg,
        cfg.estimation.blur_sigma_um,
    )?;
    Ok((solver, basis, scaling))
}

fn cmd_fit(cli: &Cli, cfg: &RunConfig, observed: &Path) -> motional::Result<ExitCode> {
    ensure_out_dir(cli)?;
    let file = std::fs::File::open(observed).map_err(|e| {
        Error::InvalidInput(format!("cannot open {}: {e}", observed.display()))
    })?;
    let series = MomentumTimeSeries::read_csv(file)?;
    let (solver, basis, scaling) = estimation_context(cfg)?;
    let fit = fit_populations(
        &series,
        &basis,
        &solver,
        &scaling,
        &FitOpts {
            restarts: cfg.estimation.fit_restarts,
            max_evals_per_restart: cfg.estimation.fit_max_evals,
            seed: cfg.seed,
            fit_time_offset: cfg.estimation.fit_time_offset,
            dt: cfg.gpe.dt_ms,
        },
    )?;
    let mut out = Vec::new();
    fit.write_report(&mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    atomic_write(&cli.out_dir.join("population_fit.txt"), &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_observe(
    cli: &Cli,
    cfg: &RunConfig,
    occupations: &str,
    phases: &str,
) -> motional::Result<ExitCode> {
    ensure_out_dir(cli)?;
    let parse3 = |s: &str| -> motional::Result<Vec<f64>> {
        s.split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|e| Error::InvalidInput(format!("bad number `{v}`: {e}")))
            })
            .collect()
    };
    let p = parse3(occupations)?;
    let th = parse3(phases)?;
    if p.len() != 3 || th.len() != 2 {
        return Err(Error::InvalidInput(
            "need three occupations and two phases".into(),
        ));
    }
    let init = SuperpositionParams::new([p[0], p[1], p[2]], th[0], th[1])?;
    let (solver, basis, scaling) = estimation_context(cfg)?;
    let series = simulate_observation(
        &init,
        &basis,
        &solver,
        cfg.estimation.duration_ms,
        &scaling,
        &ObservationOpts {
            sample_dt: cfg.estimation.sample_dt_ms,
            dt: cfg.gpe.dt_ms,
        },
    )?;
    let mut csv = Vec::new();
    series.write_csv(&mut csv)?;
    atomic_write(&cli.out_dir.join("observed.csv"), &csv)?;
    println!(
        "wrote {} time samples x {} wavenumbers to {}",
        series.times().len(),
        series.k().len(),
        cli.out_dir.join("observed.csv").display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_twomode(cli: &Cli, cfg: &RunConfig) -> motional::Result<ExitCode> {
    ensure_out_dir(cli)?;
    let grid = cfg.build_grid()?;
    // the two-mode reduction uses the non-interacting mode functions
    let params0 = cfg.gpe_params()?.with_g_n(0.0)?;
    let solver = GpeSolver::new(grid, params0)?;
    let set = solver.solve_stationary(2, &stationary_opts())?;
    let n = cfg.twomode.n_atoms;
    let g_1d = cfg.gpe.g_n_khz_um / n as f64;
    let (u00, u11, u01) = overlap_integrals(&set.states[0], &set.states[1], g_1d)?;
    let constants = TwoModeConstants::new(set.e01(), u00, u11, u01, n)?;
    let delta_jz = cfg.twomode.delta_jz.unwrap_or_else(|| binomial_delta_jz(n));
    let rate = phase_diffusion_rate(&constants, delta_jz)?;

    let mut out = Vec::new();
    constants.write_report(&mut out)?;
    let mut text = String::from_utf8_lossy(&out).into_owned();
    text.push_str(&format!("delta_jz = {delta_jz:.6}\n"));
    text.push_str(&format!("phase_diffusion_rate_mrad_per_ms = {rate:.4}\n"));
    print!("{text}");
    atomic_write(&cli.out_dir.join("twomode.txt"), text.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_reproduce(cli: &Cli, cfg: &RunConfig) -> motional::Result<ExitCode> {
    ensure_out_dir(cli)?;
    let mut table = Table::new();
    let grid = cfg.build_grid()?;
    let dt = cfg.gpe.dt_ms;

    // 1. single-particle spectra
    let params0 = cfg.gpe_params()?.with_g_n(0.0)?;
    let solver0 = GpeSolver::new(grid.clone(), params0.clone())?;
    let set0 = solver0.solve_stationary(3, &stationary_opts())?;
    table.row_rel("E01, transverse trap (kHz)", set0.e01(), 1.83, 0.01);
    table.row_rel("E12, transverse trap (kHz)", set0.e12(), 1.98, 0.01);

    let z_params = motional::GpeParams::new(
        cfg.gpe.mass_kg,
        cfg.gpe.atom_number,
        0.0,
        motional::PotentialSpec::quartic_z(),
    )?;
    let solver_z = GpeSolver::new(grid.clone(), z_params)?;
    let set_z = solver_z.solve_stationary(2, &stationary_opts())?;
    table.row_rel("E01, vertical trap (kHz)", set_z.e01(), 2.58, 0.01);

    // 2. interaction calibration
    let g_n_cal = cmd_calibrate(cli, cfg)?;
    let solver_cal = GpeSolver::new(grid.clone(), params0.with_g_n(g_n_cal)?)?;
    let mu_shift = solver_cal.solve_stationary(1, &stationary_opts())?.mus[0] - set0.mus[0];
    table.row_abs(
        "calibrated mu shift (kHz)",
        mu_shift,
        cfg.gpe.calibrate_mu_target_khz,
        0.001,
    );
    let beat_cal = beat_period(&solver_cal, dt)?;
    table.row_rel("beat period at calibrated g_n (ms)", beat_cal, 0.58, 0.02);

    // 3. pulse optimizations at the pinned g_n
    let params = cfg.gpe_params()?;
    let solver = GpeSolver::new(grid.clone(), params.clone())?;
    let set = solver.solve_stationary(3, &stationary_opts())?;
    let (basis, _) = set.orthonormal_basis()?;
    let resonance = set.mus[1] - set.mus[0];

    let target = Pulse1Context::balanced_target(&basis[0], &basis[1])?;
    let ctx1 = Pulse1Context::new(
        GpeSolver::new(grid.clone(), params.clone())?,
        set.states[0].clone(),
        target,
        dt,
    )?;
    let mut pp1 = pulse_problem(cfg, WhichPulse::Pulse1, resonance);
    pp1.problem.initial = Some(scan_seed(&pp1.problem, resonance, |w| ctx1.evaluate(w))?);
    let (w1, trace1) = optimize(&pp1.problem, |w| ctx1.evaluate(w))?;
    table.row_max("pulse-1 cost", trace1.final_cost, 0.03);
    let mut buf = Vec::new();
    w1.write_text(&mut buf)?;
    atomic_write(&cli.out_dir.join("pulse1.wave"), &buf)?;

    let beat = 1.0 / resonance;
    let holds: Vec<f64> = (0..cfg.optimizer.n_hold_times)
        .map(|h| 1e-4 + h as f64 * beat / cfg.optimizer.n_hold_times as f64)
        .collect();
    let ctx2 = Pulse2Context::prepare(
        GpeSolver::new(grid.clone(), params.clone())?,
        &w1,
        &holds,
        basis.clone(),
        cfg.optimizer.pulse2_inputs,
        dt,
    )?;
    let mut pp2 = pulse_problem(cfg, WhichPulse::Pulse2, resonance);
    pp2.problem.initial = Some(scan_seed(&pp2.problem, resonance, |w| ctx2.evaluate(w))?);
    let (w2, trace2) = optimize(&pp2.problem, |w| ctx2.evaluate(w))?;
    table.row_max("pulse-2 cost", trace2.final_cost, 0.35);
    let mut buf = Vec::new();
    w2.write_text(&mut buf)?;
    atomic_write(&cli.out_dir.join("pulse2.wave"), &buf)?;

    // 4. full interferometer
    let spec = RamseySpec {
        pulse1: w1,
        pulse2: w2,
        hold_times: cfg.hold_times(),
        params: params.clone(),
    };
    let opts = RamseyOpts {
        dt,
        stationary: stationary_opts(),
    };
    let fringe = run_ramsey(&spec, &grid, &opts)?;
    let mut csv = Vec::new();
    fringe.write_csv(&mut csv)?;
    atomic_write(&cli.out_dir.join("fringe.csv"), &csv)?;
    table.row_min("fringe contrast C(p0)", fringe.contrast_p0()?, 0.95);
    table.row_min("fringe contrast C(p1)", fringe.contrast_p1()?, 0.95);
    let max_out = fringe
        .rows
        .iter()
        .map(|r| r.outside_two_level())
        .fold(0.0f64, f64::max);
    table.row_max("max population outside {0,1}", max_out, 0.15);
    match fringe.period_fit() {
        Ok(fit) => table.row_abs("fringe period (ms)", fit.period, 0.58, 0.01),
        Err(_) => table.row_text("fringe period (ms)", "fit failed"),
    }

    // 5. two-mode constants at the pinned g_n
    let set_modes = solver0.solve_stationary(2, &stationary_opts())?;
    let n = cfg.twomode.n_atoms;
    let g_1d = cfg.gpe.g_n_khz_um / n as f64;
    let (u00, u11, u01) = overlap_integrals(&set_modes.states[0], &set_modes.states[1], g_1d)?;
    let constants = TwoModeConstants::new(set_modes.e01(), u00, u11, u01, n)?;
    table.row_rel("U00/h (Hz)", u00, 0.34, 0.10);
    table.row_rel("U11/h (Hz)", u11, 0.26, 0.10);
    table.row_rel("U01/h (Hz)", u01, 0.15, 0.10);
    table.row_rel("U/h (Hz)", constants.u_hz, 0.31, 0.10);
    let rate = phase_diffusion_rate(&constants, binomial_delta_jz(n))?;
    table.row_rel("phase-diffusion rate (mrad/ms)", rate, 52.0, 0.10);

    let mut rendered = table.render();
    rendered.push_str(&format!(
        "\nall targets reproduced: {}\n",
        if table.all_passed() { "yes" } else { "no" }
    ));
    print!("{rendered}");
    atomic_write(&cli.out_dir.join("summary.txt"), rendered.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

/// Relative-phase beat period of the balanced superposition in the static
/// trap, from the fitted phase drift over two periods.
fn beat_period(solver: &GpeSolver, dt: f64) -> motional::Result<f64> {
    let set = solver.solve_stationary(2, &stationary_opts())?;
    let (basis, _) = set.orthonormal_basis()?;
    let psi0 = {
        let amps = basis[0]
            .amplitudes()
            .iter()
            .zip(basis[1].amplitudes())
            .map(|(a, b)| (a + b) / 2.0f64.sqrt())
            .collect();
        let mut psi = motional::Wavefunction::new(basis[0].grid().clone(), amps)?;
        psi.normalize();
        psi
    };
    let traj = solver.propagate(
        &psi0,
        None,
        (0.0, 1.2),
        &PropagationOpts::with_stride(dt, 0.02),
    )?;
    let mut phases = Vec::new();
    let mut times = Vec::new();
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let a0 = basis[0].inner(state)?;
        let a1 = basis[1].inner(state)?;
        phases.push((a1 / a0).arg());
        times.push(*t);
    }
    // unwrap and fit a straight line
    for i in 1..phases.len() {
        while phases[i] - phases[i - 1] > std::f64::consts::PI {
            phases[i] -= 2.0 * std::f64::consts::PI;
        }
        while phases[i] - phases[i - 1] < -std::f64::consts::PI {
            phases[i] += 2.0 * std::f64::consts::PI;
        }
    }
    let n = times.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let pm = phases.iter().sum::<f64>() / n;
    let slope: f64 = times
        .iter()
        .zip(&phases)
        .map(|(&t, &p)| (t - tm) * (p - pm))
        .sum::<f64>()
        / times.iter().map(|&t| (t - tm) * (t - tm)).sum::<f64>();
    Ok(2.0 * std::f64::consts::PI / slope.abs())
}
