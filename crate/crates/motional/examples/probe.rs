//! Scratch probe for tuning optimization budgets (not part of the test suite).

use motional::crab::{optimize, scan_seed, CostKind, OptimizationProblem, Pulse1Context, Pulse2Context, Pulse2Inputs};
use motional::gpe::{GpeParams, GpeSolver, StationaryOpts};
use motional::potential::PotentialSpec;
use motional::ramsey::{run_ramsey, RamseyOpts, RamseySpec};
use motional::units::MASS_RB87;
use motional::SpatialGrid;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let args: Vec<String> = std::env::args().collect();
    let stage = args.get(1).map(String::as_str).unwrap_or("all");
    let n_grid: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(256);
    let budget1: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(4000);
    let budget2: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(2000);

    let grid = SpatialGrid::new(-2.0, 2.0, n_grid).unwrap();
    let dt = 1e-3;

    // --- stage 0: spectrum + integrals ---
    let params0 = GpeParams::new(MASS_RB87, 700, 0.0, PotentialSpec::sextic_y()).unwrap();
    let solver0 = GpeSolver::new(grid.clone(), params0.clone()).unwrap();
    let set0 = solver0.solve_stationary(3, &StationaryOpts::default()).unwrap();
    println!(
        "[{:.1?}] gN=0: mu = {:?}, E01 = {:.6}, E12 = {:.6}",
        t0.elapsed(),
        set0.mus,
        set0.e01(),
        set0.e12()
    );
    let (u00_1, u11_1, u01_1) =
        motional::twomode::overlap_integrals(&set0.states[0], &set0.states[1], 1.0).unwrap();
    println!(
        "integrals at g1d = 1 kHz um: I00*500 = {u00_1:.4}, ratios {:.4} {:.4}",
        u11_1 / u00_1,
        u01_1 / u00_1
    );
    // gN bands for U00 in 0.34 +- 10% etc., with g1d = gN/700 (u_1 in Hz at g1d = 1)
    let band = |target: f64, u_at_1: f64| {
        let lo = 0.9 * target / u_at_1 * 700.0 / 1000.0;
        let hi = 1.1 * target / u_at_1 * 700.0 / 1000.0;
        (lo * 1000.0, hi * 1000.0)
    };
    println!(
        "gN bands (kHz um x1e-3): U00 {:?}, U11 {:?}, U01 {:?}",
        band(0.34, u00_1),
        band(0.26, u11_1),
        band(0.15, u01_1)
    );

    if stage == "spectrum" {
        return;
    }

    // --- pinned interacting system ---
    let g_n = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(0.281);
    let params = params0.with_g_n(g_n).unwrap();
    let solver = GpeSolver::new(grid.clone(), params.clone()).unwrap();
    let set = solver.solve_stationary(3, &StationaryOpts::default()).unwrap();
    let (basis, dev) = set.orthonormal_basis().unwrap();
    println!(
        "[{:.1?}] gN={g_n}: mu = {:?}, basis dev = {dev:.2e}",
        t0.elapsed(),
        set.mus
    );

    // --- pulse 1 ---
    let solver_p1 = GpeSolver::new(grid.clone(), params.clone()).unwrap();
    let target = Pulse1Context::balanced_target(&basis[0], &basis[1]).unwrap();
    let ctx1 = Pulse1Context::new(solver_p1, set.states[0].clone(), target, dt).unwrap();

    let mut problem1 = OptimizationProblem::new(CostKind::Pulse1, 1.19, 20);
    problem1.budget = budget1;
    problem1.restarts = 5;
    problem1.seed = 1;
    problem1.block_size = args.get(6).and_then(|s| s.parse().ok());

    let nu01 = set.mus[1] - set.mus[0];
    let seed_w = scan_seed(&problem1, nu01, |w| ctx1.evaluate(w)).unwrap();
    println!(
        "[{:.1?}] pulse1 scan seed: J = {:.4}",
        t0.elapsed(),
        ctx1.evaluate(&seed_w).unwrap()
    );
    problem1.initial = Some(seed_w);
    let (w1, trace1) = optimize(&problem1, |w| ctx1.evaluate(w)).unwrap();
    println!(
        "[{:.1?}] pulse1: J1 = {:.5} after {} evals ({} ms), max|l| = {:.3}",
        t0.elapsed(),
        trace1.final_cost,
        trace1.records.len(),
        trace1.wall_time_ms as u64,
        w1.max_abs()
    );
    let out1 = ctx1.final_state(&w1).unwrap();
    let pr = out1.project_populations(&basis).unwrap();
    println!(
        "pulse1 output: p = {:?}, leak = {:.4}",
        pr.populations, pr.leakage
    );

    if stage == "pulse1" {
        return;
    }

    // --- pulse 2 ---
    let beat = 1.0 / nu01;
    let holds: Vec<f64> = (0..15).map(|h| 1e-4 + h as f64 * beat / 15.0).collect();
    let solver_p2 = GpeSolver::new(grid.clone(), params.clone()).unwrap();
    let ctx2 = Pulse2Context::prepare(
        solver_p2,
        &w1,
        &holds,
        basis.clone(),
        Pulse2Inputs::Pulse1Outputs,
        dt,
    )
    .unwrap();
    let mut problem2 = OptimizationProblem::new(CostKind::Pulse2, 1.6, 20);
    problem2.budget = budget2;
    problem2.restarts = args.get(8).and_then(|s| s.parse().ok()).unwrap_or(2);
    problem2.seed = 2;
    problem2.block_size = args.get(7).and_then(|s| s.parse().ok());
    let seed_w2 = scan_seed(&problem2, nu01, |w| ctx2.evaluate(w)).unwrap();
    println!(
        "[{:.1?}] pulse2 scan seed: J = {:.4}",
        t0.elapsed(),
        ctx2.evaluate(&seed_w2).unwrap()
    );
    problem2.initial = Some(seed_w2);
    let (w2, trace2) = optimize(&problem2, |w| ctx2.evaluate(w)).unwrap();
    println!(
        "[{:.1?}] pulse2: J2 = {:.5} after {} evals ({} ms), max|l| = {:.3}",
        t0.elapsed(),
        trace2.final_cost,
        trace2.records.len(),
        trace2.wall_time_ms as u64,
        w2.max_abs()
    );

    // --- full fringe ---
    let spec = RamseySpec {
        pulse1: w1,
        pulse2: w2,
        hold_times: RamseySpec::default_hold_times()
            .into_iter()
            .map(|t| t + 1e-4)
            .collect(),
        params,
    };
    let fringe = run_ramsey(&spec, &grid, &RamseyOpts { dt, ..Default::default() }).unwrap();
    let c0 = fringe.contrast_p0().unwrap();
    let c1 = fringe.contrast_p1().unwrap();
    let max_out = fringe
        .rows
        .iter()
        .map(|r| r.outside_two_level())
        .fold(0.0f64, f64::max);
    let period = fringe.period_fit().map(|f| f.period).unwrap_or(f64::NAN);
    println!(
        "[{:.1?}] fringe: C(p0) = {c0:.4}, C(p1) = {c1:.4}, max outside = {max_out:.4}, period = {period:.4} ms",
        t0.elapsed()
    );
    print!("outside profile:");
    for r in &fringe.rows {
        print!(" {:.0}", 1000.0 * r.outside_two_level());
    }
    println!();
}
