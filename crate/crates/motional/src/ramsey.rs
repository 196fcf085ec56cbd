//! Two-pulse interferometer simulation: pulse, hold, pulse, read out.

use crate::control::ControlWaveform;
use crate::error::{Error, Result};
use crate::gpe::{GpeParams, GpeSolver, StationaryOpts};
use crate::grid::SpatialGrid;
use crate::sinefit::{fit_damped_sine, DampedSineFit};
use crate::wavefunction::Wavefunction;
use rayon::prelude::*;
use std::io::Write;
use std::sync::Arc;

/// Sequence description: both pulses, the hold-time scan, and the
/// equation parameters.
#[derive(Debug, Clone)]
pub struct RamseySpec {
    pub pulse1: ControlWaveform,
    pub pulse2: ControlWaveform,
    /// Phase-accumulation times (ms), non-empty and strictly increasing.
    pub hold_times: Vec<f64>,
    pub params: GpeParams,
}

impl RamseySpec {
    pub fn validate(&self) -> Result<()> {
        if self.hold_times.is_empty() {
            return Err(Error::EmptyInput("hold-time list"));
        }
        if self.hold_times[0] < 0.0 {
            return Err(Error::InvalidInput("hold times must be non-negative".into()));
        }
        if !self.hold_times.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput(
                "hold times must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// Default hold-time scan 0..=2.0 ms in 0.05 ms steps.
    pub fn default_hold_times() -> Vec<f64> {
        (0..=40).map(|i| i as f64 * 0.05).collect()
    }
}

/// Populations after the full sequence at one hold time. `leakage` is the
/// fraction outside the three modeled states (non-negative up to
/// projection rounding).
#[derive(Debug, Clone, Copy)]
pub struct FringeRow {
    pub hold_time: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub leakage: f64,
}

impl FringeRow {
    /// Population outside the two-level system {0, 1}.
    pub fn outside_two_level(&self) -> f64 {
        self.p2 + self.leakage
    }
}

/// Interferometer output over the hold-time scan. Hold times whose
/// propagation failed are reported in `failures` instead of aborting the
/// scan.
#[derive(Debug, Clone)]
pub struct RamseyFringe {
    pub rows: Vec<FringeRow>,
    pub failures: Vec<(f64, String)>,
}

impl RamseyFringe {
    pub fn p0_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.p0).collect()
    }

    pub fn p1_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.p1).collect()
    }

    pub fn hold_times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.hold_time).collect()
    }

    pub fn contrast_p0(&self) -> Result<f64> {
        contrast(&self.p0_series())
    }

    pub fn contrast_p1(&self) -> Result<f64> {
        contrast(&self.p1_series())
    }

    /// Fringe period (ms) from a damped-sine fit of p0 over hold time.
    pub fn period_fit(&self) -> Result<DampedSineFit> {
        fit_damped_sine(&self.hold_times(), &self.p0_series())
    }

    /// CSV rows `hold_time_ms,p0,p1,p2,leakage`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "hold_time_ms,p0,p1,p2,leakage")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.6},{:.9},{:.9},{:.9},{:.9}",
                r.hold_time, r.p0, r.p1, r.p2, r.leakage
            )?;
        }
        Ok(())
    }
}

/// Fringe contrast (max - min) / (max + min); zero for an all-zero
/// series by convention. Negative entries are rejected.
pub fn contrast(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptyInput("contrast series"));
    }
    if series.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidInput(
            "contrast input must be non-negative".into(),
        ));
    }
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi == 0.0 {
        return Ok(0.0);
    }
    Ok((hi - lo) / (hi + lo))
}

#[derive(Debug, Clone)]
pub struct RamseyOpts {
    pub dt: f64,
    pub stationary: StationaryOpts,
}

impl Default for RamseyOpts {
    fn default() -> Self {
        Self {
            dt: crate::gpe::DEFAULT_DT_MS,
            stationary: StationaryOpts::default(),
        }
    }
}

/// Run the full sequence: ground state, first pulse, static hold, second
/// pulse, mode projection; one row per hold time. Deterministic.
pub fn run_ramsey(
    spec: &RamseySpec,
    grid: &Arc<SpatialGrid>,
    opts: &RamseyOpts,
) -> Result<RamseyFringe> {
    spec.validate()?;
    let solver = GpeSolver::new(grid.clone(), spec.params.clone())?;
    let stationary = solver.solve_stationary(3, &opts.stationary)?;
    let (basis, _dev) = stationary.orthonormal_basis()?;

    let after_p1 = solver.propagate_final(
        &stationary.states[0],
        Some(&spec.pulse1),
        (0.0, spec.pulse1.duration()),
        opts.dt,
    )?;

    // sequential holds (each continues from the previous sample) ...
    let mut held: Vec<Wavefunction> = Vec::with_capacity(spec.hold_times.len());
    let mut current = after_p1;
    let mut t_prev = 0.0;
    for &t_h in &spec.hold_times {
        current = solver.propagate_final(&current, None, (t_prev, t_h), opts.dt)?;
        t_prev = t_h;
        held.push(current.clone());
    }

    // ... then independent second pulses, in parallel
    let outcomes: Vec<(f64, std::result::Result<FringeRow, String>)> = spec
        .hold_times
        .par_iter()
        .zip(held)
        .map(|(&t_h, input)| {
            let out = (|| -> Result<FringeRow> {
                let final_state = solver.propagate_final(
                    &input,
                    Some(&spec.pulse2),
                    (0.0, spec.pulse2.duration()),
                    opts.dt,
                )?;
                let pr = final_state.project_populations(&basis)?;
                Ok(FringeRow {
                    hold_time: t_h,
                    p0: pr.populations[0],
                    p1: pr.populations[1],
                    p2: pr.populations[2],
                    leakage: pr.leakage,
                })
            })();
            (t_h, out.map_err(|e| e.to_string()))
        })
        .collect();

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (t_h, out) in outcomes {
        match out {
            Ok(row) => rows.push(row),
            Err(msg) => failures.push((t_h, msg)),
        }
    }
    Ok(RamseyFringe { rows, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;
    use crate::units::MASS_RB87;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn contrast_formula() {
        assert_eq!(contrast(&[0.4, 0.4, 0.4]).unwrap(), 0.0);
        assert_eq!(contrast(&[0.0, 0.7]).unwrap(), 1.0);
        assert_relative_eq!(contrast(&[0.2, 0.8]).unwrap(), 0.6, epsilon = 1e-12);
        assert_eq!(contrast(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(contrast(&[-0.1, 0.5]).is_err());
        assert!(contrast(&[]).is_err());
    }

    #[test]
    fn contrast_scale_invariance() {
        let series = [0.31, 0.62, 0.12, 0.45];
        let c = contrast(&series).unwrap();
        for a in [0.5, 2.0, 17.0] {
            let scaled: Vec<f64> = series.iter().map(|v| a * v).collect();
            assert_relative_eq!(contrast(&scaled).unwrap(), c, epsilon = 1e-12);
        }
    }

    #[test]
    fn spec_validation() {
        let params =
            GpeParams::new(MASS_RB87, 700, 0.0, PotentialSpec::sextic_y()).unwrap();
        let mk = |holds: Vec<f64>| RamseySpec {
            pulse1: ControlWaveform::zero(0.2, 4, 1.0).unwrap(),
            pulse2: ControlWaveform::zero(0.2, 4, 1.0).unwrap(),
            hold_times: holds,
            params: params.clone(),
        };
        assert!(mk(vec![]).validate().is_err());
        assert!(mk(vec![-0.1, 0.2]).validate().is_err());
        assert!(mk(vec![0.1, 0.1]).validate().is_err());
        assert!(mk(vec![0.0, 0.1, 0.2]).validate().is_ok());
    }

    /// Identity sequence: zero pulses keep everything in the ground
    /// state; contrast vanishes.
    #[test]
    fn zero_pulses_identity_sequence() {
        let grid = SpatialGrid::new(-2.0, 2.0, 128).unwrap();
        let params =
            GpeParams::new(MASS_RB87, 700, 0.0, PotentialSpec::sextic_y()).unwrap();
        let spec = RamseySpec {
            pulse1: ControlWaveform::zero(0.1, 4, 1.0).unwrap(),
            pulse2: ControlWaveform::zero(0.1, 4, 1.0).unwrap(),
            hold_times: vec![0.0, 0.1, 0.2, 0.3],
            params,
        };
        let opts = RamseyOpts {
            dt: 1e-3,
            ..Default::default()
        };
        let fringe = run_ramsey(&spec, &grid, &opts).unwrap();
        assert!(fringe.failures.is_empty());
        for row in &fringe.rows {
            assert_abs_diff_eq!(row.p0, 1.0, epsilon = 1e-6);
            assert!(row.leakage > -1e-9);
        }
        assert_abs_diff_eq!(fringe.contrast_p0().unwrap(), 0.0, epsilon = 1e-6);
    }
}
