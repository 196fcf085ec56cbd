//! Simulation and optimal control of the transverse motional states of a
//! quasi-1D Bose-Einstein condensate in an anharmonic trap.
//!
//! The crate solves the effective 1D Gross-Pitaevskii equation with a
//! split-step spectral propagator, finds stationary states by imaginary
//! time, synthesizes trap-displacement control pulses from a truncated
//! Fourier basis with a derivative-free simplex search, simulates the
//! two-pulse interferometer built from those pulses, fits mode
//! populations to momentum-density time series, and evaluates the
//! effective two-mode model of interaction-driven dephasing.
//!
//! Public interfaces use micrometres, milliseconds, and energies as E/h
//! in kilohertz throughout; see [`units`].

pub mod control;
pub mod crab;
pub mod error;
pub mod estimation;
pub mod gpe;
pub mod grid;
pub mod potential;
pub mod ramsey;
pub mod simplex;
pub mod sinefit;
pub mod spectral;
pub mod twomode;
pub mod units;
pub mod wavefunction;

pub use control::{ControlWaveform, Envelope};
pub use crab::{
    cost_pulse1, cost_pulse2, optimize, CostKind, OptimizationProblem, OptimizationTrace,
    Pulse1Context, Pulse2Context, Pulse2Inputs,
};
pub use error::{Error, Result};
pub use estimation::{
    fit_populations, simulate_observation, FitOpts, MomentumTimeSeries, ObservationOpts,
    PopulationFit, TofScaling,
};
pub use gpe::{
    calibrate_nonlinearity, GpeParams, GpeSolver, PropagationOpts, StationaryOpts, StationarySeed,
    StationarySet, Trajectory,
};
pub use grid::SpatialGrid;
pub use potential::PotentialSpec;
pub use ramsey::{contrast, run_ramsey, RamseyFringe, RamseyOpts, RamseySpec};
pub use sinefit::{fit_damped_sine, DampedSineFit};
pub use twomode::{
    binomial_delta_jz, evolve_two_mode, overlap_integrals, phase_diffusion_rate, SpinState,
    TwoModeConstants, TwoModeEvolver,
};
pub use wavefunction::{
    lowdin_orthonormalize, MomentumDensity, Projection, SuperpositionParams, Wavefunction,
};
