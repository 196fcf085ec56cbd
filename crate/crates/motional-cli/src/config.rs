//! Run configuration: a strict INI-style key-value document with one
//! section per subsystem. Unknown sections or keys are rejected with
//! their line number; all physical values use um / ms / kHz conventions.

use motional::control::Envelope;
use motional::crab::Pulse2Inputs;
use motional::error::{Error, Result};
use motional::gpe::GpeParams;
use motional::potential::PotentialSpec;
use motional::units::MASS_RB87;
use motional::SpatialGrid;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub y_min_um: f64,
    pub y_max_um: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    SexticY,
    QuarticZ,
    Harmonic { nu_khz: f64 },
    Custom {
        alpha2: f64,
        alpha4: f64,
        alpha6: f64,
        r0: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpeConfig {
    pub mass_kg: f64,
    pub atom_number: u32,
    pub g_n_khz_um: f64,
    pub dt_ms: f64,
    /// Target interacting chemical potential for `calibrate`, measured
    /// from the non-interacting ground level unless `calibrate_absolute`.
    pub calibrate_mu_target_khz: f64,
    pub calibrate_absolute: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlConfig {
    pub n_components: usize,
    pub lambda_max_um: f64,
    pub envelope_ramp_fraction: f64,
    pub pulse1_duration_ms: f64,
    pub pulse2_duration_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub budget: usize,
    pub restarts: usize,
    pub penalty_weight: f64,
    pub amp_step_um: f64,
    pub phase_step_rad: f64,
    pub block_size: Option<usize>,
    pub n_hold_times: usize,
    pub pulse2_inputs: Pulse2Inputs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RamseyConfig {
    pub hold_start_ms: f64,
    pub hold_stop_ms: f64,
    pub hold_step_ms: f64,
    pub fit_fringe: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationConfig {
    pub t_tof_ms: f64,
    pub blur_sigma_um: f64,
    pub sample_dt_ms: f64,
    pub duration_ms: f64,
    pub fit_restarts: usize,
    pub fit_max_evals: usize,
    pub fit_time_offset: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeConfig {
    pub n_atoms: u32,
    /// Number-difference fluctuation; `None` means binomial sqrt(N)/2.
    pub delta_jz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: GridConfig,
    pub potential: PotentialKind,
    pub gpe: GpeConfig,
    pub control: ControlConfig,
    pub optimizer: OptimizerConfig,
    pub ramsey: RamseyConfig,
    pub estimation: EstimationConfig,
    pub twomode: TwoModeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            grid: GridConfig {
                y_min_um: -2.0,
                y_max_um: 2.0,
                n_points: 1024,
            },
            potential: PotentialKind::SexticY,
            gpe: GpeConfig {
                mass_kg: MASS_RB87,
                atom_number: 700,
                // reproduces the two-mode overlap constants U00/U11/U01
                // of the default trap at N = 700
                g_n_khz_um: 0.282,
                dt_ms: 5e-4,
                calibrate_mu_target_khz: 0.6,
                calibrate_absolute: false,
            },
            control: ControlConfig {
                n_components: 20,
                lambda_max_um: 1.0,
                envelope_ramp_fraction: 0.05,
                pulse1_duration_ms: 1.19,
                pulse2_duration_ms: 1.6,
            },
            optimizer: OptimizerConfig {
                budget: 4000,
                restarts: 5,
                penalty_weight: 25.0,
                amp_step_um: 0.02,
                phase_step_rad: 0.3,
                block_size: None,
                n_hold_times: 15,
                pulse2_inputs: Pulse2Inputs::Pulse1Outputs,
            },
            ramsey: RamseyConfig {
                hold_start_ms: 0.0,
                hold_stop_ms: 2.0,
                hold_step_ms: 0.05,
                fit_fringe: true,
            },
            estimation: EstimationConfig {
                t_tof_ms: 46.0,
                blur_sigma_um: 52.8,
                sample_dt_ms: 0.05,
                duration_ms: 1.0,
                fit_restarts: 2,
                fit_max_evals: 600,
                fit_time_offset: false,
            },
            twomode: TwoModeConfig {
                n_atoms: 700,
                delta_jz: None,
            },
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(Error::Parse {
                    line: line_no,
                    message: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                match section.as_str() {
                    "grid" | "potential" | "gpe" | "control" | "optimizer" | "ramsey"
                    | "estimation" | "twomode" => {}
                    other => {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("unknown section `[{other}]`"),
                        })
                    }
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: line_no,
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            cfg.apply(&section, key, value, line_no)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str, line: usize) -> Result<()> {
        let bad = |message: String| Error::Parse { line, message };
        let parse_f64 = |v: &str| -> Result<f64> {
            v.parse().map_err(|e| bad(format!("bad float `{v}`: {e}")))
        };
        let parse_usize = |v: &str| -> Result<usize> {
            v.parse().map_err(|e| bad(format!("bad count `{v}`: {e}")))
        };
        let parse_bool = |v: &str| -> Result<bool> {
            v.parse().map_err(|e| bad(format!("bad bool `{v}`: {e}")))
        };
        match (section, key) {
            ("", "seed") => {
                self.seed = value
                    .parse()
                    .map_err(|e| bad(format!("bad seed `{value}`: {e}")))?
            }
            ("grid", "y_min_um") => self.grid.y_min_um = parse_f64(value)?,
            ("grid", "y_max_um") => self.grid.y_max_um = parse_f64(value)?,
            ("grid", "n_points") => self.grid.n_points = parse_usize(value)?,
            ("potential", "kind") => {
                self.potential = match value {
                    "sextic_y" => PotentialKind::SexticY,
                    "quartic_z" => PotentialKind::QuarticZ,
                    "harmonic" => PotentialKind::Harmonic { nu_khz: 1.83 },
                    "custom" => PotentialKind::Custom {
                        alpha2: 0.0,
                        alpha4: 0.0,
                        alpha6: 0.0,
                        r0: 0.252,
                    },
                    other => return Err(bad(format!("unknown potential kind `{other}`"))),
                }
            }
            ("potential", "nu_khz") => match &mut self.potential {
                PotentialKind::Harmonic { nu_khz } => *nu_khz = parse_f64(value)?,
                _ => return Err(bad("nu_khz only applies to kind = harmonic".into())),
            },
            ("potential", "alpha2_khz_um2") => match &mut self.potential {
                PotentialKind::Custom { alpha2, .. } => *alpha2 = parse_f64(value)?,
                _ => return Err(bad("alpha coefficients need kind = custom".into())),
            },
            ("potential", "alpha4_khz_um4") => match &mut self.potential {
                PotentialKind::Custom { alpha4, .. } => *alpha4 = parse_f64(value)?,
                _ => return Err(bad("alpha coefficients need kind = custom".into())),
            },
            ("potential", "alpha6_khz_um6") => match &mut self.potential {
                PotentialKind::Custom { alpha6, .. } => *alpha6 = parse_f64(value)?,
                _ => return Err(bad("alpha coefficients need kind = custom".into())),
            },
            ("potential", "r0_um") => match &mut self.potential {
                PotentialKind::Custom { r0, .. } => *r0 = parse_f64(value)?,
                _ => return Err(bad("r0_um needs kind = custom".into())),
            },
            ("gpe", "mass_kg") => self.gpe.mass_kg = parse_f64(value)?,
            ("gpe", "atom_number") => {
                self.gpe.atom_number = value
                    .parse()
                    .map_err(|e| bad(format!("bad count `{value}`: {e}")))?
            }
            ("gpe", "g_n_khz_um") => self.gpe.g_n_khz_um = parse_f64(value)?,
            ("gpe", "dt_ms") => self.gpe.dt_ms = parse_f64(value)?,
            ("gpe", "calibrate_mu_target_khz") => {
                self.gpe.calibrate_mu_target_khz = parse_f64(value)?
            }
            ("gpe", "calibrate_absolute") => self.gpe.calibrate_absolute = parse_bool(value)?,
            ("control", "n_components") => self.control.n_components = parse_usize(value)?,
            ("control", "lambda_max_um") => self.control.lambda_max_um = parse_f64(value)?,
            ("control", "envelope_ramp_fraction") => {
                self.control.envelope_ramp_fraction = parse_f64(value)?
            }
            ("control", "pulse1_duration_ms") => {
                self.control.pulse1_duration_ms = parse_f64(value)?
            }
            ("control", "pulse2_duration_ms") => {
                self.control.pulse2_duration_ms = parse_f64(value)?
            }
            ("optimizer", "budget") => self.optimizer.budget = parse_usize(value)?,
            ("optimizer", "restarts") => self.optimizer.restarts = parse_usize(value)?,
            ("optimizer", "penalty_weight") => self.optimizer.penalty_weight = parse_f64(value)?,
            ("optimizer", "amp_step_um") => self.optimizer.amp_step_um = parse_f64(value)?,
            ("optimizer", "phase_step_rad") => {
                self.optimizer.phase_step_rad = parse_f64(value)?
            }
            ("optimizer", "block_size") => {
                self.optimizer.block_size = Some(parse_usize(value)?)
            }
            ("optimizer", "n_hold_times") => self.optimizer.n_hold_times = parse_usize(value)?,
            ("optimizer", "pulse2_inputs") => {
                self.optimizer.pulse2_inputs = match value {
                    "pulse1_outputs" => Pulse2Inputs::Pulse1Outputs,
                    "ideal_equator" => Pulse2Inputs::IdealEquator,
                    other => return Err(bad(format!("unknown pulse2 input mode `{other}`"))),
                }
            }
            ("ramsey", "hold_start_ms") => self.ramsey.hold_start_ms = parse_f64(value)?,
            ("ramsey", "hold_stop_ms") => self.ramsey.hold_stop_ms = parse_f64(value)?,
            ("ramsey", "hold_step_ms") => self.ramsey.hold_step_ms = parse_f64(value)?,
            ("ramsey", "fit_fringe") => self.ramsey.fit_fringe = parse_bool(value)?,
            ("estimation", "t_tof_ms") => self.estimation.t_tof_ms = parse_f64(value)?,
            ("estimation", "blur_sigma_um") => {
                self.estimation.blur_sigma_um = parse_f64(value)?
            }
            ("estimation", "sample_dt_ms") => self.estimation.sample_dt_ms = parse_f64(value)?,
            ("estimation", "duration_ms") => self.estimation.duration_ms = parse_f64(value)?,
            ("estimation", "fit_restarts") => {
                self.estimation.fit_restarts = parse_usize(value)?
            }
            ("estimation", "fit_max_evals") => {
                self.estimation.fit_max_evals = parse_usize(value)?
            }
            ("estimation", "fit_time_offset") => {
                self.estimation.fit_time_offset = parse_bool(value)?
            }
            ("twomode", "n_atoms") => {
                self.twomode.n_atoms = value
                    .parse()
                    .map_err(|e| bad(format!("bad count `{value}`: {e}")))?
            }
            ("twomode", "delta_jz") => self.twomode.delta_jz = Some(parse_f64(value)?),
            (sec, key) => {
                return Err(bad(if sec.is_empty() {
                    format!("unknown top-level key `{key}`")
                } else {
                    format!("unknown key `{key}` in section `[{sec}]`")
                }))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.build_grid()?;
        self.gpe_params()?;
        if self.ramsey.hold_step_ms <= 0.0 || self.ramsey.hold_stop_ms < self.ramsey.hold_start_ms
        {
            return Err(Error::InvalidInput("bad ramsey hold scan".into()));
        }
        if self.optimizer.n_hold_times == 0 {
            return Err(Error::InvalidInput("n_hold_times must be >= 1".into()));
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Arc<SpatialGrid>> {
        SpatialGrid::new(self.grid.y_min_um, self.grid.y_max_um, self.grid.n_points)
    }

    pub fn build_potential(&self) -> PotentialSpec {
        match self.potential {
            PotentialKind::SexticY => PotentialSpec::sextic_y(),
            PotentialKind::QuarticZ => PotentialSpec::quartic_z(),
            PotentialKind::Harmonic { nu_khz } => {
                PotentialSpec::harmonic(nu_khz, self.gpe.mass_kg)
            }
            PotentialKind::Custom {
                alpha2,
                alpha4,
                alpha6,
                r0,
            } => PotentialSpec::new(alpha2, alpha4, alpha6, r0),
        }
    }

    pub fn gpe_params(&self) -> Result<GpeParams> {
        GpeParams::new(
            self.gpe.mass_kg,
            self.gpe.atom_number,
            self.gpe.g_n_khz_um,
            self.build_potential(),
        )
    }

    pub fn envelope(&self) -> Envelope {
        Envelope::SineSquaredRamp {
            fraction: self.control.envelope_ramp_fraction,
        }
    }

    pub fn hold_times(&self) -> Vec<f64> {
        let n = ((self.ramsey.hold_stop_ms - self.ramsey.hold_start_ms)
            / self.ramsey.hold_step_ms)
            .round() as usize;
        (0..=n)
            .map(|i| self.ramsey.hold_start_ms + i as f64 * self.ramsey.hold_step_ms)
            .collect()
    }

    /// The documented default configuration file.
    pub fn default_text() -> &'static str {
        DEFAULT_CONFIG_TEXT
    }
}

pub const DEFAULT_CONFIG_TEXT: &str = r#"# motional run configuration (defaults shown; units um / ms / kHz as E/h)

seed = 1                           # drives every stochastic restart

[grid]
y_min_um = -2.0                    # box must stay inside the trap inversion
y_max_um = 2.0                     # point at |y| = 2.13 um
n_points = 1024                    # power of two, >= 16

[potential]
kind = sextic_y                    # sextic_y | quartic_z | harmonic | custom
# nu_khz = 1.83                    # level spacing, kind = harmonic only
# alpha2_khz_um2 = 10.479655       # kind = custom only
# alpha4_khz_um4 = 15.547672
# alpha6_khz_um6 = -2.460012
# r0_um = 0.252

[gpe]
mass_kg = 1.44316e-25              # Rb-87
atom_number = 700
g_n_khz_um = 0.282                 # pinned to reproduce the two-mode overlap constants
dt_ms = 0.0005                     # split-step size, must be <= 0.001
calibrate_mu_target_khz = 0.6      # `calibrate` target, relative to the
calibrate_absolute = false         # non-interacting ground level unless true

[control]
n_components = 20                  # active Fourier components (60 supported)
lambda_max_um = 1.0                # ~4x the ground-state rms size, 40% headroom
envelope_ramp_fraction = 0.05      # sin^2 boundary ramp fraction of T
pulse1_duration_ms = 1.19
pulse2_duration_ms = 1.6

[optimizer]
budget = 4000                      # total cost evaluations
restarts = 5                       # seeded simplex restarts
penalty_weight = 25.0              # on (max|lambda| - lambda_max)^2
amp_step_um = 0.02                 # initial simplex scale, amplitudes
phase_step_rad = 0.3               # initial simplex scale, phases
# block_size = 10                  # optimize components in cycling blocks
n_hold_times = 15                  # equator samples for the pulse-2 cost
pulse2_inputs = pulse1_outputs     # pulse1_outputs | ideal_equator

[ramsey]
hold_start_ms = 0.0
hold_stop_ms = 2.0
hold_step_ms = 0.05                # mirrors the observation sampling
fit_fringe = true                  # damped-sine fit of p0 for the period

[estimation]
t_tof_ms = 46.0                    # expansion time
blur_sigma_um = 52.8               # imaging blur, image plane (one k-cell)
sample_dt_ms = 0.05
duration_ms = 1.0                  # simulated observation length
fit_restarts = 2
fit_max_evals = 600
fit_time_offset = false            # fit a global time offset as a 6th parameter

[twomode]
n_atoms = 700
# delta_jz = 13.229                # number fluctuation; default binomial sqrt(N)/2
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_text_parses_to_default_config() {
        let cfg = RunConfig::parse(DEFAULT_CONFIG_TEXT).unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn unknown_key_is_rejected_with_line_number() {
        let text = "[grid]\ny_min_um = -2.0\nbogus_key = 1\n";
        match RunConfig::parse(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_section_is_rejected() {
        let text = "[grdi]\ny_min_um = -2.0\n";
        assert!(matches!(
            RunConfig::parse(text),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn overrides_apply() {
        let text = "seed = 42\n[gpe]\ng_n_khz_um = 0.1\n[grid]\nn_points = 256\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.gpe.g_n_khz_um, 0.1);
        assert_eq!(cfg.grid.n_points, 256);
        // untouched values stay at defaults
        assert_eq!(cfg.control.n_components, 20);
    }

    #[test]
    fn hold_times_cover_scan() {
        let cfg = RunConfig::default();
        let holds = cfg.hold_times();
        assert_eq!(holds.len(), 41);
        assert_eq!(holds[0], 0.0);
        assert!((holds[40] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_potential_consistency_checked() {
        let text = "[grid]\ny_min_um = -4.0\ny_max_um = 4.0\n";
        // parses, but the sextic trap turns over inside that box
        let cfg = RunConfig::parse(text).unwrap();
        let grid = cfg.build_grid().unwrap();
        let params = cfg.gpe_params().unwrap();
        assert!(motional::GpeSolver::new(grid, params).is_err());
    }
}
