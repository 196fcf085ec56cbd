//! Fourier-parameterized trap-displacement waveforms lambda(t).
//!
//! A control is a truncated Fourier series under a boundary envelope:
//! lambda(t) = env(t) * sum_n A_n sin(2 pi f_n n t / T + phi_n), with
//! harmonics f_n = n/T by default and an optional per-component frequency
//! multiplier for randomized-basis searches. The envelope pins
//! lambda(0) = lambda(T) = 0 exactly.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

/// Boundary envelope applied to the Fourier sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// sin^2 ramp over the first and last `fraction` of the duration,
    /// flat (exactly 1) in between.
    SineSquaredRamp { fraction: f64 },
    /// Half-sine sin(pi t / T) over the whole pulse.
    HalfSine,
}

impl Default for Envelope {
    fn default() -> Self {
        // short smooth ramp avoids spectral leakage while leaving the
        // waveform interior untouched
        Envelope::SineSquaredRamp { fraction: 0.05 }
    }
}

impl Envelope {
    pub fn value(&self, t: f64, duration: f64) -> f64 {
        match *self {
            Envelope::SineSquaredRamp { fraction } => {
                let r = fraction * duration;
                if r <= 0.0 {
                    return 1.0;
                }
                if t <= 0.0 || t >= duration {
                    0.0
                } else if t < r {
                    (PI * t / (2.0 * r)).sin().powi(2)
                } else if t > duration - r {
                    (PI * (duration - t) / (2.0 * r)).sin().powi(2)
                } else {
                    1.0
                }
            }
            Envelope::HalfSine => {
                if t <= 0.0 || t >= duration {
                    0.0
                } else {
                    (PI * t / duration).sin()
                }
            }
        }
    }
}

/// Trap-displacement control waveform (displacements in um, time in ms).
#[derive(Debug, Clone, PartialEq)]
pub struct ControlWaveform {
    duration: f64,
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
    /// Per-component frequency multipliers; `None` means exact harmonics n/T.
    freq_multipliers: Option<Vec<f64>>,
    lambda_max: f64,
    envelope: Envelope,
    max_abs_scanned: f64,
}

/// Resolution multiplier of the construction-time bound scan relative to
/// the nominal output resolution (one point per component per period).
const SCAN_OVERSAMPLING: usize = 10;

impl ControlWaveform {
    /// Build a waveform and reject it when the scanned |lambda| exceeds
    /// `lambda_max`. Optimizer internals use [`Self::new_unbounded`] so
    /// that violations can be penalized instead of clipped.
    pub fn new(
        duration: f64,
        amplitudes: Vec<f64>,
        phases: Vec<f64>,
        lambda_max: f64,
        envelope: Envelope,
    ) -> Result<Self> {
        let w = Self::new_unbounded(duration, amplitudes, phases, lambda_max, envelope)?;
        if w.max_abs_scanned > lambda_max {
            return Err(Error::BoundViolation {
                max_abs: w.max_abs_scanned,
                bound: lambda_max,
            });
        }
        Ok(w)
    }

    /// Like [`Self::new`] but keeps bound-violating waveforms; the scanned
    /// maximum stays available through [`Self::max_abs`] for penalties.
    pub fn new_unbounded(
        duration: f64,
        amplitudes: Vec<f64>,
        phases: Vec<f64>,
        lambda_max: f64,
        envelope: Envelope,
    ) -> Result<Self> {
        if duration <= 0.0 || !duration.is_finite() {
            return Err(Error::InvalidInput(format!(
                "pulse duration must be positive, got {duration}"
            )));
        }
        if amplitudes.len() != phases.len() {
            return Err(Error::InvalidInput(
                "amplitude and phase vectors differ in length".into(),
            ));
        }
        if amplitudes.is_empty() {
            return Err(Error::EmptyInput("control components"));
        }
        if lambda_max <= 0.0 {
            return Err(Error::InvalidInput("lambda_max must be positive".into()));
        }
        let mut w = Self {
            duration,
            amplitudes,
            phases,
            freq_multipliers: None,
            lambda_max,
            envelope,
            max_abs_scanned: 0.0,
        };
        w.max_abs_scanned = w.scan_max_abs();
        Ok(w)
    }

    /// All-zero waveform (identity pulse) of the given duration.
    pub fn zero(duration: f64, n_components: usize, lambda_max: f64) -> Result<Self> {
        Self::new(
            duration,
            vec![0.0; n_components.max(1)],
            vec![0.0; n_components.max(1)],
            lambda_max,
            Envelope::default(),
        )
    }

    pub fn with_freq_multipliers(mut self, multipliers: Vec<f64>) -> Result<Self> {
        if multipliers.len() != self.amplitudes.len() {
            return Err(Error::InvalidInput(
                "frequency multiplier count must match component count".into(),
            ));
        }
        self.freq_multipliers = Some(multipliers);
        self.max_abs_scanned = self.scan_max_abs();
        Ok(self)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn n_components(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn envelope(&self) -> Envelope {
        self.envelope
    }

    /// Largest |lambda(t)| seen by the construction-time scan.
    pub fn max_abs(&self) -> f64 {
        self.max_abs_scanned
    }

    /// Excess of the scanned maximum over the bound (zero when compliant).
    pub fn bound_excess(&self) -> f64 {
        (self.max_abs_scanned - self.lambda_max).max(0.0)
    }

    /// lambda(t) in um; `t` must lie in [0, duration].
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.duration + 1e-12).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                duration: self.duration,
            });
        }
        Ok(self.evaluate_unchecked(t))
    }

    #[inline]
    fn evaluate_unchecked(&self, t: f64) -> f64 {
        let env = self.envelope.value(t, self.duration);
        if env == 0.0 {
            return 0.0;
        }
        let base = 2.0 * PI * t / self.duration;
        let mut s = 0.0;
        for (i, (&a, &ph)) in self.amplitudes.iter().zip(&self.phases).enumerate() {
            let mult = self
                .freq_multipliers
                .as_ref()
                .map_or(1.0, |m| m[i]);
            s += a * (base * (i + 1) as f64 * mult + ph).sin();
        }
        env * s
    }

    /// Tabulate lambda at `n_steps + 1` equally spaced times over [0, T].
    pub fn sample(&self, n_steps: usize) -> Vec<f64> {
        let dt = self.duration / n_steps.max(1) as f64;
        (0..=n_steps)
            .map(|i| self.evaluate_unchecked((i as f64 * dt).min(self.duration)))
            .collect()
    }

    fn scan_max_abs(&self) -> f64 {
        let n = (self.amplitudes.len().max(8) * 2 * SCAN_OVERSAMPLING).max(256);
        self.sample(n)
            .iter()
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    /// Key-value text document: duration_ms, n_components, lambda_max_um,
    /// then one `n amplitude_um phase_rad` line per component. Decimal
    /// fields carry 17 significant digits so round trips are bit-exact.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "duration_ms = {:.16e}", self.duration)?;
        writeln!(w, "n_components = {}", self.n_components())?;
        writeln!(w, "lambda_max_um = {:.16e}", self.lambda_max)?;
        match self.envelope {
            Envelope::SineSquaredRamp { fraction } => {
                writeln!(w, "envelope = sine_squared_ramp {:.16e}", fraction)?;
            }
            Envelope::HalfSine => writeln!(w, "envelope = half_sine")?,
        }
        for (i, (&a, &ph)) in self.amplitudes.iter().zip(&self.phases).enumerate() {
            match &self.freq_multipliers {
                None => writeln!(w, "{} {:.16e} {:.16e}", i + 1, a, ph)?,
                Some(m) => writeln!(w, "{} {:.16e} {:.16e} {:.16e}", i + 1, a, ph, m[i])?,
            }
        }
        Ok(())
    }

    pub fn read_text<R: Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut duration = None;
        let mut n_components = None;
        let mut lambda_max = None;
        let mut envelope = Envelope::default();
        let mut comps: Vec<(usize, f64, f64, Option<f64>)> = Vec::new();
        for (ln, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: ln + 1,
                message,
            };
            if let Some((key, value)) = line.split_once('=') {
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "duration_ms" => {
                        duration =
                            Some(value.parse().map_err(|e| err(format!("bad float: {e}")))?)
                    }
                    "n_components" => {
                        n_components =
                            Some(value.parse().map_err(|e| err(format!("bad count: {e}")))?)
                    }
                    "lambda_max_um" => {
                        lambda_max =
                            Some(value.parse().map_err(|e| err(format!("bad float: {e}")))?)
                    }
                    "envelope" => {
                        let mut it = value.split_whitespace();
                        match it.next() {
                            Some("sine_squared_ramp") => {
                                let f = it
                                    .next()
                                    .ok_or_else(|| err("missing ramp fraction".into()))?
                                    .parse()
                                    .map_err(|e| err(format!("bad float: {e}")))?;
                                envelope = Envelope::SineSquaredRamp { fraction: f };
                            }
                            Some("half_sine") => envelope = Envelope::HalfSine,
                            other => {
                                return Err(err(format!("unknown envelope {other:?}")));
                            }
                        }
                    }
                    other => return Err(err(format!("unknown key `{other}`"))),
                }
            } else {
                let mut it = line.split_whitespace();
                let idx: usize = it
                    .next()
                    .ok_or_else(|| err("empty component line".into()))?
                    .parse()
                    .map_err(|e| err(format!("bad index: {e}")))?;
                let a: f64 = it
                    .next()
                    .ok_or_else(|| err("missing amplitude".into()))?
                    .parse()
                    .map_err(|e| err(format!("bad float: {e}")))?;
                let ph: f64 = it
                    .next()
                    .ok_or_else(|| err("missing phase".into()))?
                    .parse()
                    .map_err(|e| err(format!("bad float: {e}")))?;
                let mult: Option<f64> = match it.next() {
                    Some(tok) => {
                        Some(tok.parse().map_err(|e| err(format!("bad float: {e}")))?)
                    }
                    None => None,
                };
                comps.push((idx, a, ph, mult));
            }
        }
        let duration = duration.ok_or(Error::Parse {
            line: 0,
            message: "missing duration_ms".into(),
        })?;
        let lambda_max = lambda_max.ok_or(Error::Parse {
            line: 0,
            message: "missing lambda_max_um".into(),
        })?;
        let n: usize = n_components.ok_or(Error::Parse {
            line: 0,
            message: "missing n_components".into(),
        })?;
        if comps.len() != n {
            return Err(Error::Parse {
                line: 0,
                message: format!("expected {n} component lines, found {}", comps.len()),
            });
        }
        comps.sort_by_key(|c| c.0);
        for (expect, c) in comps.iter().enumerate() {
            if c.0 != expect + 1 {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("component indices must be 1..={n}, found {}", c.0),
                });
            }
        }
        let amplitudes = comps.iter().map(|c| c.1).collect();
        let phases = comps.iter().map(|c| c.2).collect();
        let mults: Vec<Option<f64>> = comps.iter().map(|c| c.3).collect();
        let w = Self::new_unbounded(duration, amplitudes, phases, lambda_max, envelope)?;
        if mults.iter().any(|m| m.is_some()) {
            let filled: Vec<f64> = mults.into_iter().map(|m| m.unwrap_or(1.0)).collect();
            w.with_freq_multipliers(filled)
        } else {
            Ok(w)
        }
    }

    pub fn save_text(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_text(std::io::BufWriter::new(f))
    }

    pub fn load_text(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_text(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn zero_waveform_is_zero() {
        let w = ControlWaveform::zero(1.19, 20, 1.0).unwrap();
        for i in 0..=10 {
            let t = 1.19 * i as f64 / 10.0;
            assert_eq!(w.evaluate(t).unwrap(), 0.0);
        }
    }

    #[test]
    fn endpoints_vanish_exactly() {
        let w = ControlWaveform::new(
            1.6,
            vec![0.3, -0.2, 0.1],
            vec![0.3, 1.0, -2.0],
            1.0,
            Envelope::default(),
        )
        .unwrap();
        assert_eq!(w.evaluate(0.0).unwrap(), 0.0);
        assert_eq!(w.evaluate(1.6).unwrap(), 0.0);
        let w2 = ControlWaveform::new(
            1.6,
            vec![0.3],
            vec![1.0],
            1.0,
            Envelope::HalfSine,
        )
        .unwrap();
        assert_eq!(w2.evaluate(0.0).unwrap(), 0.0);
        assert_eq!(w2.evaluate(1.6).unwrap(), 0.0);
    }

    /// Closed-form oracle: in the flat interior a single component is a
    /// plain sine.
    #[test]
    fn single_component_matches_direct_sine() {
        let t_total = 1.19;
        let w = ControlWaveform::new(
            t_total,
            vec![0.1],
            vec![0.0],
            1.0,
            Envelope::SineSquaredRamp { fraction: 0.05 },
        )
        .unwrap();
        let t = t_total / 2.0;
        let expect = 0.1 * (2.0 * PI * t / t_total).sin();
        assert_abs_diff_eq!(w.evaluate(t).unwrap(), expect, epsilon = 1e-12);
        // several interior points, all inside the flat region
        for frac in [0.1, 0.25, 0.4, 0.6, 0.75, 0.9] {
            let t = frac * t_total;
            let expect = 0.1 * (2.0 * PI * t / t_total).sin();
            assert_abs_diff_eq!(w.evaluate(t).unwrap(), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_out_of_range_times() {
        let w = ControlWaveform::zero(1.0, 4, 1.0).unwrap();
        assert!(matches!(
            w.evaluate(-0.1),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(matches!(w.evaluate(1.2), Err(Error::TimeOutOfRange { .. })));
    }

    #[test]
    fn bound_scan_rejects_violations() {
        let r = ControlWaveform::new(
            1.0,
            vec![0.8, 0.5],
            vec![0.0, 0.0],
            1.0,
            Envelope::default(),
        );
        assert!(matches!(r, Err(Error::BoundViolation { .. })));
        let w = ControlWaveform::new_unbounded(
            1.0,
            vec![0.8, 0.5],
            vec![0.0, 0.0],
            1.0,
            Envelope::default(),
        )
        .unwrap();
        assert!(w.bound_excess() > 0.0);
    }

    /// Evaluation is linear in the amplitude vector.
    #[test]
    fn linear_in_amplitudes() {
        let mk = |amps: Vec<f64>| {
            ControlWaveform::new_unbounded(
                1.3,
                amps,
                vec![0.4, -0.7, 2.1],
                1.0,
                Envelope::default(),
            )
            .unwrap()
        };
        let a = mk(vec![0.11, -0.07, 0.05]);
        let b = mk(vec![-0.02, 0.03, 0.08]);
        let sum = mk(vec![0.09, -0.04, 0.13]);
        for i in 0..=20 {
            let t = 1.3 * i as f64 / 20.0;
            let lhs = a.evaluate(t).unwrap() + b.evaluate(t).unwrap();
            assert_abs_diff_eq!(lhs, sum.evaluate(t).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn text_roundtrip_is_bit_exact() {
        let w = ControlWaveform::new(
            1.19,
            vec![0.123456789012345678, -0.09876543210987654, 1e-17],
            vec![0.5, -2.9, 3.14159265358979],
            1.0,
            Envelope::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        w.write_text(&mut buf).unwrap();
        let back = ControlWaveform::read_text(&buf[..]).unwrap();
        assert_eq!(w, back);
        // and a second trip produces identical bytes
        let mut buf2 = Vec::new();
        back.write_text(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn text_rejects_unknown_keys() {
        let doc = "duration_ms = 1.0\nn_components = 1\nlambda_max_um = 1.0\nbogus = 3\n1 0.0 0.0\n";
        match ControlWaveform::read_text(doc.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn freq_multipliers_roundtrip_and_shift_frequency() {
        let w = ControlWaveform::new(
            1.0,
            vec![0.1],
            vec![0.0],
            1.0,
            Envelope::SineSquaredRamp { fraction: 0.05 },
        )
        .unwrap()
        .with_freq_multipliers(vec![1.5])
        .unwrap();
        let t = 0.5;
        assert_relative_eq!(
            w.evaluate(t).unwrap(),
            0.1 * (2.0 * PI * 1.5 * t / 1.0).sin(),
            epsilon = 1e-12
        );
        let mut buf = Vec::new();
        w.write_text(&mut buf).unwrap();
        let back = ControlWaveform::read_text(&buf[..]).unwrap();
        assert_eq!(w, back);
    }
}
