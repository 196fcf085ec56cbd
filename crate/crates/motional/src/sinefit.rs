//! Least-squares fitting of exponentially damped sinusoids,
//! A exp(-t/tau) sin(2 pi t / T + phi) + C0, by Levenberg-Marquardt with
//! an analytic Jacobian. The damping enters as a rate r = 1/tau, which
//! stays well conditioned in the undamped limit.

use crate::error::{Error, Result};
use nalgebra::{SMatrix, SVector};
use std::f64::consts::PI;
use std::io::Write;

/// Damping rate below which the decay is not resolvable from the data;
/// tau is pinned to 1/RATE_FLOOR and flagged.
const RATE_FLOOR: f64 = 1e-6;

/// Fitted parameters of A exp(-t/tau) sin(2 pi t/T + phi) + C0 with
/// 1-sigma confidence intervals from the local quadratic model.
#[derive(Debug, Clone)]
pub struct DampedSineFit {
    pub amplitude: f64,
    /// Decay time (ms); pinned at its upper bound when the data shows no
    /// measurable damping (see `no_measurable_damping`).
    pub tau: f64,
    /// Period (ms).
    pub period: f64,
    /// Phase (rad).
    pub phase: f64,
    pub offset: f64,
    /// 1-sigma confidence intervals for (amplitude, damping rate 1/tau,
    /// period, phase, offset).
    pub sigma: [f64; 5],
    /// Residual norm sqrt(sum of squared residuals).
    pub residual_norm: f64,
    pub no_measurable_damping: bool,
}

impl DampedSineFit {
    pub fn damping_rate(&self) -> f64 {
        1.0 / self.tau
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        self.amplitude * (-t / self.tau).exp() * (2.0 * PI * t / self.period + self.phase).sin()
            + self.offset
    }

    /// Key-value report with confidence intervals.
    pub fn write_report<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "amplitude = {:.9} +- {:.3e}", self.amplitude, self.sigma[0])?;
        writeln!(
            w,
            "damping_rate_per_ms = {:.9} +- {:.3e}",
            self.damping_rate(),
            self.sigma[1]
        )?;
        writeln!(w, "tau_ms = {:.9}", self.tau)?;
        writeln!(w, "period_ms = {:.9} +- {:.3e}", self.period, self.sigma[2])?;
        writeln!(w, "phase_rad = {:.9} +- {:.3e}", self.phase, self.sigma[3])?;
        writeln!(w, "offset = {:.9} +- {:.3e}", self.offset, self.sigma[4])?;
        writeln!(w, "residual_norm = {:.6e}", self.residual_norm)?;
        writeln!(w, "no_measurable_damping = {}", self.no_measurable_damping)?;
        Ok(())
    }
}

fn model(p: &SVector<f64, 5>, t: f64) -> f64 {
    let (a, r, period, phi, c0) = (p[0], p[1], p[2], p[3], p[4]);
    a * (-r * t).exp() * (2.0 * PI * t / period + phi).sin() + c0
}

fn jacobian_row(p: &SVector<f64, 5>, t: f64) -> SVector<f64, 5> {
    let (a, r, period, phi, _) = (p[0], p[1], p[2], p[3], p[4]);
    let envelope = (-r * t).exp();
    let arg = 2.0 * PI * t / period + phi;
    let (s, c) = arg.sin_cos();
    SVector::<f64, 5>::from([
        envelope * s,
        -a * t * envelope * s,
        -a * envelope * c * 2.0 * PI * t / (period * period),
        a * envelope * c,
        1.0,
    ])
}

/// Least-squares fit of a damped sine to `(times, values)` samples.
///
/// Needs at least 8 samples spanning at least one oscillation period.
/// The initial period comes from the peak of the discrete spectrum of the
/// mean-subtracted data; amplitude, phase and offset follow from moments.
pub fn fit_damped_sine(times: &[f64], values: &[f64]) -> Result<DampedSineFit> {
    if times.len() != values.len() {
        return Err(Error::InvalidInput(
            "times and values differ in length".into(),
        ));
    }
    let n = times.len();
    if n < 8 {
        return Err(Error::InvalidInput(format!(
            "damped-sine fit needs >= 8 samples, got {n}"
        )));
    }
    if !times.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidInput(
            "sample times must be strictly increasing".into(),
        ));
    }
    let span = times[n - 1] - times[0];

    // --- initial guesses ---
    let mean = values.iter().sum::<f64>() / n as f64;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let amp0 = 0.5 * (hi - lo).max(1e-30);

    // discrete spectrum peak on a dense frequency grid
    let min_dt = times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let f_max = 0.5 / min_dt;
    let f_min = 0.5 / span;
    let n_freq = 4000;
    let mut best = (f_min, 0.0);
    for j in 0..n_freq {
        let f = f_min + (f_max - f_min) * j as f64 / (n_freq - 1) as f64;
        let (mut cs, mut ss) = (0.0, 0.0);
        for (&t, &v) in times.iter().zip(values) {
            let (s, c) = (2.0 * PI * f * t).sin_cos();
            cs += (v - mean) * c;
            ss += (v - mean) * s;
        }
        let power = cs * cs + ss * ss;
        if power > best.1 {
            best = (f, power);
        }
    }
    let period0 = 1.0 / best.0;
    if period0 > span {
        return Err(Error::InvalidInput(format!(
            "data spans {span} ms but the dominant period is {period0:.3} ms; \
             need at least one full period"
        )));
    }
    // phase from quadratures at the peak frequency
    let (mut cs, mut ss) = (0.0, 0.0);
    for (&t, &v) in times.iter().zip(values) {
        let (s, c) = (2.0 * PI * best.0 * t).sin_cos();
        cs += (v - mean) * c;
        ss += (v - mean) * s;
    }
    let phase0 = cs.atan2(ss);
    // damping from the envelope of the two data halves
    let half = n / 2;
    let spread = |vs: &[f64]| -> f64 {
        let m = vs.iter().sum::<f64>() / vs.len() as f64;
        (vs.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vs.len() as f64).sqrt()
    };
    let (s1, s2) = (spread(&values[..half]), spread(&values[half..]));
    let rate0 = if s1 > 0.0 && s2 > 0.0 && s2 < s1 {
        ((s1 / s2).ln() / (0.5 * span)).clamp(0.0, 10.0 / span)
    } else {
        0.0
    };

    let mut p = SVector::<f64, 5>::from([amp0, rate0, period0, phase0, mean]);

    // --- Levenberg-Marquardt ---
    let ssr_of = |p: &SVector<f64, 5>| -> f64 {
        times
            .iter()
            .zip(values)
            .map(|(&t, &v)| (model(p, t) - v).powi(2))
            .sum()
    };
    let mut ssr = ssr_of(&p);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut last_rel_drop = f64::INFINITY;
    for _ in 0..400 {
        let mut jtj = SMatrix::<f64, 5, 5>::zeros();
        let mut jte = SVector::<f64, 5>::zeros();
        for (&t, &v) in times.iter().zip(values) {
            let row = jacobian_row(&p, t);
            let e = model(&p, t) - v;
            jtj += row * row.transpose();
            jte += row * e;
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for i in 0..5 {
                damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = damped.lu().solve(&(-jte)) else {
                lambda *= 4.0;
                continue;
            };
            let mut trial = p + step;
            trial[1] = trial[1].max(0.0); // no negative damping rates
            trial[2] = trial[2].max(1e-9); // period stays positive
            let trial_ssr = ssr_of(&trial);
            if trial_ssr < ssr {
                last_rel_drop = (ssr - trial_ssr) / ssr.max(1e-300);
                p = trial;
                ssr = trial_ssr;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if last_rel_drop < 1e-9 {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            converged = true; // no descent direction left at any damping
        }
        if converged {
            break;
        }
    }
    // a slow tail of negligible improvements is a plateau, not a failure
    if !converged && last_rel_drop > 1e-6 {
        return Err(Error::NotConverged {
            context: "damped-sine fit".into(),
            residual: ssr.sqrt(),
        });
    }

    // local quadratic model: Cov = s^2 (J^T J)^-1
    let mut jtj = SMatrix::<f64, 5, 5>::zeros();
    for &t in times {
        let row = jacobian_row(&p, t);
        jtj += row * row.transpose();
    }
    let dof = (n as f64 - 5.0).max(1.0);
    let s2 = ssr / dof;
    let sigma = match jtj.try_inverse() {
        Some(inv) => {
            let mut s = [0.0; 5];
            for i in 0..5 {
                s[i] = (s2 * inv[(i, i)].max(0.0)).sqrt();
            }
            s
        }
        None => [f64::NAN; 5],
    };

    // canonicalize: positive amplitude, phase in (-pi, pi]
    let (mut a, r, period, mut phi, c0) = (p[0], p[1], p[2], p[3], p[4]);
    if a < 0.0 {
        a = -a;
        phi += PI;
    }
    phi = crate::wavefunction::wrap_phase(phi);
    let no_damping = r < RATE_FLOOR;
    let tau = 1.0 / r.max(RATE_FLOOR);

    Ok(DampedSineFit {
        amplitude: a,
        tau,
        period,
        phase: phi,
        offset: c0,
        sigma,
        residual_norm: ssr.sqrt(),
        no_measurable_damping: no_damping,
    })
}
