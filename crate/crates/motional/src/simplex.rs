//! Derivative-free Nelder-Mead simplex minimization.
//!
//! Generic over the scalar type so it can be reused on plain `f64`
//! problems or in reduced precision; every consumer in this crate
//! instantiates it with `f64`.

use num_traits::Float;

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOpts<T> {
    /// Hard cap on cost evaluations.
    pub max_evals: usize,
    /// Converged when the simplex f-spread falls below this.
    pub f_tol: T,
    /// ... and the coordinate spread falls below this.
    pub x_tol: T,
}

impl Default for NelderMeadOpts<f64> {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            f_tol: 1e-12,
            x_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NmOutcome<T> {
    pub x: Vec<T>,
    pub fx: T,
    pub evals: usize,
    pub converged: bool,
}

/// Minimize `f` starting from `x0`, with the initial simplex spanned by
/// per-coordinate displacements `steps`. Uses the dimension-adaptive
/// reflection/expansion/contraction coefficients of Gao and Han, which
/// behave much better than the classic constants beyond ~10 dimensions.
pub fn minimize<T, F>(mut f: F, x0: &[T], steps: &[T], opts: &NelderMeadOpts<T>) -> NmOutcome<T>
where
    T: Float,
    F: FnMut(&[T]) -> T,
{
    let n = x0.len();
    assert!(n >= 1, "need at least one parameter");
    assert_eq!(steps.len(), n, "one initial step per parameter");

    let dim = T::from(n).unwrap();
    let one = T::one();
    let two = one + one;
    let half = one / two;
    let alpha = one; // reflection
    let beta = one + two / dim; // expansion
    let gamma = (T::from(0.75).unwrap() - half / dim).max(T::from(0.1).unwrap()); // contraction
    let delta = one - one / dim; // shrink

    let mut evals = 0usize;
    let mut eval = |x: &[T], evals: &mut usize| -> T {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    };

    // vertices: x0 plus x0 + steps[i] e_i
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    let f0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut xi = x0.to_vec();
        xi[i] = xi[i] + steps[i];
        let fi = eval(&xi, &mut evals);
        simplex.push((xi, fi));
        if evals >= opts.max_evals {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            let (x, fx) = simplex.swap_remove(0);
            return NmOutcome {
                x,
                fx,
                evals,
                converged: false,
            };
        }
    }

    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));

        let f_best = simplex[0].1;
        let f_worst = simplex[n].1;
        let f_spread = f_worst - f_best;
        let x_spread = (0..n)
            .map(|i| {
                let lo = simplex.iter().map(|(x, _)| x[i]).fold(T::infinity(), T::min);
                let hi = simplex
                    .iter()
                    .map(|(x, _)| x[i])
                    .fold(T::neg_infinity(), T::max);
                hi - lo
            })
            .fold(T::zero(), T::max);
        if f_spread < opts.f_tol && x_spread < opts.x_tol {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }

        // centroid of the n best vertices
        let mut centroid = vec![T::zero(); n];
        for (x, _) in simplex.iter().take(n) {
            for (c, &v) in centroid.iter_mut().zip(x) {
                *c = *c + v / dim;
            }
        }
        let worst = simplex[n].clone();

        let blend = |a: &[T], b: &[T], w: T| -> Vec<T> {
            a.iter()
                .zip(b)
                .map(|(&ca, &cb)| ca + w * (ca - cb))
                .collect()
        };

        let x_refl = blend(&centroid, &worst.0, alpha);
        let f_refl = eval(&x_refl, &mut evals);

        if f_refl < simplex[0].1 {
            // try to expand further along the same direction
            let x_exp = blend(&centroid, &worst.0, beta);
            let f_exp = eval(&x_exp, &mut evals);
            simplex[n] = if f_exp < f_refl {
                (x_exp, f_exp)
            } else {
                (x_refl, f_refl)
            };
        } else if f_refl < simplex[n - 1].1 {
            simplex[n] = (x_refl, f_refl);
        } else {
            // contraction, outside or inside depending on the reflection
            let (x_con, f_con) = if f_refl < worst.1 {
                let x = blend(&centroid, &worst.0, gamma);
                let fv = eval(&x, &mut evals);
                (x, fv)
            } else {
                let x = blend(&centroid, &worst.0, -gamma);
                let fv = eval(&x, &mut evals);
                (x, fv)
            };
            if f_con < worst.1.min(f_refl) {
                simplex[n] = (x_con, f_con);
            } else {
                // shrink everything toward the best vertex
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for (xi, &bi) in v.0.iter_mut().zip(&best) {
                        *xi = bi + delta * (*xi - bi);
                    }
                    v.1 = eval(&v.0, &mut evals);
                    if evals >= opts.max_evals {
                        break;
                    }
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let (x, fx) = simplex.swap_remove(0);
    NmOutcome {
        x,
        fx,
        evals,
        converged,
    }
}
