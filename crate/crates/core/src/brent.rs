//! Brent's bounded scalar minimizer (golden section with successive parabolic
//! interpolation), after the classic `fmin` routine.
//!
//! The objective receives the iteration index alongside the abscissa so that
//! callers can scale per-evaluation effort with the search progress. Every
//! iteration after the first evaluation shrinks the bracket.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrentOptions {
    /// Absolute tolerance on the abscissa.
    pub xtol: f64,
    pub max_evaluations: usize,
}

impl Default for BrentOptions {
    fn default() -> Self {
        Self {
            xtol: 1e-5,
            max_evaluations: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrentMinimum {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` on `[lower, upper]`. `f(x, i)` is called with `i = 0` for the
/// first evaluation and `i = k` for the k-th bracket-narrowing iteration.
pub fn minimize_bounded<F, E>(
    mut f: F,
    lower: f64,
    upper: f64,
    opts: BrentOptions,
) -> Result<BrentMinimum, E>
where
    F: FnMut(f64, usize) -> Result<f64, E>,
{
    assert!(lower <= upper, "empty interval [{lower}, {upper}]");
    let sqrt_eps = f64::EPSILON.sqrt();
    let golden = 0.5 * (3.0 - 5f64.sqrt());

    let (mut a, mut b) = (lower, upper);
    // x: best so far, w: second best, v: previous w
    let mut v = a + golden * (b - a);
    let mut w = v;
    let mut x = v;
    let mut fx = f(x, 0)?;
    let (mut fv, mut fw) = (fx, fx);
    let mut evaluations = 1;
    let (mut d, mut e) = (0.0f64, 0.0f64);

    let mut xm = 0.5 * (a + b);
    let mut tol1 = sqrt_eps * x.abs() + opts.xtol / 3.0;
    let mut tol2 = 2.0 * tol1;
    let mut converged = true;

    while (x - xm).abs() > tol2 - 0.5 * (b - a) {
        let mut use_golden = true;
        if e.abs() > tol1 {
            use_golden = false;
            let mut r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            r = e;
            e = d;
            if p.abs() < (0.5 * q * r).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = tol1 * sign_or_one(xm - x);
                }
            } else {
                use_golden = true;
            }
        }
        if use_golden {
            e = if x >= xm { a - x } else { b - x };
            d = golden * e;
        }
        let u = x + sign_or_one(d) * d.abs().max(tol1);
        let fu = f(u, evaluations)?;
        evaluations += 1;

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }

        xm = 0.5 * (a + b);
        tol1 = sqrt_eps * x.abs() + opts.xtol / 3.0;
        tol2 = 2.0 * tol1;
        if evaluations >= opts.max_evaluations {
            converged = false;
            break;
        }
    }

    Ok(BrentMinimum {
        x,
        fx,
        evaluations,
        converged,
    })
}

fn sign_or_one(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn run(f: impl Fn(f64) -> f64, a: f64, b: f64, xtol: f64) -> BrentMinimum {
        minimize_bounded::<_, Infallible>(
            |x, _| Ok(f(x)),
            a,
            b,
            BrentOptions {
                xtol,
                ..BrentOptions::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn quadratic_minimum() {
        let m = run(|x| (x - 2.0).powi(2) + 1.0, 0.0, 10.0, 1e-8);
        assert!((m.x - 2.0).abs() < 1e-6);
        assert!((m.fx - 1.0).abs() < 1e-12);
        assert!(m.converged);
    }

    #[test]
    fn kinked_function() {
        let m = run(|x| (x - 3.3).abs(), 0.0, 10.0, 1e-6);
        assert!((m.x - 3.3).abs() < 1e-5);
    }

    #[test]
    fn monotone_function_approaches_boundary() {
        let m = run(|x| x, 0.0, 10.0, 1e-2);
        assert!(m.x < 0.02 && m.x > 0.0);
        let m = run(|x| -x, 0.0, 10.0, 1e-2);
        assert!(m.x > 9.98 && m.x < 10.0);
    }

    #[test]
    fn iteration_indices_are_sequential() {
        let mut seen = Vec::new();
        minimize_bounded::<_, Infallible>(
            |x, i| {
                seen.push(i);
                Ok((x - 1.0).powi(2))
            },
            0.0,
            10.0,
            BrentOptions {
                xtol: 1e-3,
                max_evaluations: 500,
            },
        )
        .unwrap();
        assert!(seen.len() > 3);
        assert!(seen.iter().enumerate().all(|(k, &i)| k == i));
    }

    #[test]
    fn respects_evaluation_budget() {
        let m = minimize_bounded::<_, Infallible>(
            |x, _| Ok((x - 7.0).powi(2)),
            0.0,
            10.0,
            BrentOptions {
                xtol: 1e-12,
                max_evaluations: 4,
            },
        )
        .unwrap();
        assert_eq!(m.evaluations, 4);
        assert!(!m.converged);
    }

    #[test]
    fn errors_propagate() {
        let r: Result<BrentMinimum, &str> =
            minimize_bounded(|_, i| if i == 2 { Err("boom") } else { Ok(1.0) }, 0.0, 1.0, BrentOptions::default());
        assert_eq!(r.unwrap_err(), "boom");
    }
}
