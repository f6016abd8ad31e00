//! Bracketed inversion of increasing functions.

use crate::error::{Error, Result};

/// Absolute residual a solution must reach.
pub const RESIDUAL_TOL: f64 = 1e-12;
/// Iteration cap for [`invert_increasing`].
pub const MAX_ITER: usize = 200;

/// Solves `f(t) = u` for an increasing `f` on `[lo, hi]`.
///
/// Bisection keeps a bracket at every step; a Newton step from `df` is taken
/// whenever it lands strictly inside the bracket. Iteration stops once the
/// bracket collapses to a few ulps, and the result is rejected if its
/// residual exceeds [`RESIDUAL_TOL`].
pub fn invert_increasing<F, D>(f: F, df: Option<D>, u: f64, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if u <= fa {
        return Ok(a);
    }
    if u >= fb {
        return Ok(b);
    }
    let mut t = 0.5 * (a + b);
    let mut best = (f64::INFINITY, t);
    for _ in 0..MAX_ITER {
        let ft = f(t);
        let resid = ft - u;
        if resid.abs() < best.0 {
            best = (resid.abs(), t);
        }
        if resid == 0.0 {
            return Ok(t);
        }
        if resid < 0.0 {
            a = t;
        } else {
            b = t;
        }
        if b - a <= 4.0 * f64::EPSILON * b.abs().max(1e-300) {
            break;
        }
        let mut next = 0.5 * (a + b);
        if let Some(d) = df.as_ref() {
            let slope = d(t);
            if slope.is_finite() && slope > 0.0 {
                let cand = t - resid / slope;
                if cand > a && cand < b {
                    next = cand;
                }
            }
        }
        if next == t {
            break;
        }
        t = next;
    }
    if best.0 <= RESIDUAL_TOL {
        Ok(best.1)
    } else {
        Err(Error::Convergence {
            iterations: MAX_ITER,
            residual: best.0,
        })
    }
}

/// Same as [`invert_increasing`] without derivative information.
pub fn bisect_increasing<F: Fn(f64) -> f64>(f: F, u: f64, lo: f64, hi: f64) -> Result<f64> {
    invert_increasing(f, None::<fn(f64) -> f64>, u, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_cube() {
        let t = invert_increasing(|x| x * x * x, Some(|x: f64| 3.0 * x * x), 0.125, 0.0, 1.0).unwrap();
        assert!((t - 0.5).abs() < 1e-14);
    }

    #[test]
    fn boundary_values() {
        assert_eq!(bisect_increasing(|x| x, 0.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(bisect_increasing(|x| x, 1.0, 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn flat_function_fails() {
        // Jumps from 0 to 1 at 0.5; 0.5 is never attained within tolerance.
        let r = bisect_increasing(|x| if x < 0.5 { 0.0 } else { 1.0 }, 0.5, 0.0, 1.0);
        assert!(matches!(r, Err(Error::Convergence { .. })));
    }
}
