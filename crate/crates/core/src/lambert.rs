//! Principal branch of the Lambert W function on `[-1/e, inf)`.

use std::f64::consts::E;

use thiserror::Error;

const TOLERANCE: f64 = 1e-13;
const MAX_ITERATIONS: usize = 50;
const INV_E: f64 = 1.0 / E;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LambertError {
    #[error("W0({0}) is not real (argument below -1/e)")]
    Domain(f64),
    #[error("Halley iteration did not converge for W0({x}): residual {residual}")]
    NoConvergence { x: f64, residual: f64 },
}

/// `W0(x)`: the solution `w >= -1` of `w e^w = x`.
///
/// Halley iteration, seeded from the branch-point series
/// `-1 + p - p^2/3 + 11 p^3 / 72` with `p = sqrt(2 (e x + 1))` near `-1/e`
/// and from `ln(1 + x)` elsewhere.
pub fn lambert_w0(x: f64) -> Result<f64, LambertError> {
    if x.is_nan() || x < -INV_E {
        return Err(LambertError::Domain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let p2 = (2.0 * (E * x + 1.0)).max(0.0);
    if p2 == 0.0 {
        return Ok(-1.0);
    }
    let mut w = if x < -0.25 {
        let p = p2.sqrt();
        if p < 1e-6 {
            // Series error is O(p^4), below double precision here.
            return Ok(-1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p);
        }
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l = x.ln();
        l - l.ln()
    };

    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = (w - step).max(-1.0);
        let done = (next - w).abs() <= TOLERANCE * (1.0 + next.abs());
        w = next;
        if done {
            break;
        }
    }
    let residual = (w * w.exp() - x).abs();
    if residual > 1e-12 * (1.0 + x.abs()) {
        return Err(LambertError::NoConvergence { x, residual });
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bisection for `w e^w = x` on `[-1, 0]`; `w e^w` is increasing there.
    fn bisect(x: f64) -> f64 {
        let (mut lo, mut hi) = (-1.0f64, 0.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() < x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn fixed_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert_eq!(lambert_w0(-INV_E).unwrap(), -1.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matches_bisection() {
        let x = -2.0 * (-2.0f64).exp();
        let w = lambert_w0(x).unwrap();
        assert!((w - bisect(x)).abs() < 1e-12);
        assert!((w + 0.40638).abs() < 1e-5);
        for x in [-0.3678, -0.36, -0.3, -0.2, -0.1, -1e-3, -1e-9] {
            assert!((lambert_w0(x).unwrap() - bisect(x)).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn rejects_below_branch_point() {
        assert!(matches!(lambert_w0(-0.4), Err(LambertError::Domain(_))));
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn round_trip_grid() {
        let n = 10_000;
        for i in 0..=n {
            let x = -INV_E * i as f64 / n as f64;
            let w = lambert_w0(x).unwrap();
            assert!((-1.0..=0.0).contains(&w));
            assert!((w * w.exp() - x).abs() <= 1e-12, "x = {x}, w = {w}");
        }
    }

    #[test]
    fn positive_arguments() {
        for x in [0.5, 1.0, 10.0, 1e6] {
            let w = lambert_w0(x).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-12 * x);
        }
    }
}
