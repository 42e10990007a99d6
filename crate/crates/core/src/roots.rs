//! Scalar root finding: geometric bracket expansion followed by Brent's method.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A sign-changing interval `[lo, hi]` with the function values at its ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
    pub f_lo: T,
    pub f_hi: T,
}

/// Widens `[center - step, center + step]` symmetrically, doubling the half-width each
/// round, until `f` changes sign or `max_rounds` is exhausted.
pub fn expand_bracket<T, F>(mut f: F, center: T, step: T, max_rounds: usize) -> Result<Bracket<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let two = T::lit(2.0);
    let mut half = step;
    let mut lo = center - half;
    let mut hi = center + half;
    for _ in 0..max_rounds {
        lo = center - half;
        hi = center + half;
        let f_lo = f(lo)?;
        let f_hi = f(hi)?;
        if f_lo.is_finite() && f_hi.is_finite() && f_lo * f_hi <= T::zero() {
            return Ok(Bracket { lo, hi, f_lo, f_hi });
        }
        half = half * two;
    }
    Err(Error::Bracketing {
        lo: lo.as_f64(),
        hi: hi.as_f64(),
    })
}

/// Brent's method on a sign-changing bracket. Stops once the bracket is narrower than
/// `rtol·|x| + atol` or the function vanishes exactly.
pub fn brent<T, F>(mut f: F, bracket: Bracket<T>, rtol: T, atol: T, max_iter: usize) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let zero = T::zero();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let three = T::lit(3.0);

    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (bracket.f_lo, bracket.f_hi);
    if fa == zero {
        return Ok(a);
    }
    if fb == zero {
        return Ok(b);
    }
    if fa * fb > zero {
        return Err(Error::Bracketing {
            lo: a.as_f64(),
            hi: b.as_f64(),
        });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for _ in 0..max_iter {
        if fb * fc > zero {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * T::epsilon() * b.abs() + half * (rtol * b.abs() + atol);
        let m = half * (c - b);
        if m.abs() <= tol || fb == zero {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            // inverse quadratic interpolation, or secant when only two points are distinct
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * m * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * m * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > zero {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (three * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol {
            b + d
        } else if m > zero {
            b + tol
        } else {
            b - tol
        };
        fb = f(b)?;
    }
    Err(Error::RootNotConverged {
        iterations: max_iter,
    })
}
