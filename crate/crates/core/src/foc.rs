//! Instantaneous controls from states and costates.
//!
//! [`solve_controls`] resolves the first-order conditions `H_c = H_s = H_l = 0` in closed
//! form. Adding `H_s` and `H_l` gives `(1-β) λ₁ k^β X^(-β) (l-s) = λ₂`; combined with
//! `H_s = 0` this yields `(l-s)^γ = λ₂ h / l`. Substituting `l = λ₂ h / w^γ` (with
//! `w = l - s`) leaves a pure power law in `w`.
//!
//! [`brute_force_controls`] maximizes the Hamiltonian directly and serves as an
//! independent oracle. It only agrees with the closed form where the interior critical
//! point is a maximum, which is the case iff `β(2+γ) > 1`; below that the critical point
//! is a saddle in effective labor and the oracle reports a boundary optimum.

use crate::error::{domain, Error, Result};
use crate::model::{hamiltonian, Controls, ExtendedState, Params};
use crate::scalar::Real;

fn check_positive<T: Real>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(domain(name, v.as_f64()))
    }
}

/// Interior solution of the first-order conditions at `(k, h, λ₁, λ₂)`.
pub fn solve_controls<T: Real>(
    p: &Params<T>,
    k: T,
    h: T,
    lambda1: T,
    lambda2: T,
) -> Result<Controls<T>> {
    check_positive("physical capital k must be positive", k)?;
    check_positive("human capital h must be positive", h)?;
    check_positive("costate lambda1 must be positive", lambda1)?;
    check_positive("costate lambda2 must be positive", lambda2)?;
    let denom = p.control_exponent_denominator();
    if denom == T::zero() {
        return Err(Error::DegenerateExponent);
    }
    let one = T::one();

    let c = lambda1.powf(-one / p.sigma);
    let log_w =
        ((one - p.beta) * lambda2.ln() - (one - p.beta).ln() - lambda1.ln() - p.beta * k.ln())
            / denom;
    let w = log_w.exp();
    let l = (lambda2.ln() + h.ln() - p.gamma * log_w).exp();
    let s = l - w;
    if !(s >= T::zero()) || !w.is_finite() || !l.is_finite() {
        return Err(Error::InfeasibleDistraction {
            s: s.as_f64(),
            l: l.as_f64(),
        });
    }
    if ((l - s) - w).abs() * (one + p.gamma) > T::epsilon() * T::lit(1e5) * w {
        return Err(domain(
            "effective labor l - s is below the resolution of l",
            w.as_f64(),
        ));
    }
    Ok(Controls { c, s, l })
}

/// Search box and resolution for [`brute_force_controls`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub c: (T, T),
    pub s: (T, T),
    pub l: (T, T),
    /// Grid points per axis.
    pub points: usize,
    /// Relative step size at which the local refinement stops.
    pub refine_tol: T,
}

impl<T: Real> GridSpec<T> {
    /// Cube `[lo, hi]` on the `c` and `l` axes and `[0, hi]` on the `s` axis.
    pub fn uniform(lo: T, hi: T, points: usize) -> Self {
        Self {
            c: (lo, hi),
            s: (T::zero(), hi),
            l: (lo, hi),
            points,
            refine_tol: T::lit(1e-12),
        }
    }
}

fn axis<T: Real>(range: (T, T), n: usize) -> Vec<T> {
    let step = (range.1 - range.0) / T::from_usize(n - 1).unwrap();
    (0..n)
        .map(|i| range.0 + step * T::from_usize(i).unwrap())
        .collect()
}

/// Maximizes the Hamiltonian over a dense `(c, s, l)` grid and polishes the best point with
/// a Hooke-Jeeves pattern search restricted to `0 <= s < l` and the grid box.
///
/// Returns [`Error::NoInteriorMaximum`] when the polished maximizer sits on `s = 0`,
/// on `s = l`, or on the edge of the box.
pub fn brute_force_controls<T: Real>(
    p: &Params<T>,
    k: T,
    h: T,
    lambda1: T,
    lambda2: T,
    grid: &GridSpec<T>,
) -> Result<Controls<T>> {
    check_positive("physical capital k must be positive", k)?;
    check_positive("human capital h must be positive", h)?;
    check_positive("costate lambda1 must be positive", lambda1)?;
    check_positive("costate lambda2 must be positive", lambda2)?;
    if grid.points < 3 {
        return Err(Error::InvalidArgument(
            "grid needs at least 3 points per axis".into(),
        ));
    }
    let xs = ExtendedState::new(T::zero(), k, h, lambda1, lambda2);
    let lo = [grid.c.0, grid.s.0, grid.l.0];
    let hi = [grid.c.1, grid.s.1, grid.l.1];
    let feasible = |v: &[T; 3]| {
        (0..3).all(|i| v[i] >= lo[i] && v[i] <= hi[i]) && v[1] >= T::zero() && v[1] < v[2]
    };
    let objective = |v: &[T; 3]| -> Option<T> {
        if !feasible(v) {
            return None;
        }
        hamiltonian(p, &xs, &Controls::new(v[0], v[1], v[2]))
            .ok()
            .filter(|val| val.is_finite())
    };

    let cs = axis(grid.c, grid.points);
    let ss = axis(grid.s, grid.points);
    let ls = axis(grid.l, grid.points);
    let mut best: Option<([T; 3], T)> = None;
    for &c in &cs {
        for &s in &ss {
            for &l in &ls {
                let v = [c, s, l];
                if let Some(val) = objective(&v) {
                    if best.is_none_or(|(_, b)| val > b) {
                        best = Some((v, val));
                    }
                }
            }
        }
    }
    let (start, start_val) =
        best.ok_or_else(|| Error::InvalidArgument("grid contains no feasible point".into()))?;

    let n = T::from_usize(grid.points - 1).unwrap();
    let spacing = [
        (hi[0] - lo[0]) / n,
        (hi[1] - lo[1]) / n,
        (hi[2] - lo[2]) / n,
    ];
    let (x, _) = hooke_jeeves(&objective, start, start_val, spacing, grid.refine_tol);

    // a maximizer pinned within a few rounding steps of a constraint counts as a boundary
    let pin = T::lit(1e-7);
    let on_edge =
        (0..3).any(|i| (x[i] - lo[i]) <= pin * spacing[i] || (hi[i] - x[i]) <= pin * spacing[i]);
    let on_s_zero = x[1] <= pin * spacing[1];
    let on_w_zero = x[2] - x[1] <= pin * spacing[2];
    if on_edge || on_s_zero || on_w_zero {
        return Err(Error::NoInteriorMaximum {
            c: x[0].as_f64(),
            s: x[1].as_f64(),
            l: x[2].as_f64(),
        });
    }
    Ok(Controls::new(x[0], x[1], x[2]))
}

/// Pattern search maximizing `f`; moves that leave the feasible set evaluate to `None`.
fn hooke_jeeves<T, F>(f: &F, start: [T; 3], start_val: T, initial: [T; 3], rtol: T) -> ([T; 3], T)
where
    T: Real,
    F: Fn(&[T; 3]) -> Option<T>,
{
    let half = T::lit(0.5);
    let mut step = initial;
    let mut base = start;
    let mut base_val = start_val;
    let explore = |point: [T; 3], val: T, step: &[T; 3]| -> ([T; 3], T) {
        let mut x = point;
        let mut fx = val;
        for i in 0..3 {
            for dir in [T::one(), -T::one()] {
                let mut trial = x;
                trial[i] = trial[i] + dir * step[i];
                if let Some(ft) = f(&trial) {
                    if ft > fx {
                        x = trial;
                        fx = ft;
                        break;
                    }
                }
            }
        }
        (x, fx)
    };

    for _ in 0..100_000 {
        let (x, fx) = explore(base, base_val, &step);
        if fx > base_val {
            // pattern moves along the improving direction while they keep paying off
            let mut prev = base;
            let mut cur = x;
            let mut cur_val = fx;
            loop {
                let mut pattern = cur;
                for i in 0..3 {
                    pattern[i] = cur[i] + (cur[i] - prev[i]);
                }
                let pattern_val = match f(&pattern) {
                    Some(v) => v,
                    None => break,
                };
                let (y, fy) = explore(pattern, pattern_val, &step);
                if fy > cur_val {
                    prev = cur;
                    cur = y;
                    cur_val = fy;
                } else {
                    break;
                }
            }
            base = cur;
            base_val = cur_val;
        } else {
            let mut done = true;
            for i in 0..3 {
                step[i] = step[i] * half;
                if step[i] > rtol * base[i].abs().max(initial[i]) {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
    }
    (base, base_val)
}
