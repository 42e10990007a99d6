//! Adaptive Dormand-Prince 5(4) integration of small fixed-size systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Step-size control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions<T, const N: usize> {
    pub rtol: T,
    pub atol: [T; N],
    /// Upper bound on a single step; `None` leaves steps bounded by the output spacing only.
    pub max_step: Option<T>,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Samples produced before the run finished or failed.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeRun<T, const N: usize> {
    pub samples: Samples<T, N>,
    pub stats: OdeStats,
    /// Set when the run stopped early; `samples` then holds everything up to the failure.
    pub failure: Option<Error>,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

// fifth-order weights; the seventh stage reuses them (first same as last)
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// difference between fifth- and fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = T::zero();
        for &(coef, k) in terms {
            acc = acc + T::lit(coef) * k[i];
        }
        out[i] = out[i] + h * acc;
    }
    out
}

struct Stepper<'a, T, F, const N: usize> {
    f: &'a mut F,
    opts: &'a OdeOptions<T, N>,
    stats: OdeStats,
}

impl<T, F, const N: usize> Stepper<'_, T, F, N>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    fn eval(&mut self, t: T, y: &[T; N]) -> Result<[T; N]> {
        self.stats.evaluations += 1;
        (self.f)(t, y)
    }

    /// One trial step from `(t, y)` with derivative `k1`. Returns the new state, its
    /// derivative and the scaled error norm.
    fn trial(&mut self, t: T, y: &[T; N], k1: &[T; N], h: T) -> Result<([T; N], [T; N], T)> {
        let k2 = self.eval(t + T::lit(C2) * h, &axpy(y, h, &[(A21, k1)]))?;
        let k3 = self.eval(t + T::lit(C3) * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
        let k4 = self.eval(
            t + T::lit(C4) * h,
            &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
        )?;
        let k5 = self.eval(
            t + T::lit(C5) * h,
            &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = self.eval(
            t + h,
            &axpy(
                y,
                h,
                &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        )?;
        let y_new = axpy(
            y,
            h,
            &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = self.eval(t + h, &y_new)?;
        let zero = [T::zero(); N];
        let err = axpy(
            &zero,
            h,
            &[
                (E1, k1),
                (E3, &k3),
                (E4, &k4),
                (E5, &k5),
                (E6, &k6),
                (E7, &k7),
            ],
        );
        let mut sum = T::zero();
        for i in 0..N {
            let scale = self.opts.atol[i] + self.opts.rtol * y[i].abs().max(y_new[i].abs());
            let r = err[i] / scale;
            sum = sum + r * r;
        }
        let norm = (sum / T::from_usize(N).unwrap()).sqrt();
        Ok((y_new, k7, norm))
    }
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` and records the state at each of `outputs`
/// (ascending, all `>= t0`). Steps land exactly on every output time.
pub fn dopri5<T, F, const N: usize>(
    mut f: F,
    t0: T,
    y0: [T; N],
    outputs: &[T],
    opts: &OdeOptions<T, N>,
) -> OdeRun<T, N>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    let mut stepper = Stepper {
        f: &mut f,
        opts,
        stats: OdeStats::default(),
    };
    let mut samples = Vec::with_capacity(outputs.len());
    let failure = run(&mut stepper, t0, y0, outputs, &mut samples).err();
    OdeRun {
        samples,
        stats: stepper.stats,
        failure,
    }
}

fn run<T, F, const N: usize>(
    st: &mut Stepper<'_, T, F, N>,
    t0: T,
    y0: [T; N],
    outputs: &[T],
    samples: &mut Vec<(T, [T; N])>,
) -> Result<()>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    let safety = T::lit(0.9);
    let min_factor = T::lit(0.2);
    let max_factor = T::lit(5.0);
    let fifth = T::lit(0.2);

    let mut t = t0;
    let mut y = y0;
    let mut k1 = match st.eval(t, &y) {
        Ok(k) => k,
        Err(e) => return Err(wrap(t, e)),
    };
    let span = outputs.last().map_or(T::zero(), |&t_last| t_last - t0);
    let mut h = initial_step(&y, &k1, span, st.opts);

    for &target in outputs {
        while t < target {
            if st.stats.accepted + st.stats.rejected >= st.opts.max_steps {
                return Err(Error::StepUnderflow {
                    t: t.as_f64(),
                    h: h.as_f64(),
                });
            }
            let remaining = target - t;
            let mut h_try = h.min(remaining);
            if let Some(max) = st.opts.max_step {
                h_try = h_try.min(max);
            }
            // snap to the output time when the leftover would be a sliver
            let last = h_try >= remaining * T::lit(0.999_999);
            if last {
                h_try = remaining;
            }
            if h_try <= T::lit(16.0) * T::epsilon() * t.abs().max(T::one()) {
                return Err(Error::StepUnderflow {
                    t: t.as_f64(),
                    h: h_try.as_f64(),
                });
            }
            let (y_new, k_new, err) = match st.trial(t, &y, &k1, h_try) {
                Ok(v) => v,
                Err(e) => {
                    // a failed evaluation inside the step is treated as a rejection first
                    st.stats.rejected += 1;
                    h = h_try * T::lit(0.25);
                    if h <= T::lit(16.0) * T::epsilon() * t.abs().max(T::one()) {
                        return Err(wrap(t, e));
                    }
                    continue;
                }
            };
            if err.is_finite() && err <= T::one() {
                st.stats.accepted += 1;
                t = if last { target } else { t + h_try };
                y = y_new;
                k1 = k_new;
                let factor = if err == T::zero() {
                    max_factor
                } else {
                    (safety * err.powf(-fifth)).max(min_factor).min(max_factor)
                };
                // keep the natural step size when the output time truncated this one
                if !last || h_try >= h {
                    h = h_try * factor;
                }
            } else {
                st.stats.rejected += 1;
                let factor = if err.is_finite() {
                    (safety * err.powf(-fifth)).max(min_factor)
                } else {
                    min_factor
                };
                h = h_try * factor;
            }
        }
        samples.push((t, y));
    }
    Ok(())
}

fn wrap(t: impl Real, e: Error) -> Error {
    match e {
        Error::StepUnderflow { .. } => e,
        other => Error::ControlFailure {
            t: t.as_f64(),
            source: Box::new(other),
        },
    }
}

fn initial_step<T: Real, const N: usize>(
    y: &[T; N],
    dy: &[T; N],
    span: T,
    opts: &OdeOptions<T, N>,
) -> T {
    let mut d0 = T::zero();
    let mut d1 = T::zero();
    for i in 0..N {
        let sc = opts.atol[i] + opts.rtol * y[i].abs();
        d0 = d0 + (y[i] / sc) * (y[i] / sc);
        d1 = d1 + (dy[i] / sc) * (dy[i] / sc);
    }
    let n = T::from_usize(N).unwrap();
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    if span > T::zero() {
        h.min(span)
    } else {
        h
    }
}

/// `n` evenly spaced times on `[t0, t1]`, both ends included.
pub fn linspace<T: Real>(t0: T, t1: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![t0],
        _ => {
            let step = (t1 - t0) / T::from_usize(n - 1).unwrap();
            let mut v: Vec<T> = (0..n)
                .map(|i| t0 + step * T::from_usize(i).unwrap())
                .collect();
            v[n - 1] = t1;
            v
        }
    }
}

/// Output times paired with the solution at each.
pub type Samples<T, const N: usize> = Vec<(T, [T; N])>;

/// Convenience wrapper that turns an early stop into an error.
pub fn dopri5_strict<T, F, const N: usize>(
    f: F,
    t0: T,
    y0: [T; N],
    outputs: &[T],
    opts: &OdeOptions<T, N>,
) -> Result<(Samples<T, N>, OdeStats)>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    let run = dopri5(f, t0, y0, outputs, opts);
    match run.failure {
        Some(e) => Err(e),
        None => Ok((run.samples, run.stats)),
    }
}
