//! Central finite-difference check of the analytic Hamiltonian partials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    foc_term_scales, hamiltonian, hamiltonian_partials, Controls, ExtendedState, Params,
};

/// A state/costate/control point at which the Hamiltonian is differentiable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradPoint {
    pub state: ExtendedState<f64>,
    pub controls: Controls<f64>,
}

/// Draws `n` points with `k, h, λ₁, λ₂, c ∈ [0.2, 5]`, `l ∈ [0.3, 3]` and `s ∈ [0.01 l, 0.9 l)`.
pub fn random_points(seed: u64, n: usize) -> Vec<GradPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut draw = |lo: f64, hi: f64| rng.gen_range(lo..hi);
            let state = ExtendedState::new(
                0.0,
                draw(0.2, 5.0),
                draw(0.2, 5.0),
                draw(0.2, 5.0),
                draw(0.2, 5.0),
            );
            let c = draw(0.2, 5.0);
            let l = draw(0.3, 3.0);
            let s = draw(0.01, 0.9) * l;
            GradPoint {
                state,
                controls: Controls::new(c, s, l),
            }
        })
        .collect()
}

/// Names of the differentiated arguments, in the order used by [`GradcheckReport::worst`].
pub const COMPONENTS: [&str; 5] = ["c", "s", "l", "k", "h"];

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub points: usize,
    pub max_rel_error: f64,
    /// `(point index, component index)` of the largest error.
    pub worst: (usize, usize),
}

/// Central differences of `hamiltonian` in each of `c, s, l, k, h`, with step
/// `step · |argument|`.
pub fn finite_difference_partials(p: &Params<f64>, pt: &GradPoint, step: f64) -> Result<[f64; 5]> {
    let mut out = [0.0; 5];
    for (i, slot) in out.iter_mut().enumerate() {
        let eval = |delta: f64| -> Result<f64> {
            let mut xs = pt.state;
            let mut ctr = pt.controls;
            match i {
                0 => ctr.c += delta,
                1 => ctr.s += delta,
                2 => ctr.l += delta,
                3 => xs.state.k += delta,
                _ => xs.state.h += delta,
            }
            hamiltonian(p, &xs, &ctr)
        };
        let arg = match i {
            0 => pt.controls.c,
            1 => pt.controls.s,
            2 => pt.controls.l,
            3 => pt.state.state.k,
            _ => pt.state.state.h,
        };
        let h = step * arg.abs();
        if !(h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cannot difference H in {} at {arg}",
                COMPONENTS[i]
            )));
        }
        *slot = (eval(h)? - eval(-h)?) / (2.0 * h);
    }
    Ok(out)
}

/// Largest relative disagreement between analytic and finite-difference partials over
/// `points`. Errors are measured against the magnitude of the largest additive term of each
/// partial, so that near-cancelling partials do not inflate the ratio.
pub fn run_gradcheck(p: &Params<f64>, points: &[GradPoint], step: f64) -> Result<GradcheckReport> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let mut max_rel_error = 0.0f64;
    let mut worst = (0, 0);
    for (idx, pt) in points.iter().enumerate() {
        let analytic = hamiltonian_partials(p, &pt.state, &pt.controls)?;
        let analytic = [analytic.c, analytic.s, analytic.l, analytic.k, analytic.h];
        let numeric = finite_difference_partials(p, pt, step)?;
        let foc_scales = foc_term_scales(p, &pt.state, &pt.controls)?;
        let lambda2 = pt.state.costates.lambda2;
        let s_over_l = pt.controls.s / pt.controls.l;
        let scales = [
            foc_scales[0],
            foc_scales[1],
            foc_scales[2],
            analytic[3].abs(),
            (analytic[4] - lambda2 * s_over_l)
                .abs()
                .max(lambda2 * s_over_l),
        ];
        for j in 0..5 {
            let denom = scales[j].max(analytic[j].abs()).max(numeric[j].abs());
            let err = if denom > 0.0 {
                (analytic[j] - numeric[j]).abs() / denom
            } else {
                0.0
            };
            if err > max_rel_error || err.is_nan() {
                max_rel_error = err;
                worst = (idx, j);
            }
        }
    }
    Ok(GradcheckReport {
        points: points.len(),
        max_rel_error,
        worst,
    })
}
