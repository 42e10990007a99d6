//! Primitive model functions: payoff, technology, effort, the current-value Hamiltonian
//! with its analytic partial derivatives, and the right-hand side of the optimality system.
//!
//! Nothing here clamps its inputs. Points outside the feasible region are reported as
//! [`Error::Domain`](crate::Error::Domain) so that solver bugs surface instead of being projected away.

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Model primitives.
///
/// * `sigma` – curvature of the consumption payoff (`> 0`, `!= 1`)
/// * `gamma` – curvature of the displeasure of effective labor (`> 0`)
/// * `rho` – continuous-time discount rate (`0 < rho < 1`)
/// * `beta` – capital share in production (`0 < beta < 1`)
///
/// The fields are public and unchecked; [`Params::check_domain`] enforces the basic
/// domain and `validate_params` reports on the balanced-growth regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params<T> {
    pub sigma: T,
    pub gamma: T,
    pub rho: T,
    pub beta: T,
}

impl<T: Real> Params<T> {
    pub fn new(sigma: T, gamma: T, rho: T, beta: T) -> Self {
        Self {
            sigma,
            gamma,
            rho,
            beta,
        }
    }

    /// Fails on the first primitive outside its basic domain.
    pub fn check_domain(&self) -> Result<()> {
        let (zero, one) = (T::zero(), T::one());
        let finite = |v: T| v.is_finite();
        if !finite(self.sigma) || self.sigma <= zero || self.sigma == one {
            return Err(domain(
                "sigma must be positive and different from 1",
                self.sigma.as_f64(),
            ));
        }
        if !finite(self.gamma) || self.gamma <= zero {
            return Err(domain("gamma must be positive", self.gamma.as_f64()));
        }
        if !finite(self.rho) || self.rho <= zero || self.rho >= one {
            return Err(domain("rho must lie in (0, 1)", self.rho.as_f64()));
        }
        if !finite(self.beta) || self.beta <= zero || self.beta >= one {
            return Err(domain("beta must lie in (0, 1)", self.beta.as_f64()));
        }
        Ok(())
    }

    /// `1 - sigma (2 + gamma)`, the denominator of every closed-form growth rate.
    pub fn growth_denominator(&self) -> T {
        T::one() - self.sigma * (T::lit(2.0) + self.gamma)
    }

    /// `1 - beta (2 + gamma)`, the exponent denominator of the control solution.
    pub fn control_exponent_denominator(&self) -> T {
        T::one() - self.beta * (T::lit(2.0) + self.gamma)
    }
}

/// Physical capital `k` and human capital `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapitalState<T> {
    pub k: T,
    pub h: T,
}

/// Shadow prices of physical (`lambda1`) and human (`lambda2`) capital.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Costates<T> {
    pub lambda1: T,
    pub lambda2: T,
}

/// Consumption `c`, distracting time `s` and labor supply `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls<T> {
    pub c: T,
    pub s: T,
    pub l: T,
}

impl<T: Real> Controls<T> {
    pub fn new(c: T, s: T, l: T) -> Self {
        Self { c, s, l }
    }

    /// Effective labor `l - s`.
    pub fn effective_labor(&self) -> T {
        self.l - self.s
    }
}

/// Time together with the state of the four-dimensional optimality system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedState<T> {
    pub t: T,
    pub state: CapitalState<T>,
    pub costates: Costates<T>,
}

impl<T: Real> ExtendedState<T> {
    pub fn new(t: T, k: T, h: T, lambda1: T, lambda2: T) -> Self {
        Self {
            t,
            state: CapitalState { k, h },
            costates: Costates { lambda1, lambda2 },
        }
    }

    /// `(k, h, lambda1, lambda2)`.
    pub fn to_array(&self) -> [T; 4] {
        [
            self.state.k,
            self.state.h,
            self.costates.lambda1,
            self.costates.lambda2,
        ]
    }

    pub fn from_array(t: T, v: [T; 4]) -> Self {
        Self::new(t, v[0], v[1], v[2], v[3])
    }
}

/// Analytic partial derivatives of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianPartials<T> {
    pub c: T,
    pub s: T,
    pub l: T,
    pub k: T,
    pub h: T,
}

/// Time derivatives of `(k, h, lambda1, lambda2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative<T> {
    pub k: T,
    pub h: T,
    pub lambda1: T,
    pub lambda2: T,
}

impl<T: Real> StateDerivative<T> {
    pub fn to_array(&self) -> [T; 4] {
        [self.k, self.h, self.lambda1, self.lambda2]
    }
}

fn check_capital<T: Real>(st: &CapitalState<T>) -> Result<()> {
    if !(st.k > T::zero()) || !st.k.is_finite() {
        return Err(domain("physical capital k must be positive", st.k.as_f64()));
    }
    if !(st.h > T::zero()) || !st.h.is_finite() {
        return Err(domain("human capital h must be positive", st.h.as_f64()));
    }
    Ok(())
}

/// Requires `c > 0`, `l > 0`, `s >= 0` and `l - s > 0`.
fn check_controls<T: Real>(ctr: &Controls<T>) -> Result<()> {
    if !(ctr.c > T::zero()) || !ctr.c.is_finite() {
        return Err(domain("consumption c must be positive", ctr.c.as_f64()));
    }
    if !(ctr.l > T::zero()) || !ctr.l.is_finite() {
        return Err(domain("labor l must be positive", ctr.l.as_f64()));
    }
    if !(ctr.s >= T::zero()) || !ctr.s.is_finite() {
        return Err(domain(
            "distracting time s must be nonnegative",
            ctr.s.as_f64(),
        ));
    }
    if !(ctr.l - ctr.s > T::zero()) {
        return Err(domain(
            "effective labor l - s must be positive",
            (ctr.l - ctr.s).as_f64(),
        ));
    }
    Ok(())
}

/// Instantaneous payoff `c^(1-σ)/(1-σ) - (l-s)^(1+γ)/(1+γ)`.
///
/// Zero effective labor (`s == l`) is accepted here, since the payoff is finite there.
pub fn utility<T: Real>(p: &Params<T>, ctr: &Controls<T>) -> Result<T> {
    if !(ctr.c > T::zero()) || !ctr.c.is_finite() {
        return Err(domain("consumption c must be positive", ctr.c.as_f64()));
    }
    if !(ctr.l > T::zero()) {
        return Err(domain("labor l must be positive", ctr.l.as_f64()));
    }
    if !(ctr.s >= T::zero()) || ctr.s > ctr.l {
        return Err(domain(
            "distracting time s must lie in [0, l]",
            ctr.s.as_f64(),
        ));
    }
    let one = T::one();
    let w = ctr.l - ctr.s;
    Ok(ctr.c.powf(one - p.sigma) / (one - p.sigma) - w.powf(one + p.gamma) / (one + p.gamma))
}

/// Effective human-capital input `X = (h/l)(l-s)^2`.
pub(crate) fn effective_input<T: Real>(h: T, ctr: &Controls<T>) -> T {
    let w = ctr.l - ctr.s;
    h / ctr.l * w * w
}

/// Output `y = k^β [(h/l)(l-s)^2]^(1-β)`.
pub fn production<T: Real>(p: &Params<T>, st: &CapitalState<T>, ctr: &Controls<T>) -> Result<T> {
    check_capital(st)?;
    check_controls(ctr)?;
    let x = effective_input(st.h, ctr);
    Ok(st.k.powf(p.beta) * x.powf(T::one() - p.beta))
}

/// Share of effort allocated to goods production, `1 - s/l`.
pub fn effort<T: Real>(s: T, l: T) -> Result<T> {
    if !(l > T::zero()) {
        return Err(domain("labor l must be positive", l.as_f64()));
    }
    if !(s >= T::zero()) || s > l {
        return Err(domain("distracting time s must lie in [0, l]", s.as_f64()));
    }
    Ok(T::one() - s / l)
}

/// Output per unit of capital, `k^(β-1) X^(1-β)`. Constant on a balanced path.
pub fn capital_productivity<T: Real>(
    p: &Params<T>,
    st: &CapitalState<T>,
    ctr: &Controls<T>,
) -> Result<T> {
    Ok(production(p, st, ctr)? / st.k)
}

/// Current-value Hamiltonian `V + λ₁(f - c) + λ₂ h s/l`.
pub fn hamiltonian<T: Real>(p: &Params<T>, xs: &ExtendedState<T>, ctr: &Controls<T>) -> Result<T> {
    let y = production(p, &xs.state, ctr)?;
    let v = utility(p, ctr)?;
    let Costates { lambda1, lambda2 } = xs.costates;
    Ok(v + lambda1 * (y - ctr.c) + lambda2 * xs.state.h * ctr.s / ctr.l)
}

/// Terms shared by the partials: `(w, X, A)` with `A = (1-β) λ₁ k^β X^(-β)`.
fn shared_terms<T: Real>(
    p: &Params<T>,
    xs: &ExtendedState<T>,
    ctr: &Controls<T>,
) -> Result<(T, T, T)> {
    check_capital(&xs.state)?;
    check_controls(ctr)?;
    let w = ctr.effective_labor();
    let x = effective_input(xs.state.h, ctr);
    let a = (T::one() - p.beta) * xs.costates.lambda1 * xs.state.k.powf(p.beta) * x.powf(-p.beta);
    Ok((w, x, a))
}

/// Analytic partials of the Hamiltonian with respect to `c, s, l, k, h`.
pub fn hamiltonian_partials<T: Real>(
    p: &Params<T>,
    xs: &ExtendedState<T>,
    ctr: &Controls<T>,
) -> Result<HamiltonianPartials<T>> {
    let (w, x, a) = shared_terms(p, xs, ctr)?;
    let one = T::one();
    let two = T::lit(2.0);
    let (k, h) = (xs.state.k, xs.state.h);
    let Costates { lambda1, lambda2 } = xs.costates;
    let Controls { c, s, l } = *ctr;
    let disutility = w.powf(p.gamma);

    let h_c = c.powf(-p.sigma) - lambda1;
    let h_s = disutility - two * a * h * w / l + lambda2 * h / l;
    let h_l = -disutility + a * h * (one - s * s / (l * l)) - lambda2 * h * s / (l * l);
    let h_k = lambda1 * p.beta * k.powf(p.beta - one) * x.powf(one - p.beta);
    let h_h = a * w * w / l + lambda2 * s / l;
    Ok(HamiltonianPartials {
        c: h_c,
        s: h_s,
        l: h_l,
        k: h_k,
        h: h_h,
    })
}

/// Right-hand side of the state and costate equations.
pub fn ode_rhs<T: Real>(
    p: &Params<T>,
    xs: &ExtendedState<T>,
    ctr: &Controls<T>,
) -> Result<StateDerivative<T>> {
    let (w, x, a) = shared_terms(p, xs, ctr)?;
    let one = T::one();
    let (k, h) = (xs.state.k, xs.state.h);
    let Costates { lambda1, lambda2 } = xs.costates;
    let Controls { c, s, l } = *ctr;

    let y = k.powf(p.beta) * x.powf(one - p.beta);
    let mpk = p.beta * k.powf(p.beta - one) * x.powf(one - p.beta);
    Ok(StateDerivative {
        k: y - c,
        h: h * s / l,
        lambda1: lambda1 * (p.rho - mpk),
        lambda2: lambda2 * p.rho - a * w * w / l - lambda2 * s / l,
    })
}

/// `(H_c, H_s, H_l)`; all three vanish exactly at an interior solution of the first-order
/// conditions.
pub fn foc_residuals<T: Real>(
    p: &Params<T>,
    xs: &ExtendedState<T>,
    ctr: &Controls<T>,
) -> Result<[T; 3]> {
    let d = hamiltonian_partials(p, xs, ctr)?;
    Ok([d.c, d.s, d.l])
}

/// Magnitudes of the largest additive term in each of `H_c`, `H_s`, `H_l`.
pub fn foc_term_scales<T: Real>(
    p: &Params<T>,
    xs: &ExtendedState<T>,
    ctr: &Controls<T>,
) -> Result<[T; 3]> {
    let (w, _, a) = shared_terms(p, xs, ctr)?;
    let h = xs.state.h;
    let Costates { lambda1, lambda2 } = xs.costates;
    let Controls { c, s, l } = *ctr;
    let disutility = w.powf(p.gamma);
    let s_terms = [disutility, T::lit(2.0) * a * h * w / l, lambda2 * h / l];
    let l_terms = [
        disutility,
        a * h * (T::one() - s * s / (l * l)),
        lambda2 * h * s / (l * l),
    ];
    let max_abs = |v: &[T]| v.iter().fold(T::zero(), |m, t| m.max(t.abs()));
    Ok([
        c.powf(-p.sigma).max(lambda1),
        max_abs(&s_terms),
        max_abs(&l_terms),
    ])
}

/// First-order residuals divided by the magnitude of their largest additive term.
pub fn normalized_foc_residuals<T: Real>(
    p: &Params<T>,
    xs: &ExtendedState<T>,
    ctr: &Controls<T>,
) -> Result<[T; 3]> {
    let r = foc_residuals(p, xs, ctr)?;
    let scale = foc_term_scales(p, xs, ctr)?;
    Ok([r[0] / scale[0], r[1] / scale[1], r[2] / scale[2]])
}
