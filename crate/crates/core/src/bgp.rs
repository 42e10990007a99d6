//! Closed-form balanced-growth quantities.
//!
//! Every rate below is a constant exponential growth rate (`ż/z`) along the balanced path.
//! Outside the `σ > 1, ρ < 1` regime the formulas are still evaluated, but
//! [`BgpRates::convergence_verified`] is false.

use crate::error::{domain, Error, Result};
use crate::model::Params;
use crate::scalar::Real;

/// Structured outcome of [`validate_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamValidation<T> {
    /// Basic domain: `σ > 0, σ ≠ 1, γ > 0, 0 < ρ < 1, 0 < β < 1`.
    pub domain_ok: bool,
    /// `1 - σ(2+γ) ≠ 0`.
    pub denominator_ok: bool,
    /// `σ > 1` and `ρ < 1`, under which the utility integral converges.
    pub convergence_regime: bool,
    /// Human-capital growth rate lies in `(0, 1)`, so that `0 < s < l` on the path.
    pub bgp_feasible: bool,
    pub h_hat: Option<T>,
}

impl<T> ParamValidation<T> {
    pub fn all_ok(&self) -> bool {
        self.domain_ok && self.denominator_ok && self.convergence_regime && self.bgp_feasible
    }

    /// Names of the failed checks, in a fixed order.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.domain_ok {
            out.push("domain");
        }
        if !self.denominator_ok {
            out.push("denominator");
        }
        if !self.convergence_regime {
            out.push("convergence_regime");
        }
        if !self.bgp_feasible {
            out.push("bgp_feasible");
        }
        out
    }
}

pub fn validate_params<T: Real>(p: &Params<T>) -> ParamValidation<T> {
    let domain_ok = p.check_domain().is_ok();
    let denom = p.growth_denominator();
    let denominator_ok = denom != T::zero() && denom.is_finite();
    let convergence_regime = p.sigma > T::one() && p.rho < T::one();
    let h_hat = if denominator_ok {
        Some(human_capital_rate(p, denom))
    } else {
        None
    };
    let bgp_feasible = matches!(h_hat, Some(g) if g > T::zero() && g < T::one());
    ParamValidation {
        domain_ok,
        denominator_ok,
        convergence_regime,
        bgp_feasible,
        h_hat,
    }
}

fn human_capital_rate<T: Real>(p: &Params<T>, denom: T) -> T {
    (p.gamma + p.sigma) * (p.rho - T::one()) / denom
}

/// Balanced-growth rates and levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BgpRates<T> {
    /// Growth rate of human capital, also the constant share `s/l`.
    pub h_hat: T,
    /// Common growth rate of consumption, physical capital and output.
    pub theta: T,
    /// Common growth rate of `l`, `s` and `l - s`.
    pub l_hat: T,
    pub lambda1_hat: T,
    pub lambda2_hat: T,
    /// Exponent of the discounted utility integrand; negative in the convergent regime.
    pub x: T,
    /// `k^(β-1) X^(1-β) = (ρ + σθ)/β`, the output-capital ratio pinned by the costate law
    /// for `λ₁`.
    pub mpk: T,
    /// Constant effort share `1 - ĥ`.
    pub effort_bgp: T,
    /// Intertemporal elasticity of substitution of distracting time, `(1-ĥ)/(γĥ)`.
    pub ies: T,
    /// False outside `σ > 1, ρ < 1`.
    pub convergence_verified: bool,
}

fn check_rates_domain<T: Real>(p: &Params<T>) -> Result<()> {
    let zero = T::zero();
    if !p.sigma.is_finite() || p.sigma <= zero || p.sigma == T::one() {
        return Err(domain(
            "sigma must be positive and different from 1",
            p.sigma.as_f64(),
        ));
    }
    if !p.gamma.is_finite() || p.gamma <= zero {
        return Err(domain("gamma must be positive", p.gamma.as_f64()));
    }
    if !p.rho.is_finite() || p.rho <= zero {
        return Err(domain("rho must be positive", p.rho.as_f64()));
    }
    if !p.beta.is_finite() || p.beta <= zero || p.beta >= T::one() {
        return Err(domain("beta must lie in (0, 1)", p.beta.as_f64()));
    }
    if p.growth_denominator() == zero {
        return Err(Error::DegenerateDenominator);
    }
    Ok(())
}

/// Evaluates every closed-form balanced-growth quantity.
///
/// `ρ ≥ 1` is accepted so that the patient limit `ρ = 1` (all rates zero) can be explored.
pub fn bgp_rates<T: Real>(p: &Params<T>) -> Result<BgpRates<T>> {
    check_rates_domain(p)?;
    let one = T::one();
    let denom = p.growth_denominator();
    let h_hat = human_capital_rate(p, denom);
    let theta = (one + p.gamma) * (p.rho - one) / denom;
    let l_hat = (one - p.sigma) * (p.rho - one) / denom;
    let lambda1_hat = -p.sigma * theta;
    let lambda2_hat = p.rho - one;
    let x = (one - p.sigma) * theta - p.rho;
    let mpk = (p.rho + p.sigma * theta) / p.beta;
    Ok(BgpRates {
        h_hat,
        theta,
        l_hat,
        lambda1_hat,
        lambda2_hat,
        x,
        mpk,
        effort_bgp: one - h_hat,
        ies: (one - h_hat) / (p.gamma * h_hat),
        convergence_verified: p.sigma > one && p.rho < one,
    })
}

/// `θ - (ĥ + 2(l-s)^ - l̂)`; zero up to rounding.
pub fn prop1_identity<T: Real>(rates: &BgpRates<T>) -> T {
    rates.theta - (rates.h_hat + T::lit(2.0) * rates.l_hat - rates.l_hat)
}

/// Output growth from the logarithmic derivative of the technology,
/// `ŷ = βk̂ + (1-β)(ĥ + 2(l-s)^ - l̂)`.
pub fn corollary1_output_rate<T: Real>(p: &Params<T>, rates: &BgpRates<T>) -> T {
    p.beta * rates.theta
        + (T::one() - p.beta) * (rates.h_hat + T::lit(2.0) * rates.l_hat - rates.l_hat)
}

/// Elasticity of the marginal payoff of distracting time, `γ s/(l-s)`.
pub fn marginal_utility_elasticity<T: Real>(p: &Params<T>, s: T, l: T) -> Result<T> {
    if !(s > T::zero()) {
        return Err(domain("distracting time s must be positive", s.as_f64()));
    }
    if !(s < l) {
        return Err(domain("distracting time s must be below l", s.as_f64()));
    }
    Ok(p.gamma * s / (l - s))
}

/// Intertemporal elasticity of substitution of distracting time in parameter form,
/// `[(1+γ)(1-σ) - ρ(γ+σ)] / [γ(γ+σ)(ρ-1)]`.
pub fn ies_distraction<T: Real>(p: &Params<T>) -> Result<T> {
    check_rates_domain(p)?;
    let one = T::one();
    if p.rho == one {
        return Err(Error::DegenerateIes(
            "rho = 1 zeroes the balanced growth rates",
        ));
    }
    if human_capital_rate(p, p.growth_denominator()) == T::zero() {
        return Err(Error::DegenerateIes("human-capital growth rate is zero"));
    }
    let num = (one + p.gamma) * (one - p.sigma) - p.rho * (p.gamma + p.sigma);
    let den = p.gamma * (p.gamma + p.sigma) * (p.rho - one);
    Ok(num / den)
}

/// Evaluates [`ies_distraction`] at each `γ` in `gammas`, holding the other primitives.
pub fn ies_limit_scan<T: Real>(p: &Params<T>, gammas: &[T]) -> Result<Vec<(T, T)>> {
    gammas
        .iter()
        .map(|&gamma| {
            if !(gamma > T::zero()) {
                return Err(domain("gamma must be positive", gamma.as_f64()));
            }
            let q = Params { gamma, ..*p };
            Ok((gamma, ies_distraction(&q)?))
        })
        .collect()
}

/// `x = (1+γ)(1-σ)(ρ-1)/(1-σ(2+γ)) - ρ`.
pub fn convergence_exponent<T: Real>(p: &Params<T>) -> Result<T> {
    check_rates_domain(p)?;
    let one = T::one();
    Ok((one + p.gamma) * (one - p.sigma) * (p.rho - one) / p.growth_denominator() - p.rho)
}

/// Discounted utility of a balanced path started at `(c0, l0, s0)`: `(A₁ - A₂)·(-1/x)` with
/// `A₁ = c0^(1-σ)/(1-σ)` and `A₂ = (l0-s0)^(1+γ)/(1+γ)`.
pub fn utility_closed_form<T: Real>(p: &Params<T>, c0: T, l0: T, s0: T) -> Result<T> {
    if !(c0 > T::zero()) {
        return Err(domain("initial consumption must be positive", c0.as_f64()));
    }
    if !(s0 >= T::zero()) || !(s0 < l0) {
        return Err(domain(
            "initial distracting time must lie in [0, l0)",
            s0.as_f64(),
        ));
    }
    let x = convergence_exponent(p)?;
    if !(x < T::zero()) {
        return Err(Error::Divergence { x: x.as_f64() });
    }
    let one = T::one();
    let a1 = c0.powf(one - p.sigma) / (one - p.sigma);
    let a2 = (l0 - s0).powf(one + p.gamma) / (one + p.gamma);
    Ok((a1 - a2) * (-one / x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn set_a() -> Params<f64> {
        Params::new(2.0, 1.0, 0.5, 0.3)
    }

    fn set_b() -> Params<f64> {
        Params::new(3.0, 2.0, 0.8, 0.3)
    }

    #[test]
    fn validate_set_a_passes() {
        let v = validate_params(&set_a());
        assert!(v.all_ok(), "{v:?}");
        assert_relative_eq!(v.h_hat.unwrap(), 0.3, max_relative = 1e-15);
    }

    #[test]
    fn validate_flags_low_sigma() {
        let v = validate_params(&Params::new(0.5, 1.0, 0.5, 0.3));
        assert!(v.domain_ok);
        assert!(!v.convergence_regime);
        assert_eq!(v.failures(), vec!["convergence_regime", "bgp_feasible"]);
    }

    #[test]
    fn validate_patient_limit_degenerates() {
        let v = validate_params(&Params::new(2.0, 1.0, 1.0 - 1e-12, 0.3));
        assert!(v.h_hat.unwrap() < 1e-11);
        let v = validate_params(&Params::new(2.0, 1.0, 1.0, 0.3));
        assert_eq!(v.h_hat, Some(0.0));
        assert!(!v.bgp_feasible);
        assert!(!v.domain_ok);
    }

    #[test]
    fn validate_reports_zero_denominator() {
        // 1 - σ(2+γ) = 0 at σ = 1/4, γ = 2
        let p = Params::new(0.25, 2.0, 0.5, 0.3);
        let v = validate_params(&p);
        assert!(v.domain_ok);
        assert!(!v.denominator_ok);
        assert_eq!(v.h_hat, None);
        assert!(matches!(bgp_rates(&p), Err(Error::DegenerateDenominator)));
        assert!(matches!(
            convergence_exponent(&p),
            Err(Error::DegenerateDenominator)
        ));
    }

    #[test]
    fn set_a_rates() {
        let r = bgp_rates(&set_a()).unwrap();
        assert_relative_eq!(r.h_hat, 0.3, max_relative = 1e-12);
        assert_relative_eq!(r.theta, 0.2, max_relative = 1e-12);
        assert_relative_eq!(r.l_hat, -0.1, max_relative = 1e-12);
        assert_relative_eq!(r.lambda2_hat, -0.5, max_relative = 1e-12);
        assert_relative_eq!(r.lambda1_hat, -0.4, max_relative = 1e-12);
        assert_relative_eq!(r.x, -0.7, max_relative = 1e-12);
        assert_relative_eq!(r.mpk, 3.0, max_relative = 1e-12);
        assert_relative_eq!(r.effort_bgp, 0.7, max_relative = 1e-12);
        assert_relative_eq!(r.ies, 7.0 / 3.0, max_relative = 1e-12);
        assert!(r.convergence_verified);
    }

    #[test]
    fn set_b_rates() {
        let r = bgp_rates(&set_b()).unwrap();
        assert_relative_eq!(r.h_hat, 1.0 / 11.0, max_relative = 1e-12);
        assert_relative_eq!(r.theta, 0.6 / 11.0, max_relative = 1e-12);
        assert_relative_eq!(r.l_hat, -0.4 / 11.0, max_relative = 1e-12);
        assert_relative_eq!(r.ies, 5.0, max_relative = 1e-12);
    }

    #[test]
    fn patient_limit_zeroes_rates() {
        let r = bgp_rates(&Params::new(2.0, 1.0, 1.0, 0.3)).unwrap();
        assert_eq!(r.h_hat, 0.0);
        assert_eq!(r.theta, 0.0);
        assert_eq!(r.l_hat, 0.0);
        assert!(!r.convergence_verified);
        assert_eq!(prop1_identity(&r), 0.0);
        assert_eq!(
            corollary1_output_rate(&Params::new(2.0, 1.0, 1.0, 0.3), &r),
            0.0
        );
        assert_eq!(
            convergence_exponent(&Params::new(2.0, 1.0, 1.0, 0.3)).unwrap(),
            -1.0
        );
        assert!(ies_distraction(&Params::new(2.0, 1.0, 1.0, 0.3)).is_err());
    }

    #[test]
    fn low_sigma_is_flagged_unverified() {
        let r = bgp_rates(&Params::new(0.5, 1.0, 0.5, 0.3)).unwrap();
        assert!(!r.convergence_verified);
    }

    #[test]
    fn proposition_identities() {
        for p in [set_a(), set_b()] {
            let r = bgp_rates(&p).unwrap();
            assert!(prop1_identity(&r).abs() < 1e-15);
            assert_relative_eq!(
                corollary1_output_rate(&p, &r),
                r.theta,
                max_relative = 1e-14
            );
        }
        let r = bgp_rates(&set_a()).unwrap();
        assert_relative_eq!(
            corollary1_output_rate(&set_a(), &r),
            0.2,
            max_relative = 1e-14
        );
        let r = bgp_rates(&set_b()).unwrap();
        assert_relative_eq!(
            corollary1_output_rate(&set_b(), &r),
            0.6 / 11.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn elasticity_examples() {
        let p = set_a();
        assert_relative_eq!(marginal_utility_elasticity(&p, 0.5, 1.0).unwrap(), 1.0);
        let p2 = Params { gamma: 2.0, ..p };
        assert_relative_eq!(
            marginal_utility_elasticity(&p2, 0.25, 1.0).unwrap(),
            2.0 / 3.0
        );
        assert!(marginal_utility_elasticity(&p, 1e-300, 1.0).unwrap() < 1e-299);
        assert!(marginal_utility_elasticity(&p, 1.0, 1.0).is_err());
        assert!(marginal_utility_elasticity(&p, 0.0, 1.0).is_err());
    }

    #[test]
    fn ies_examples() {
        assert_relative_eq!(
            ies_distraction(&set_a()).unwrap(),
            3.5 / 1.5,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            ies_distraction(&set_b()).unwrap(),
            5.0,
            max_relative = 1e-14
        );
        let big = Params {
            gamma: 1000.0,
            ..set_a()
        };
        let v = ies_distraction(&big).unwrap();
        // ĥ = 501/2003, IES = (1-ĥ)/(1000 ĥ) = 1502/501000
        assert_relative_eq!(v, 1502.0 / 501_000.0, max_relative = 1e-12);
    }

    #[test]
    fn ies_scan_decreases() {
        let scan = ies_limit_scan(&set_a(), &[1.0, 10.0, 100.0, 1000.0]).unwrap();
        assert!(scan.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(scan.iter().all(|&(_, v)| v > 0.0));
        assert!((scan[3].1 - 3e-3).abs() < 1e-4);
        let single = ies_limit_scan(&set_a(), &[1.0]).unwrap();
        assert_relative_eq!(single[0].1, 7.0 / 3.0, max_relative = 1e-14);
        assert!(ies_limit_scan(&set_a(), &[0.0]).is_err());
    }

    #[test]
    fn convergence_exponent_examples() {
        assert_relative_eq!(
            convergence_exponent(&set_a()).unwrap(),
            -0.7,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            convergence_exponent(&set_b()).unwrap(),
            -1.2 / 11.0 - 0.8,
            max_relative = 1e-14
        );
    }

    #[test]
    fn closed_form_utility() {
        let u = utility_closed_form(&set_a(), 1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(u, -1.5 / 0.7, max_relative = 1e-14);
        // A₁ = A₂ needs A₁ > 0, i.e. σ < 1. σ = 0.5, γ = 1: A₁ = 2√c, A₂ = w²/2, both 1/2
        // at c = 1/16, w = 1. ρ = 0.9 keeps x = 2 - 3ρ negative.
        let p = Params::new(0.5, 1.0, 0.9, 0.3);
        assert!(convergence_exponent(&p).unwrap() < 0.0);
        assert_eq!(utility_closed_form(&p, 1.0 / 16.0, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_utility_diverges_for_nonnegative_exponent() {
        // σ = 0.5, γ = 1: θ = 4(1-ρ) and x = 2 - 3ρ > 0 at ρ = 0.5
        let p = Params::new(0.5, 1.0, 0.5, 0.3);
        assert!(convergence_exponent(&p).unwrap() > 0.0);
        assert!(matches!(
            utility_closed_form(&p, 1.0, 1.0, 0.0),
            Err(Error::Divergence { .. })
        ));
    }
}
