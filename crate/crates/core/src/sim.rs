//! Balanced-path initial conditions, integration of the optimality system and
//! verification of the closed-form growth claims on the numerical trajectory.
//!
//! The state `(k, h, λ₁, λ₂)` is integrated in logarithms. Controls are re-solved from
//! the first-order conditions at every derivative evaluation, so a balanced path is a
//! straight line in log space.

use nalgebra::Matrix4;

use crate::bgp::{bgp_rates, corollary1_output_rate, prop1_identity, validate_params, BgpRates};
use crate::error::{domain, Error, Result};
use crate::foc::solve_controls;
use crate::model::{
    capital_productivity, effort, normalized_foc_residuals, ode_rhs, production, Controls,
    ExtendedState, Params,
};
use crate::ode::{dopri5, linspace, OdeOptions, OdeStats};
use crate::roots::{brent, expand_bracket};
use crate::scalar::Real;

/// One output sample of a trajectory with its derived diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord<T> {
    pub t: T,
    pub k: T,
    pub h: T,
    pub lambda1: T,
    pub lambda2: T,
    pub c: T,
    pub s: T,
    pub l: T,
    pub y: T,
    pub effort: T,
    /// Output-capital ratio `k^(β-1) X^(1-β)`.
    pub mpk: T,
    /// First-order residuals normalized by their largest additive term.
    pub residuals: [T; 3],
    /// `k λ₁ e^(-ρt)`
    pub tv1: T,
    /// `h λ₂ e^(-ρt)`
    pub tv2: T,
}

impl<T: Real> TrajectoryRecord<T> {
    pub fn from_state(p: &Params<T>, xs: &ExtendedState<T>) -> Result<Self> {
        let ctr = solve_controls(
            p,
            xs.state.k,
            xs.state.h,
            xs.costates.lambda1,
            xs.costates.lambda2,
        )?;
        Self::with_controls(p, xs, &ctr)
    }

    fn with_controls(p: &Params<T>, xs: &ExtendedState<T>, ctr: &Controls<T>) -> Result<Self> {
        let discount = (-p.rho * xs.t).exp();
        Ok(Self {
            t: xs.t,
            k: xs.state.k,
            h: xs.state.h,
            lambda1: xs.costates.lambda1,
            lambda2: xs.costates.lambda2,
            c: ctr.c,
            s: ctr.s,
            l: ctr.l,
            y: production(p, &xs.state, ctr)?,
            effort: effort(ctr.s, ctr.l)?,
            mpk: capital_productivity(p, &xs.state, ctr)?,
            residuals: normalized_foc_residuals(p, xs, ctr)?,
            tv1: xs.state.k * xs.costates.lambda1 * discount,
            tv2: xs.state.h * xs.costates.lambda2 * discount,
        })
    }

    pub fn state(&self) -> ExtendedState<T> {
        ExtendedState::new(self.t, self.k, self.h, self.lambda1, self.lambda2)
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, r| m.max(r.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub params: Params<T>,
    pub records: Vec<TrajectoryRecord<T>>,
    pub stats: OdeStats,
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings<T> {
    /// Relative tolerance on the log-state; the absolute tolerance is `tol` times the
    /// initial magnitude of each log component (at least `tol`).
    pub tol: T,
    /// Number of evenly spaced output records on `[0, t_end]`.
    pub records: usize,
}

impl<T: Real> Default for IntegrationSettings<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-9),
            records: 200,
        }
    }
}

fn log_state<T: Real>(rates_h0: T, l0: T, p: &Params<T>, r: &BgpRates<T>) -> [T; 5] {
    // returns ln of (k0, c0, λ₁, λ₂, w0) for the point built from (h0, l0)
    let one = T::one();
    let h0 = rates_h0;
    let w0 = (one - r.h_hat) * l0;
    let ln_x = h0.ln() - l0.ln() + T::lit(2.0) * w0.ln();
    let ln_k = ln_x - r.mpk.ln() / (one - p.beta);
    let ln_c = ln_k + (r.mpk - r.theta).ln();
    let ln_l1 = -p.sigma * ln_c;
    let ln_l2 = l0.ln() + p.gamma * w0.ln() - h0.ln();
    [ln_k, ln_c, ln_l1, ln_l2, w0.ln()]
}

fn require_regime<T: Real>(p: &Params<T>) -> Result<BgpRates<T>> {
    let v = validate_params(p);
    if !v.all_ok() {
        return Err(Error::InvalidRegime(v.failures().join(", ")));
    }
    bgp_rates(p)
}

/// Labor supply `l0` that makes the balanced-path point built from `(h0, l0)` satisfy the
/// summed first-order condition `(1-β) λ₁ k^β X^(-β) (l-s) = λ₂`.
///
/// The residual is solved in `ln l0`, where it is linear with slope `-(σ+γ)`.
pub fn bgp_find_l0<T: Real>(p: &Params<T>, h0: T) -> Result<T> {
    if !(h0 > T::zero()) || !h0.is_finite() {
        return Err(domain(
            "initial human capital must be positive",
            h0.as_f64(),
        ));
    }
    let r = require_regime(p)?;
    let one = T::one();
    let residual = |u: T| -> Result<T> {
        let l0 = u.exp();
        let [ln_k, _, ln_l1, ln_l2, ln_w] = log_state(h0, l0, p, &r);
        let ln_x = h0.ln() - u + T::lit(2.0) * ln_w;
        let lhs = (one - p.beta).ln() + ln_l1 + p.beta * ln_k - p.beta * ln_x + ln_w;
        Ok(lhs - ln_l2)
    };
    let bracket = expand_bracket(residual, T::zero(), one, 60)?;
    let u = brent(residual, bracket, T::lit(1e-14), T::lit(1e-15), 200)?;
    Ok(u.exp())
}

/// Balanced-path state at `t = 0` together with its controls.
pub fn bgp_initial_state<T: Real>(p: &Params<T>, h0: T) -> Result<(ExtendedState<T>, Controls<T>)> {
    let l0 = bgp_find_l0(p, h0)?;
    let r = bgp_rates(p)?;
    let [ln_k, ln_c, ln_l1, ln_l2, _] = log_state(h0, l0, p, &r);
    let s0 = r.h_hat * l0;
    let xs = ExtendedState::new(T::zero(), ln_k.exp(), h0, ln_l1.exp(), ln_l2.exp());
    Ok((xs, Controls::new(ln_c.exp(), s0, l0)))
}

fn log_rhs<T: Real>(p: &Params<T>, t: T, y: &[T; 4]) -> Result<[T; 4]> {
    let xs = ExtendedState::from_array(t, [y[0].exp(), y[1].exp(), y[2].exp(), y[3].exp()]);
    let ctr = solve_controls(
        p,
        xs.state.k,
        xs.state.h,
        xs.costates.lambda1,
        xs.costates.lambda2,
    )?;
    let d = ode_rhs(p, &xs, &ctr)?.to_array();
    let levels = xs.to_array();
    Ok([
        d[0] / levels[0],
        d[1] / levels[1],
        d[2] / levels[2],
        d[3] / levels[3],
    ])
}

/// Integrates the optimality system from `x0` over `[x0.t, x0.t + t_end]`.
///
/// Returns the trajectory up to the point of failure together with the error, if any.
pub fn integrate_partial<T: Real>(
    p: &Params<T>,
    x0: &ExtendedState<T>,
    t_end: T,
    settings: &IntegrationSettings<T>,
) -> (Trajectory<T>, Option<Error>) {
    let mut traj = Trajectory {
        params: *p,
        records: Vec::new(),
        stats: OdeStats::default(),
    };
    if !(t_end >= T::zero()) || !(settings.tol > T::zero()) {
        return (
            traj,
            Some(Error::InvalidArgument(
                "t_end must be >= 0 and tol > 0".into(),
            )),
        );
    }
    let y0 = x0.to_array();
    if y0.iter().any(|v| !(*v > T::zero())) {
        return (
            traj,
            Some(domain("initial state must be positive", y0[0].as_f64())),
        );
    }
    let ly0 = [y0[0].ln(), y0[1].ln(), y0[2].ln(), y0[3].ln()];
    let times = if t_end == T::zero() {
        vec![x0.t]
    } else {
        linspace(x0.t, x0.t + t_end, settings.records.max(2))
    };
    let atol = ly0.map(|v| settings.tol * v.abs().max(T::one()));
    let opts = OdeOptions {
        rtol: settings.tol,
        atol,
        max_step: None,
        max_steps: 1_000_000,
    };
    let run = dopri5(|t, y: &[T; 4]| log_rhs(p, t, y), x0.t, ly0, &times, &opts);
    traj.stats = run.stats;
    let mut failure = run.failure;
    for (t, ly) in run.samples {
        let xs = ExtendedState::from_array(t, ly.map(|v| v.exp()));
        // the initial sample keeps the exact input state
        let xs = if t == x0.t {
            ExtendedState { t, ..*x0 }
        } else {
            xs
        };
        match TrajectoryRecord::from_state(p, &xs) {
            Ok(rec) => traj.records.push(rec),
            Err(e) => {
                failure.get_or_insert(Error::ControlFailure {
                    t: t.as_f64(),
                    source: Box::new(e),
                });
                break;
            }
        }
    }
    (traj, failure)
}

/// [`integrate_partial`] that fails on any early stop.
pub fn integrate<T: Real>(
    p: &Params<T>,
    x0: &ExtendedState<T>,
    t_end: T,
    settings: &IntegrationSettings<T>,
) -> Result<Trajectory<T>> {
    match integrate_partial(p, x0, t_end, settings) {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// Least-squares slope of `values` against `times`.
pub fn ols_slope<T: Real>(times: &[T], values: &[T]) -> T {
    let n = T::from_usize(times.len()).unwrap();
    let t_mean = times.iter().copied().sum::<T>() / n;
    let v_mean = values.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&t, &v) in times.iter().zip(values) {
        sxy = sxy + (t - t_mean) * (v - v_mean);
        sxx = sxx + (t - t_mean) * (t - t_mean);
    }
    sxy / sxx
}

/// Log-slopes of the main series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalRates<T> {
    pub k: T,
    pub h: T,
    pub c: T,
    pub s: T,
    pub l: T,
    pub lambda1: T,
    pub lambda2: T,
    pub y: T,
    /// Effective labor `l - s`.
    pub w: T,
    pub tv1: T,
    pub tv2: T,
}

const MIN_REGRESSION_RECORDS: usize = 10;

fn after_burn_in<T: Real>(
    traj: &Trajectory<T>,
    burn_in_fraction: T,
) -> Result<&[TrajectoryRecord<T>]> {
    if !(burn_in_fraction >= T::zero() && burn_in_fraction < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "burn-in fraction must lie in [0, 1), got {burn_in_fraction}"
        )));
    }
    let n = traj.records.len();
    let skip = (burn_in_fraction * T::from_usize(n).unwrap())
        .floor()
        .to_usize()
        .unwrap_or(0);
    let rest = &traj.records[skip.min(n)..];
    if rest.len() < MIN_REGRESSION_RECORDS {
        return Err(Error::InsufficientData {
            have: rest.len(),
            need: MIN_REGRESSION_RECORDS,
        });
    }
    Ok(rest)
}

/// Regression slope of the log of each series after dropping the first
/// `burn_in_fraction` of the records.
pub fn estimate_growth_rates<T: Real>(
    traj: &Trajectory<T>,
    burn_in_fraction: T,
) -> Result<EmpiricalRates<T>> {
    let recs = after_burn_in(traj, burn_in_fraction)?;
    let times: Vec<T> = recs.iter().map(|r| r.t).collect();
    let slope = |f: &dyn Fn(&TrajectoryRecord<T>) -> T| {
        let logs: Vec<T> = recs.iter().map(|r| f(r).ln()).collect();
        ols_slope(&times, &logs)
    };
    Ok(EmpiricalRates {
        k: slope(&|r| r.k),
        h: slope(&|r| r.h),
        c: slope(&|r| r.c),
        s: slope(&|r| r.s),
        l: slope(&|r| r.l),
        lambda1: slope(&|r| r.lambda1),
        lambda2: slope(&|r| r.lambda2),
        y: slope(&|r| r.y),
        w: slope(&|r| r.l - r.s),
        tv1: slope(&|r| r.tv1),
        tv2: slope(&|r| r.tv2),
    })
}

/// Composite Simpson rule on samples; the last three intervals use the 3/8 rule when the
/// interval count is odd. Assumes evenly spaced samples.
pub fn simpson<T: Real>(times: &[T], values: &[T]) -> T {
    let n = times.len();
    if n < 2 {
        return T::zero();
    }
    let intervals = n - 1;
    let h = (times[n - 1] - times[0]) / T::from_usize(intervals).unwrap();
    let (two, three, four) = (T::lit(2.0), T::lit(3.0), T::lit(4.0));
    if intervals == 1 {
        return h / two * (values[0] + values[1]);
    }
    let simpson_end = if intervals.is_multiple_of(2) {
        n - 1
    } else {
        n - 4
    };
    let mut acc = T::zero();
    let mut i = 0;
    while i + 2 <= simpson_end {
        acc = acc + h / three * (values[i] + four * values[i + 1] + values[i + 2]);
        i += 2;
    }
    if intervals % 2 == 1 {
        let j = simpson_end;
        acc = acc
            + three * h / T::lit(8.0)
                * (values[j] + three * values[j + 1] + three * values[j + 2] + values[j + 3]);
    }
    acc
}

/// Discounted utility of the trajectory: quadrature of `e^(-ρt) V` over the records plus the
/// balanced-path tail `e^(-ρT) (A₁(T) - A₂(T)) (-1/x)` from the last record.
pub fn discounted_utility<T: Real>(p: &Params<T>, traj: &Trajectory<T>) -> Result<T> {
    let rates = bgp_rates(p)?;
    if !(rates.x < T::zero()) {
        return Err(Error::Divergence {
            x: rates.x.as_f64(),
        });
    }
    let last = traj
        .records
        .last()
        .ok_or(Error::InsufficientData { have: 0, need: 1 })?;
    let times: Vec<T> = traj.records.iter().map(|r| r.t).collect();
    let integrand = traj
        .records
        .iter()
        .map(
            |r| Ok((-p.rho * r.t).exp() * crate::model::utility(p, &Controls::new(r.c, r.s, r.l))?),
        )
        .collect::<Result<Vec<T>>>()?;
    let body = simpson(&times, &integrand);
    let one = T::one();
    let a1 = last.c.powf(one - p.sigma) / (one - p.sigma);
    let a2 = (last.l - last.s).powf(one + p.gamma) / (one + p.gamma);
    let tail = (-p.rho * last.t).exp() * (a1 - a2) * (-one / rates.x);
    Ok(body + tail)
}

/// Largest real part among the eigenvalues of the log-space system's Jacobian at `x0`,
/// estimated by central differences. Rounding errors grow roughly like `e^(μ t)`.
pub fn leading_growth_mode<T: Real>(p: &Params<T>, x0: &ExtendedState<T>) -> Result<f64> {
    let y0 = x0.to_array().map(|v| v.as_f64().ln());
    let p64 = Params::new(
        p.sigma.as_f64(),
        p.gamma.as_f64(),
        p.rho.as_f64(),
        p.beta.as_f64(),
    );
    let eps = 1e-6;
    let mut jac = Matrix4::<f64>::zeros();
    for j in 0..4 {
        let mut up = y0;
        let mut dn = y0;
        up[j] += eps;
        dn[j] -= eps;
        let fu = log_rhs(&p64, 0.0, &up)?;
        let fd = log_rhs(&p64, 0.0, &dn)?;
        for i in 0..4 {
            jac[(i, j)] = (fu[i] - fd[i]) / (2.0 * eps);
        }
    }
    Ok(jac
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Tolerances used by [`verify_bgp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerances {
    /// Absolute tolerance on regression slopes.
    pub rate: f64,
    /// Relative tolerance on the constancy of balanced-path ratios.
    pub drift: f64,
    /// Absolute tolerance on transversality log-slopes.
    pub transversality: f64,
    /// Relative tolerance on discounted utility.
    pub utility: f64,
    /// Bound on the normalized first-order residuals of every record.
    pub residual: f64,
    /// Bound on the closed-form identities.
    pub identity: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self {
            rate: 1e-5,
            drift: 1e-7,
            transversality: 1e-6,
            utility: 1e-6,
            residual: 1e-8,
            identity: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions<T> {
    pub integration: IntegrationSettings<T>,
    pub burn_in_fraction: T,
    /// Multiplies the initial `λ₂`; anything but 1 knocks the start off the balanced path.
    pub lambda2_factor: T,
    pub tolerances: VerifyTolerances,
}

impl<T: Real> Default for VerifyOptions<T> {
    fn default() -> Self {
        Self {
            integration: IntegrationSettings::default(),
            burn_in_fraction: T::lit(0.1),
            lambda2_factor: T::one(),
            tolerances: VerifyTolerances::default(),
        }
    }
}

/// Outcome of one comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn absolute(name: &str, expected: f64, observed: f64, tolerance: f64) -> Self {
        let passed = (observed - expected).abs() <= tolerance;
        Self {
            name: name.to_string(),
            expected,
            observed,
            tolerance,
            passed,
        }
    }

    /// `observed` is itself a deviation measure that must stay below `tolerance`.
    fn bound(name: &str, observed: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            expected: 0.0,
            observed,
            tolerance,
            passed: observed <= tolerance,
        }
    }

    fn flag(name: &str, ok: bool) -> Self {
        Self {
            name: name.to_string(),
            expected: 1.0,
            observed: if ok { 1.0 } else { 0.0 },
            tolerance: 0.0,
            passed: ok,
        }
    }

    fn relative(name: &str, expected: f64, observed: f64, tolerance: f64) -> Self {
        let denom = expected.abs().max(f64::MIN_POSITIVE);
        Self {
            name: name.to_string(),
            expected,
            observed,
            tolerance,
            passed: ((observed - expected) / denom).abs() <= tolerance,
        }
    }

    /// A check that could not be evaluated.
    fn missing(name: &str, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            expected,
            observed: f64::NAN,
            tolerance,
            passed: false,
        }
    }

    pub fn is_rate_check(&self) -> bool {
        self.name.starts_with("rate_")
    }
}

/// Maximum relative deviation of each balanced-path ratio from its closed-form value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstancyDrift<T> {
    pub s_over_l: T,
    pub c_over_k: T,
    pub mpk: T,
    pub y_over_k: T,
    pub effort: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport<T> {
    pub params: Params<T>,
    pub rates: BgpRates<T>,
    pub empirical: Option<EmpiricalRates<T>>,
    pub drift: Option<ConstancyDrift<T>>,
    pub max_residual: Option<T>,
    /// `(numeric, closed form)` discounted utility.
    pub utility: Option<(T, T)>,
    /// Largest real eigenvalue of the linearized log system at the initial point.
    pub leading_growth_mode: Option<f64>,
    pub trajectory: Trajectory<T>,
    pub integration_error: Option<Error>,
    pub checks: Vec<Check>,
}

impl<T> VerificationReport<T> {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Runs initialization, integration and rate estimation with default options and compares
/// every observable against its closed form.
pub fn verify_bgp<T: Real>(p: &Params<T>, h0: T, t_end: T) -> Result<VerificationReport<T>> {
    verify_bgp_with(p, h0, t_end, &VerifyOptions::default())
}

pub fn verify_bgp_with<T: Real>(
    p: &Params<T>,
    h0: T,
    t_end: T,
    opts: &VerifyOptions<T>,
) -> Result<VerificationReport<T>> {
    let rates = require_regime(p)?;
    let tol = opts.tolerances;
    let (mut x0, _) = bgp_initial_state(p, h0)?;
    x0.costates.lambda2 = x0.costates.lambda2 * opts.lambda2_factor;

    let mut checks = Vec::new();
    checks.push(Check::bound(
        "prop1_identity",
        prop1_identity(&rates).abs().as_f64(),
        tol.identity,
    ));
    checks.push(Check::relative(
        "corollary1_output_rate",
        rates.theta.as_f64(),
        corollary1_output_rate(p, &rates).as_f64(),
        tol.identity,
    ));

    let (traj, integration_error) = integrate_partial(p, &x0, t_end, &opts.integration);
    let reached = traj.records.last().map_or(f64::NAN, |r| r.t.as_f64());
    checks.push(Check::flag(
        "integration_completed",
        integration_error.is_none(),
    ));

    let expected_rates = [
        ("rate_k", rates.theta),
        ("rate_h", rates.h_hat),
        ("rate_c", rates.theta),
        ("rate_s", rates.l_hat),
        ("rate_l", rates.l_hat),
        ("rate_lambda1", rates.lambda1_hat),
        ("rate_lambda2", rates.lambda2_hat),
        ("rate_y", rates.theta),
    ];
    let empirical = estimate_growth_rates(&traj, opts.burn_in_fraction).ok();
    match &empirical {
        Some(e) => {
            let observed = [e.k, e.h, e.c, e.s, e.l, e.lambda1, e.lambda2, e.y];
            for ((name, expected), obs) in expected_rates.iter().zip(observed) {
                checks.push(Check::absolute(
                    name,
                    expected.as_f64(),
                    obs.as_f64(),
                    tol.rate,
                ));
            }
            // growth decomposition of capital: k̂ = ĥ + 2(l-s)^ - l̂
            let decomposition = e.h + T::lit(2.0) * e.w - e.l;
            checks.push(Check::absolute(
                "prop1_empirical",
                e.k.as_f64(),
                decomposition.as_f64(),
                tol.rate,
            ));
            checks.push(Check::absolute(
                "tv1_slope",
                rates.x.as_f64(),
                e.tv1.as_f64(),
                tol.transversality,
            ));
            checks.push(Check::absolute(
                "tv2_slope",
                rates.x.as_f64(),
                e.tv2.as_f64(),
                tol.transversality,
            ));
        }
        None => {
            for (name, expected) in expected_rates {
                checks.push(Check::missing(name, expected.as_f64(), tol.rate));
            }
            checks.push(Check::missing("prop1_empirical", 0.0, tol.rate));
            checks.push(Check::missing(
                "tv1_slope",
                rates.x.as_f64(),
                tol.transversality,
            ));
            checks.push(Check::missing(
                "tv2_slope",
                rates.x.as_f64(),
                tol.transversality,
            ));
        }
    }

    let recs = &traj.records;
    let decreasing =
        |f: fn(&TrajectoryRecord<T>) -> T| recs.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    checks.push(Check::flag(
        "tv1_decreasing",
        recs.len() > 1 && decreasing(|r| r.tv1),
    ));
    checks.push(Check::flag(
        "tv2_decreasing",
        recs.len() > 1 && decreasing(|r| r.tv2),
    ));

    let drift = (!recs.is_empty()).then(|| {
        let max_rel = |target: T, f: &dyn Fn(&TrajectoryRecord<T>) -> T| {
            recs.iter()
                .map(|r| f(r).rel_err(target))
                .fold(T::zero(), |m, v| if v.is_nan() || v > m { v } else { m })
        };
        ConstancyDrift {
            s_over_l: max_rel(rates.h_hat, &|r| r.s / r.l),
            c_over_k: max_rel(rates.mpk - rates.theta, &|r| r.c / r.k),
            mpk: max_rel(rates.mpk, &|r| r.mpk),
            y_over_k: max_rel(rates.mpk, &|r| r.y / r.k),
            effort: max_rel(rates.effort_bgp, &|r| r.effort),
        }
    });
    let drift_checks = [
        "drift_s_over_l",
        "drift_c_over_k",
        "drift_mpk",
        "drift_y_over_k",
        "drift_effort",
    ];
    match &drift {
        Some(d) => {
            let values = [d.s_over_l, d.c_over_k, d.mpk, d.y_over_k, d.effort];
            for (name, v) in drift_checks.iter().zip(values) {
                checks.push(Check::bound(name, v.as_f64(), tol.drift));
            }
        }
        None => {
            for name in drift_checks {
                checks.push(Check::missing(name, 0.0, tol.drift));
            }
        }
    }

    let max_residual =
        recs.iter()
            .map(|r| r.max_residual())
            .reduce(|a, b| if b.is_nan() || b > a { b } else { a });
    match max_residual {
        Some(m) => checks.push(Check::bound("foc_residuals", m.as_f64(), tol.residual)),
        None => checks.push(Check::missing("foc_residuals", 0.0, tol.residual)),
    }

    let utility = match recs.first() {
        Some(first) => {
            let closed = crate::bgp::utility_closed_form(p, first.c, first.l, first.s)?;
            discounted_utility(p, &traj)
                .ok()
                .map(|numeric| (numeric, closed))
        }
        None => None,
    };
    match utility {
        Some((numeric, closed)) => checks.push(Check::relative(
            "utility",
            closed.as_f64(),
            numeric.as_f64(),
            tol.utility,
        )),
        None => checks.push(Check::missing("utility", f64::NAN, tol.utility)),
    }
    checks.push(Check::absolute(
        "horizon_reached",
        t_end.as_f64(),
        reached - x0.t.as_f64(),
        0.0,
    ));

    Ok(VerificationReport {
        params: *p,
        rates,
        empirical,
        drift,
        max_residual,
        utility,
        leading_growth_mode: leading_growth_mode(p, &x0).ok(),
        trajectory: traj,
        integration_error,
        checks,
    })
}
