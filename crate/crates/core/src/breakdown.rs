//! Asymptotic breakdown bounds and the inequality checks behind them.
//!
//! With `x = (B/(1+α))^{1/A}`, the general lower bound on the asymptotic
//! breakdown point is `min{x, 1-x}` when the contaminating mass `M_k` does
//! not blow up, and `min{(BL/(1+α))^{1/A}, 1-x, 1/2}` when the ratio of
//! `M_f` to the cross integral `∫ f^B k^A` has liminf `L`. The
//! scenario functions encode the limit of `L` and the resulting piecewise
//! bound for the standard location, scale and rate families.

use std::collections::BTreeMap;
use std::fmt;

use crate::density::{merged_hints, DensityModel, Support};
use crate::divergence::{
    derive_exponents, exponents, integrate_pair, mass, s_divergence_scaled, Branch, DivergenceParams, BRANCH_TOL,
};
use crate::error::{Error, Result};
use crate::integrate::{integrate, Domain, IntegratorHandle};
use crate::models::check_same_support;

/// A bound with the formula that produced it and the quantities used.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakdownReport {
    /// Lower bound on the asymptotic breakdown point, in `[0, 1/2]`.
    pub bound: f64,
    pub formula_branch: String,
    pub intermediates: BTreeMap<String, f64>,
}

impl BreakdownReport {
    fn new(bound: f64, formula_branch: impl Into<String>) -> Self {
        debug_assert!((0.0..=0.5).contains(&bound), "bound {bound} outside [0, 1/2]");
        Self { bound, formula_branch: formula_branch.into(), intermediates: BTreeMap::new() }
    }

    fn with(mut self, name: &str, value: f64) -> Self {
        self.intermediates.insert(name.to_string(), value);
        self
    }
}

/// `(B/(1+α))^{1/A}`.
fn x_factor(params: &DivergenceParams) -> f64 {
    (params.b_exp.max(0.0) / (1.0 + params.alpha)).powf(1.0 / params.a_exp)
}

fn require_positive_a(params: &DivergenceParams) -> Result<()> {
    if params.branch == Branch::ALimit || params.a_exp <= 0.0 {
        Err(Error::BranchUnsupported(Branch::ALimit.as_str()))
    } else {
        Ok(())
    }
}

/// `min{x, 1-x}` with `x = (B/(1+α))^{1/A}`.
pub fn bound_theorem2(params: &DivergenceParams) -> Result<BreakdownReport> {
    require_positive_a(params)?;
    let x = x_factor(params);
    Ok(BreakdownReport::new(x.min(1.0 - x), "theorem2").with("A", params.a_exp).with("B", params.b_exp).with("x", x))
}

/// `α/(1+α)`: the bound for the minimum density power divergence functional.
pub fn bound_dpd(alpha: f64) -> f64 {
    alpha / (1.0 + alpha)
}

/// `min{(BL/(1+α))^{1/A}, 1-x, 1/2}`; `L = +inf` drops the first term.
pub fn bound_theorem3(params: &DivergenceParams, l: f64) -> Result<BreakdownReport> {
    require_positive_a(params)?;
    if l.is_nan() || l < 0.0 {
        return Err(Error::InvalidArgument(format!("L must be nonnegative or +inf, got {l}")));
    }
    let x = x_factor(params);
    let first = if l == f64::INFINITY {
        f64::INFINITY
    } else {
        (params.b_exp.max(0.0) * l / (1.0 + params.alpha)).powf(1.0 / params.a_exp)
    };
    let bound = first.min(1.0 - x).min(0.5);
    Ok(BreakdownReport::new(bound, "theorem3")
        .with("A", params.a_exp)
        .with("B", params.b_exp)
        .with("L", l)
        .with("x", x)
        .with("first_term", first))
}

/// A heatmap cell value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundValue {
    Value(f64),
    /// `A < 0` or `B < 0`: the analysis provides no bound.
    NoGuarantee,
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Value(v) => write!(f, "{v}"),
            BoundValue::NoGuarantee => f.write_str("NOGUARANTEE"),
        }
    }
}

/// One cell of the `(α, λ)` bound map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCell {
    pub alpha: f64,
    pub lambda: f64,
    pub a_exp: f64,
    pub b_exp: f64,
    /// `None` for cells outside the family.
    pub branch: Option<Branch>,
    pub bound: BoundValue,
}

/// The general bound at `(α, λ)` over the whole plane.
///
/// Cells with `A` or `B` below `-BRANCH_TOL` carry [`BoundValue::NoGuarantee`].
/// On the `A = 0` line the bound is its continuous limit: `x → e^{-1/(1+α)}`.
pub fn bound_cell(alpha: f64, lambda: f64) -> Result<BoundCell> {
    let (a, b) = exponents(alpha, lambda);
    let params = match derive_exponents(alpha, lambda) {
        Ok(p) => p,
        Err(Error::OutOfFamily { .. }) => {
            return Ok(BoundCell { alpha, lambda, a_exp: a, b_exp: b, branch: None, bound: BoundValue::NoGuarantee })
        }
        Err(e) => return Err(e),
    };
    let bound = match params.branch {
        Branch::ALimit => {
            let x = (-1.0 / (1.0 + alpha)).exp();
            x.min(1.0 - x)
        }
        _ => bound_theorem2(&params)?.bound,
    };
    Ok(BoundCell { alpha, lambda, a_exp: a, b_exp: b, branch: Some(params.branch), bound: BoundValue::Value(bound) })
}

/// Direction of a scale or rate parameter of the contaminating sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Scale to 0 (normal scale, scatter), rate to ∞ (exponential, gamma).
    Implode,
    /// Scale to ∞, rate to 0.
    Explode,
}

/// How the estimate's scale compares with the contaminant's along an
/// imploding sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRegime {
    /// No control over the rate: the worst case over both regimes.
    Unknown,
    /// The estimate degenerates faster; `M_k` stays controlled relative to
    /// `M_f` and the general bound applies.
    EstimateFaster,
    /// The estimate degenerates slower; the `L`-factor bound applies.
    EstimateSlower,
}

/// A family together with a contaminating sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitScenario {
    /// `N(μ_k, σ²)` with `|μ_k| → ∞`.
    NormalLocation,
    /// `N_p(μ_k, Σ)` with `‖μ_k‖ → ∞`.
    MvNormalLocation { dim: usize },
    /// `N(η, σ_k²)` with `σ_k → 0` or `∞`; the model is `N(0, σ²)`.
    NormalScale { direction: Direction, eta: f64, regime: RateRegime },
    /// Multivariate normal contaminants converging to a singular
    /// distribution located at `η`; only whether `η = 0` matters.
    MvNormalScatter { dim: usize, direction: Direction, eta: f64, regime: RateRegime },
    /// `Exp(λ_k)` with `λ_k → ∞` or `0`.
    Exponential { direction: Direction, regime: RateRegime },
    /// `Gamma(t, λ_k)` with `λ_k → ∞` or `0`.
    Gamma { shape: f64, direction: Direction, regime: RateRegime },
}

impl LimitScenario {
    pub fn name(&self) -> &'static str {
        match self {
            LimitScenario::NormalLocation => "normal-location",
            LimitScenario::MvNormalLocation { .. } => "mv-location",
            LimitScenario::NormalScale { .. } => "normal-scale",
            LimitScenario::MvNormalScatter { .. } => "mv-scatter",
            LimitScenario::Exponential { .. } => "exponential",
            LimitScenario::Gamma { .. } => "gamma",
        }
    }

    fn direction(&self) -> Option<Direction> {
        match *self {
            LimitScenario::NormalScale { direction, .. }
            | LimitScenario::MvNormalScatter { direction, .. }
            | LimitScenario::Exponential { direction, .. }
            | LimitScenario::Gamma { direction, .. } => Some(direction),
            _ => None,
        }
    }

    fn regime(&self) -> RateRegime {
        match *self {
            LimitScenario::NormalScale { regime, .. }
            | LimitScenario::MvNormalScatter { regime, .. }
            | LimitScenario::Exponential { regime, .. }
            | LimitScenario::Gamma { regime, .. } => regime,
            _ => RateRegime::Unknown,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::UnknownScenario(m));
        match *self {
            LimitScenario::MvNormalLocation { dim } | LimitScenario::MvNormalScatter { dim, .. } if dim == 0 => {
                bad("dimension must be at least 1".into())
            }
            LimitScenario::Gamma { shape, .. } if !(shape > 0.0 && shape.is_finite()) => {
                bad(format!("gamma shape must be positive, got {shape}"))
            }
            LimitScenario::NormalScale { eta, .. } | LimitScenario::MvNormalScatter { eta, .. } if !eta.is_finite() => {
                bad(format!("eta must be finite, got {eta}"))
            }
            _ => Ok(()),
        }
    }
}

fn is_one(a: f64) -> bool {
    (a - 1.0).abs() < BRANCH_TOL
}

/// Three-way comparison of `α` with `Bt`, with rounding slack.
fn compare_alpha_bt(params: &DivergenceParams, t: f64) -> std::cmp::Ordering {
    let bt = params.b_exp * t;
    if (params.alpha - bt).abs() <= BRANCH_TOL * (1.0 + params.alpha + bt.abs()) {
        std::cmp::Ordering::Equal
    } else {
        params.alpha.total_cmp(&bt)
    }
}

/// Limit of the `L`-factor along the scenario's contaminating sequence,
/// in the regime where the estimate degenerates more slowly than the
/// contaminant (the only regime where the `L`-factor bound is used).
/// Location and exploding scenarios have `L = +inf`: the cross integral
/// vanishes while `M_f` does not.
pub fn scenario_l(scenario: &LimitScenario, params: &DivergenceParams) -> Result<f64> {
    scenario.validate()?;
    require_positive_a(params)?;
    if scenario.direction() == Some(Direction::Explode) {
        return Ok(f64::INFINITY);
    }
    let (a, alpha) = (params.a_exp, params.alpha);
    let by_a = |at_one: f64| {
        if is_one(a) {
            at_one
        } else if a > 1.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    Ok(match *scenario {
        LimitScenario::NormalLocation | LimitScenario::MvNormalLocation { .. } => f64::INFINITY,
        LimitScenario::NormalScale { eta, .. } => {
            by_a(if eta == 0.0 { (1.0 + alpha).powf(-0.5) } else { f64::INFINITY })
        }
        LimitScenario::MvNormalScatter { dim, eta, .. } => {
            by_a(if eta == 0.0 { (1.0 + alpha).powf(-(dim as f64) / 2.0) } else { f64::INFINITY })
        }
        LimitScenario::Exponential { .. } => by_a(1.0 / (1.0 + alpha)),
        LimitScenario::Gamma { shape, .. } => match compare_alpha_bt(params, shape) {
            std::cmp::Ordering::Greater => 0.0,
            std::cmp::Ordering::Equal => (a / (1.0 + alpha)).powf(a * shape),
            std::cmp::Ordering::Less => f64::INFINITY,
        },
    })
}

/// Breakdown bound for a scenario.
///
/// Location scenarios give `1/2` whenever `A, B > 0`. Exploding scale or
/// rate sequences keep `M_k` bounded and use [`bound_theorem2`]. Imploding
/// sequences use [`bound_theorem2`] or [`bound_theorem3`] with
/// [`scenario_l`] according to the rate regime; with
/// [`RateRegime::Unknown`] the result is the piecewise worst case.
pub fn scenario_breakdown(scenario: &LimitScenario, params: &DivergenceParams) -> Result<BreakdownReport> {
    scenario.validate()?;
    require_positive_a(params)?;
    let l = scenario_l(scenario, params)?;
    let tag = |r: BreakdownReport| r.with("L", l).with("A", params.a_exp).with("B", params.b_exp);

    if matches!(scenario, LimitScenario::NormalLocation | LimitScenario::MvNormalLocation { .. }) {
        if params.branch == Branch::BLimit {
            let r = bound_theorem2(params)?;
            return Ok(tag(BreakdownReport::new(r.bound, "location: B = 0, theorem2")));
        }
        return Ok(tag(BreakdownReport::new(0.5, "location: A, B > 0")));
    }
    if scenario.direction() == Some(Direction::Explode) {
        let r = bound_theorem2(params)?;
        return Ok(tag(BreakdownReport::new(r.bound, "explode: theorem2").with("x", r.intermediates["x"])));
    }
    match scenario.regime() {
        RateRegime::EstimateFaster => {
            let r = bound_theorem2(params)?;
            Ok(tag(BreakdownReport::new(r.bound, "implode, faster estimate: theorem2").with("x", r.intermediates["x"])))
        }
        RateRegime::EstimateSlower => {
            let r = bound_theorem3(params, l)?;
            Ok(tag(BreakdownReport::new(r.bound, "implode, slower estimate: theorem3").with("x", r.intermediates["x"])))
        }
        RateRegime::Unknown => implode_summary(scenario, params, l).map(tag),
    }
}

/// Piecewise worst case over both rate regimes for imploding sequences.
fn implode_summary(scenario: &LimitScenario, params: &DivergenceParams, l: f64) -> Result<BreakdownReport> {
    let (a, alpha) = (params.a_exp, params.alpha);
    let x = x_factor(params);
    let small_a = || BreakdownReport::new(x.min(0.5), "0 < A < 1: min{1/2, x}").with("x", x);
    let report = match *scenario {
        LimitScenario::NormalScale { eta, .. } | LimitScenario::MvNormalScatter { eta, .. } => {
            let p = match *scenario {
                LimitScenario::MvNormalScatter { dim, .. } => dim as f64,
                _ => 1.0,
            };
            if is_one(a) {
                if eta == 0.0 {
                    BreakdownReport::new(alpha * (1.0 + alpha).powf(-(1.0 + p / 2.0)), "A = 1, eta = 0")
                } else {
                    BreakdownReport::new(alpha / (1.0 + alpha), "A = 1, eta != 0")
                }
            } else if a > 1.0 {
                BreakdownReport::new(0.0, "A > 1")
            } else {
                small_a()
            }
        }
        LimitScenario::Exponential { .. } => {
            if is_one(a) {
                BreakdownReport::new(alpha / (1.0 + alpha).powi(2), "A = 1")
            } else if a > 1.0 {
                BreakdownReport::new(0.0, "A > 1")
            } else {
                small_a()
            }
        }
        LimitScenario::Gamma { shape, .. } => match compare_alpha_bt(params, shape) {
            std::cmp::Ordering::Greater => BreakdownReport::new(0.0, "alpha > Bt"),
            std::cmp::Ordering::Equal => {
                let at = a * shape;
                let via_l = bound_theorem3(params, l)?.bound;
                BreakdownReport::new(alpha * a.powf(at) * (1.0 + alpha).powf(-(1.0 + at)), "alpha = Bt")
                    .with("theorem3_from_L", via_l)
            }
            std::cmp::Ordering::Less => {
                let r = small_a();
                BreakdownReport { formula_branch: "alpha < Bt: min{1/2, x}".into(), ..r }
            }
        },
        LimitScenario::NormalLocation | LimitScenario::MvNormalLocation { .. } => unreachable!("handled by caller"),
    };
    Ok(report)
}

/// Result of an inequality check: `lhs` against `rhs` and the verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Slack allowed by [`lemma1_check`].
pub const LEMMA1_SLACK: f64 = 1e-9;

/// Everything [`lemma1_check`] computes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Report {
    /// `S(εg, f) ≥ S(εg, g)`.
    pub main: InequalityCheck,
    /// `1/A M_f - ε^A (1+α)/(AB) M_f^{B/(1+α)} M_g^{A/(1+α)} ≥ 1/A M_g - ε^A (1+α)/(AB) M_g`.
    pub chain: InequalityCheck,
    /// `∫ f^B g^A ≤ M_f^{B/(1+α)} M_g^{A/(1+α)}` (Hölder).
    pub holder: InequalityCheck,
    pub mass_f: f64,
    pub mass_g: f64,
    /// `(B/(1+α))^{1/A}`.
    pub eps_cap: f64,
}

/// Checks `S(εg, f) ≥ S(εg, g)` for `ε ≤ (B/(1+α))^{1/A}` and `M_f ≥ M_g`,
/// along with the intermediate steps of its proof.
///
/// Fails with [`Error::PreconditionViolated`] when either hypothesis does
/// not hold: the check would then be vacuous.
pub fn lemma1_check(
    params: &DivergenceParams,
    eps: f64,
    g: &DensityModel,
    f: &DensityModel,
    integrator: &IntegratorHandle,
) -> Result<Lemma1Report> {
    if params.branch != Branch::Generic {
        return Err(Error::BranchUnsupported(params.branch.as_str()));
    }
    let cap = x_factor(params);
    if !(0.0..=cap).contains(&eps) {
        return Err(Error::PreconditionViolated(format!("eps = {eps} is outside [0, {cap}]")));
    }
    let mass_f = mass(f, params.alpha, integrator)?;
    let mass_g = mass(g, params.alpha, integrator)?;
    if mass_f < mass_g {
        return Err(Error::PreconditionViolated(format!("M_f = {mass_f} < M_g = {mass_g}")));
    }
    let lhs = s_divergence_scaled(params, eps, g, f, integrator)?;
    let rhs = s_divergence_scaled(params, eps, g, g, integrator)?;

    let (a, b, ap1) = (params.a_exp, params.b_exp, 1.0 + params.alpha);
    let c = eps.powf(a) * ap1 / (a * b);
    let holder_bound = mass_f.powf(b / ap1) * mass_g.powf(a / ap1);
    let chain_lhs = mass_f / a - c * holder_bound;
    let chain_rhs = mass_g / a - c * mass_g;
    let cross = integrate_pair(integrator, f, g, |x| (b * f.ln_eval(x) + a * g.ln_eval(x)).exp(), 21)?;
    let slack = |v: f64| LEMMA1_SLACK * v.abs().max(1.0);
    Ok(Lemma1Report {
        main: InequalityCheck { holds: lhs >= rhs - LEMMA1_SLACK, lhs, rhs },
        chain: InequalityCheck { holds: chain_lhs >= chain_rhs - slack(chain_rhs), lhs: chain_lhs, rhs: chain_rhs },
        holder: InequalityCheck { holds: cross <= holder_bound + slack(holder_bound), lhs: cross, rhs: holder_bound },
        mass_f,
        mass_g,
        eps_cap: cap,
    })
}

/// Both forms of the contamination inequality at one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bp3Report {
    /// `S(εk, f) > ε^{1+α} M_k / B + [1/A - (1+α)(1-ε)^A/(AB)] M_g`.
    pub divergence_form: InequalityCheck,
    /// `M_f - (1+α)/B ε^A ∫ f^B k^A > [1 - (1+α)/B (1-ε)^A] M_g`.
    pub mass_form: InequalityCheck,
    /// Whether the two verdicts agree (they are algebraically equivalent).
    pub consistent: bool,
}

impl Bp3Report {
    pub fn holds(&self) -> bool {
        self.divergence_form.holds
    }
}

/// Evaluates the contamination inequality at fixed densities `k`, `f_θ`
/// and `g`, in both its divergence and its mass form.
pub fn bp3_inequality_check(
    params: &DivergenceParams,
    eps: f64,
    k: &DensityModel,
    f_theta: &DensityModel,
    g: &DensityModel,
    integrator: &IntegratorHandle,
) -> Result<Bp3Report> {
    if params.branch != Branch::Generic {
        return Err(Error::BranchUnsupported(params.branch.as_str()));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps must lie in [0, 1], got {eps}")));
    }
    check_same_support(k, f_theta)?;
    check_same_support(k, g)?;
    let (a, b, ap1) = (params.a_exp, params.b_exp, 1.0 + params.alpha);
    let m_f = mass(f_theta, params.alpha, integrator)?;
    let m_k = mass(k, params.alpha, integrator)?;
    let m_g = mass(g, params.alpha, integrator)?;

    let s = s_divergence_scaled(params, eps, k, f_theta, integrator)?;
    let rhs15 = eps.powf(ap1) * m_k / b + (1.0 / a - ap1 * (1.0 - eps).powf(a) / (a * b)) * m_g;

    let cross = integrate_pair(integrator, f_theta, k, |x| (b * f_theta.ln_eval(x) + a * k.ln_eval(x)).exp(), 22)?;
    let lhs16 = m_f - ap1 / b * eps.powf(a) * cross;
    let rhs16 = (1.0 - ap1 / b * (1.0 - eps).powf(a)) * m_g;

    let h15 = s > rhs15;
    let h16 = lhs16 > rhs16;
    // a verdict may only flip when the margin is at rounding level
    let margin = (lhs16 - rhs16).abs();
    let scale = m_f.abs().max(m_g.abs()).max(ap1 / b * cross.abs()).max(1e-300);
    Ok(Bp3Report {
        divergence_form: InequalityCheck { holds: h15, lhs: s, rhs: rhs15 },
        mass_form: InequalityCheck { holds: h16, lhs: lhs16, rhs: rhs16 },
        consistent: h15 == h16 || margin <= 1e-8 * scale,
    })
}

/// `∫ min(p, q)`: 1 for equal densities and near 0 for nearly singular ones.
pub fn singularity_overlap(p: &DensityModel, q: &DensityModel, integrator: &IntegratorHandle) -> Result<f64> {
    check_same_support(p, q)?;
    let support = p.support();
    let mut breaks = merged_hints(&[p, q]);
    if matches!(support, Support::RealLine | Support::HalfLinePositive) {
        breaks.extend(crossings(p, q, &breaks, support));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
    }
    let domain = Domain::from_support(support).with_breakpoints(breaks);
    let integrator = if integrator.is_monte_carlo() { IntegratorHandle::quadrature() } else { *integrator };
    let v = integrate(&integrator, |x| p.ln_eval(x).min(q.ln_eval(x)).exp(), &domain)?.value;
    Ok(v)
}

/// Points where `ln p - ln q` changes sign, located by bisection on a scan
/// of the region spanned by the hints.
fn crossings(p: &DensityModel, q: &DensityModel, hints: &[f64], support: Support) -> Vec<f64> {
    let (Some(&first), Some(&last)) = (hints.first(), hints.last()) else {
        return Vec::new();
    };
    let span = (last - first).max(1.0);
    let lo = match support {
        Support::HalfLinePositive => 0.0,
        _ => first - span,
    };
    let hi = last + span;
    let diff = |x: f64| {
        let (a, b) = (p.ln_eval1(x), q.ln_eval1(x));
        if a == b {
            0.0
        } else {
            a - b
        }
    };
    let mut grid: Vec<f64> = Vec::new();
    let mut anchors = vec![lo];
    anchors.extend(hints.iter().copied().filter(|&h| h > lo && h < hi));
    anchors.push(hi);
    for w in anchors.windows(2) {
        for i in 0..32 {
            grid.push(w[0] + (w[1] - w[0]) * i as f64 / 32.0);
        }
    }
    grid.push(hi);
    let mut out = Vec::new();
    for w in grid.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut da, db) = (diff(a), diff(b));
        if !(da.is_finite() && db.is_finite()) || da.signum() == db.signum() || da == 0.0 || db == 0.0 {
            continue;
        }
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            let dm = diff(m);
            if dm.signum() == da.signum() {
                a = m;
                da = dm;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::normal;

    fn params(a: f64, l: f64) -> DivergenceParams {
        derive_exponents(a, l).unwrap()
    }

    #[test]
    fn theorem2_examples() {
        assert!((bound_theorem2(&params(0.0, -0.5)).unwrap().bound - 0.25).abs() < 1e-15);
        for l in [-3.0, 0.0, 2.0] {
            assert!((bound_theorem2(&params(1.0, l)).unwrap().bound - 0.5).abs() < 1e-15);
        }
        let v = bound_theorem2(&params(0.5, -0.5)).unwrap().bound;
        assert!((v - 2f64.powf(-4.0 / 3.0)).abs() < 1e-15);
        assert!(matches!(bound_theorem2(&params(0.0, -1.0)), Err(Error::BranchUnsupported(_))));
    }

    #[test]
    fn dpd_bound() {
        assert!((bound_dpd(0.5) - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(bound_dpd(0.0), 0.0);
        assert_eq!(bound_dpd(1.0), 0.5);
    }

    #[test]
    fn theorem3_examples() {
        let p = params(0.3, -0.2);
        let t2 = bound_theorem2(&p).unwrap().bound.min(0.5);
        assert!((bound_theorem3(&p, 1.0).unwrap().bound - t2).abs() < 1e-15);
        assert_eq!(bound_theorem3(&p, 0.0).unwrap().bound, 0.0);
        let v = bound_theorem3(&params(0.5, 0.0), f64::INFINITY).unwrap().bound;
        assert_eq!(v, 0.5);
        assert!(bound_theorem3(&p, -1.0).is_err());
    }

    #[test]
    fn scenario_l_examples() {
        let implode =
            |eta| LimitScenario::NormalScale { direction: Direction::Implode, eta, regime: RateRegime::Unknown };
        let l = scenario_l(&implode(0.0), &params(0.5, 0.0)).unwrap();
        assert!((l - 1.5f64.powf(-0.5)).abs() < 1e-15);
        assert_eq!(scenario_l(&implode(0.0), &params(0.5, -0.5)).unwrap(), f64::INFINITY);
        assert_eq!(scenario_l(&implode(0.0), &params(0.5, 0.5)).unwrap(), 0.0);
    }

    #[test]
    fn scenario_examples() {
        let exp = LimitScenario::Exponential { direction: Direction::Implode, regime: RateRegime::Unknown };
        let v = scenario_breakdown(&exp, &params(0.5, 0.0)).unwrap().bound;
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
        let mv = LimitScenario::MvNormalScatter {
            dim: 2,
            direction: Direction::Implode,
            eta: 0.0,
            regime: RateRegime::Unknown,
        };
        assert!((scenario_breakdown(&mv, &params(1.0, 0.0)).unwrap().bound - 0.25).abs() < 1e-15);
        assert_eq!(scenario_breakdown(&exp, &params(0.5, 0.5)).unwrap().bound, 0.0);
        let gamma1 = LimitScenario::Gamma { shape: 1.0, direction: Direction::Implode, regime: RateRegime::Unknown };
        let g = scenario_breakdown(&gamma1, &params(0.5, 0.0)).unwrap().bound;
        assert!((g - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn slower_regime_matches_theorem3_for_the_dpd() {
        let p = params(0.5, 0.0);
        let sc =
            LimitScenario::NormalScale { direction: Direction::Implode, eta: 0.0, regime: RateRegime::EstimateSlower };
        let v = scenario_breakdown(&sc, &p).unwrap().bound;
        assert!((v - 0.5 / 1.5f64.powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn lemma1_examples() {
        let q = IntegratorHandle::quadrature();
        let p = params(0.5, 0.0);
        let f = normal(0.0, 1.0).unwrap();
        let g = normal(0.0, 2.0).unwrap();
        let r = lemma1_check(&p, 0.3, &g, &f, &q).unwrap();
        assert!(r.main.holds && r.chain.holds && r.holder.holds, "{r:?}");
        let same = lemma1_check(&p, 0.3, &g, &g, &q).unwrap();
        assert_eq!(same.main.lhs, same.main.rhs);
        assert!(matches!(lemma1_check(&p, 0.34, &g, &f, &q), Err(Error::PreconditionViolated(_))));
        assert!(matches!(lemma1_check(&p, 0.3, &f, &g, &q), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn bp3_examples() {
        let q = IntegratorHandle::quadrature();
        let p = params(0.5, 0.0);
        let g = normal(0.0, 1.0).unwrap();
        let k = normal(50.0, 1.0).unwrap();
        let far = normal(-50.0, 1.0).unwrap();
        let r = bp3_inequality_check(&p, 0.4, &k, &far, &g, &q).unwrap();
        assert!(r.holds() && r.consistent, "{r:?}");
        let r = bp3_inequality_check(&p, 0.6, &k, &k, &g, &q).unwrap();
        assert!(!r.holds() && r.consistent, "{r:?}");
        let r = bp3_inequality_check(&p, 0.4, &k, &k, &g, &q).unwrap();
        assert!(r.holds() && r.consistent, "{r:?}");
    }

    #[test]
    fn overlap_examples() {
        let q = IntegratorHandle::quadrature();
        let a = normal(0.0, 1.0).unwrap();
        assert!((singularity_overlap(&a, &a, &q).unwrap() - 1.0).abs() < 1e-10);
        let b = normal(1.0, 1.0).unwrap();
        let expect = 2.0 * statrs::function::erf::erfc(0.5 / std::f64::consts::SQRT_2) / 2.0;
        assert!((singularity_overlap(&a, &b, &q).unwrap() - expect).abs() < 1e-10);
        let c = normal(20.0, 1.0).unwrap();
        assert!(singularity_overlap(&a, &c, &q).unwrap() < 1e-6);
    }

    #[test]
    fn bound_cells() {
        let c = bound_cell(0.0, 1.0).unwrap();
        assert_eq!(c.bound, BoundValue::NoGuarantee);
        assert_eq!(bound_cell(1.0, 0.0).unwrap().bound, BoundValue::Value(0.5));
        assert_eq!(bound_cell(0.0, -0.5).unwrap().bound, BoundValue::Value(0.25));
        let a0 = bound_cell(0.0, -1.0).unwrap();
        assert_eq!(a0.branch, Some(Branch::ALimit));
        let x = (-1.0f64).exp();
        assert_eq!(a0.bound, BoundValue::Value(x.min(1.0 - x)));
    }
}
