//! The S-divergence family, the density power divergence and the mass
//! functional.
//!
//! For `0 ≤ α ≤ 1` and real `λ`, set `A = 1 + λ(1-α)` and `B = α - λ(1-α)`
//! (so `A + B = 1 + α`). For `A, B > 0`
//!
//! ```text
//! S(g, f) = 1/A ∫ f^{1+α} - (1+α)/(AB) ∫ f^B g^A + 1/B ∫ g^{1+α}
//! ```
//!
//! and the `A = 0` and `B = 0` cases are the continuous limits
//!
//! ```text
//! A = 0:  ∫ f^{1+α} ln(f/g) - 1/(1+α) ∫ (f^{1+α} - g^{1+α})
//! B = 0:  ∫ g^{1+α} ln(g/f) - 1/(1+α) ∫ (g^{1+α} - f^{1+α})
//! ```
//!
//! All three are integrated as a single pointwise integrand, which is
//! nonnegative by Young's inequality and vanishes where `f = g`. Values are
//! extended reals: `+inf` is a legitimate result (for example the `B = 0`
//! branch when `g > 0` on a set where `f = 0`).

use std::fmt;

use crate::density::{merged_hints, DensityModel};
use crate::error::{Error, Result};
use crate::integrate::{integrate_weighted, Domain, IntegratorHandle};
use crate::models::{check_same_support, mixture, ContaminationSpec};

/// Threshold below which `|A|` or `|B|` selects a limit branch.
pub const BRANCH_TOL: f64 = 1e-12;

/// Which closed form applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Generic,
    /// `A = 0`.
    ALimit,
    /// `B = 0`.
    BLimit,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Generic => "generic",
            Branch::ALimit => "A-limit",
            Branch::BLimit => "B-limit",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tuning pair `(α, λ)` with its exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceParams {
    pub alpha: f64,
    pub lambda: f64,
    pub a_exp: f64,
    pub b_exp: f64,
    pub branch: Branch,
}

/// Computes `A`, `B` and the branch for `(α, λ)`.
///
/// Fails with [`Error::OutOfFamily`] when `A` or `B` is negative beyond
/// [`BRANCH_TOL`].
pub fn derive_exponents(alpha: f64, lambda: f64) -> Result<DivergenceParams> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite, got {lambda}")));
    }
    let (a, b) = exponents(alpha, lambda);
    if a < -BRANCH_TOL || b < -BRANCH_TOL {
        return Err(Error::OutOfFamily { alpha, lambda, a, b });
    }
    let branch = if a.abs() < BRANCH_TOL {
        Branch::ALimit
    } else if b.abs() < BRANCH_TOL {
        Branch::BLimit
    } else {
        Branch::Generic
    };
    Ok(DivergenceParams { alpha, lambda, a_exp: a, b_exp: b, branch })
}

/// `(A, B)` without any validation.
pub fn exponents(alpha: f64, lambda: f64) -> (f64, f64) {
    let t = lambda * (1.0 - alpha);
    (1.0 + t, alpha - t)
}

impl DivergenceParams {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        derive_exponents(alpha, lambda)
    }

    pub fn is_generic(&self) -> bool {
        self.branch == Branch::Generic
    }

    /// Pointwise S-divergence integrand from the log-densities `lg`, `lf`.
    ///
    /// Nonnegative; exactly zero when `lg == lf`.
    pub fn integrand(&self, lg: f64, lf: f64) -> f64 {
        let ap1 = 1.0 + self.alpha;
        let (a, b) = (self.a_exp, self.b_exp);
        let ninf = f64::NEG_INFINITY;
        match self.branch {
            Branch::Generic => {
                if lf == ninf {
                    return (ap1 * lg).exp() / b;
                }
                if lg == ninf {
                    return (ap1 * lf).exp() / a;
                }
                let d = lg - lf;
                // near a limit line the cross term cancels the f or g term
                // up to a factor 1/A or 1/B; regroup through expm1
                if b < a && b < 0.25 && (b * d).abs() < 1.0 {
                    let (fa, ga) = ((ap1 * lf).exp(), (ap1 * lg).exp());
                    (fa - ga) / a - ga * ap1 * (-b * d).exp_m1() / (a * b)
                } else if d.abs() < 1.0 {
                    (ap1 * lf).exp() * ((ap1 * d).exp_m1() / b - ap1 / (a * b) * (a * d).exp_m1())
                } else if a < 0.25 && (a * d).abs() < 1.0 {
                    let (fa, ga) = ((ap1 * lf).exp(), (ap1 * lg).exp());
                    (ga - fa) / b - fa * ap1 * (a * d).exp_m1() / (a * b)
                } else {
                    (ap1 * lf).exp() / a - ap1 / (a * b) * (b * lf + a * lg).exp() + (ap1 * lg).exp() / b
                }
            }
            Branch::ALimit => {
                if lf == ninf {
                    return (ap1 * lg).exp() / ap1;
                }
                if lg == ninf {
                    return f64::INFINITY;
                }
                let d = lg - lf;
                if d.abs() < 1.0 {
                    (ap1 * lf).exp() * ((ap1 * d).exp_m1() / ap1 - d)
                } else {
                    let mf = (ap1 * lf).exp();
                    -d * mf - mf / ap1 + (ap1 * lg).exp() / ap1
                }
            }
            Branch::BLimit => {
                if lg == ninf {
                    return (ap1 * lf).exp() / ap1;
                }
                if lf == ninf {
                    return f64::INFINITY;
                }
                let d = lg - lf;
                if d.abs() < 1.0 {
                    (ap1 * lg).exp() * (d + (-ap1 * d).exp_m1() / ap1)
                } else {
                    let mg = (ap1 * lg).exp();
                    d * mg - mg / ap1 + (ap1 * lf).exp() / ap1
                }
            }
        }
    }
}

fn pair_domain(a: &DensityModel, b: &DensityModel) -> Domain {
    Domain::from_support(a.support()).with_breakpoints(merged_hints(&[a, b]))
}

/// Importance density for Monte Carlo: the equal-weight mixture of `a` and `b`.
fn pair_weight(a: &DensityModel, b: &DensityModel) -> Result<DensityModel> {
    mixture(&ContaminationSpec::new(a.clone(), b.clone(), 0.5)?)
}

/// Integrates `integrand` over the common support of `a` and `b`.
pub(crate) fn integrate_pair<F>(
    integrator: &IntegratorHandle,
    a: &DensityModel,
    b: &DensityModel,
    integrand: F,
    call_tag: u64,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    check_same_support(a, b)?;
    let domain = pair_domain(a, b);
    let weight = if integrator.is_monte_carlo() && !a.support().is_discrete() { pair_weight(a, b)? } else { a.clone() };
    let v = integrate_weighted(integrator, integrand, &weight, &domain, call_tag)?.value;
    debug_assert!(v != f64::NEG_INFINITY);
    Ok(v)
}

/// `M_f = ∫ f^{1+α}`: the closed form when the model carries one, numerical
/// integration otherwise.
pub fn mass(f: &DensityModel, alpha: f64, integrator: &IntegratorHandle) -> Result<f64> {
    power_mass(f, 1.0 + alpha, integrator)
}

/// `∫ f^β`.
pub fn power_mass(f: &DensityModel, beta: f64, integrator: &IntegratorHandle) -> Result<f64> {
    if beta < 1.0 {
        return Err(Error::InvalidArgument(format!("mass exponent must be at least 1, got {beta}")));
    }
    if let Some(m) = f.closed_mass(beta) {
        return m;
    }
    let domain = Domain::from_support(f.support()).with_breakpoints(f.hints().to_vec());
    Ok(integrate_weighted(integrator, |x| (beta * f.ln_eval(x)).exp(), f, &domain, 1)?.value)
}

/// `S_(α,λ)(g, f)`.
pub fn s_divergence(
    params: &DivergenceParams,
    g: &DensityModel,
    f: &DensityModel,
    integrator: &IntegratorHandle,
) -> Result<f64> {
    scaled(params, 0.0, g, f, integrator)
}

/// `S_(α,λ)(ε k, f)` for the sub-density `ε k` (not renormalised).
pub fn s_divergence_scaled(
    params: &DivergenceParams,
    eps: f64,
    k: &DensityModel,
    f: &DensityModel,
    integrator: &IntegratorHandle,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps must lie in [0, 1], got {eps}")));
    }
    scaled(params, eps.ln(), k, f, integrator)
}

fn scaled(
    params: &DivergenceParams,
    ln_eps: f64,
    g: &DensityModel,
    f: &DensityModel,
    integrator: &IntegratorHandle,
) -> Result<f64> {
    integrate_pair(integrator, g, f, |x| params.integrand(ln_eps + g.ln_eval(x), f.ln_eval(x)), 2)
}

/// Density power divergence `d_α(g, f)`; the Kullback–Leibler divergence
/// `∫ g ln(g/f)` at `α = 0`.
pub fn dpd(alpha: f64, g: &DensityModel, f: &DensityModel, integrator: &IntegratorHandle) -> Result<f64> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
    }
    let integrand = |x: &[f64]| {
        let (lg, lf) = (g.ln_eval(x), f.ln_eval(x));
        if alpha == 0.0 {
            if lg == f64::NEG_INFINITY {
                0.0
            } else if lf == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                lg.exp() * (lg - lf)
            }
        } else {
            let fa = (alpha * lf).exp();
            let ff = fa * lf.exp();
            let gg = ((1.0 + alpha) * lg).exp();
            ff - (1.0 + 1.0 / alpha) * lg.exp() * fa + gg / alpha
        }
    };
    integrate_pair(integrator, g, f, integrand, 3)
}

/// `r(ε) = 1/A - (1+α) ε^A / (AB) + ε^{1+α} / B`, so that
/// `S(ε g, g) = M_g r(ε)`.
pub fn r_fn(params: &DivergenceParams, eps: f64) -> Result<f64> {
    if params.branch != Branch::Generic {
        return Err(Error::BranchUnsupported(params.branch.as_str()));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps must lie in [0, 1], got {eps}")));
    }
    let (a, b, ap1) = (params.a_exp, params.b_exp, 1.0 + params.alpha);
    Ok(1.0 / a - ap1 * eps.powf(a) / (a * b) + eps.powf(ap1) / b)
}
