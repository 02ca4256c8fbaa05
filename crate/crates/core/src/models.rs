//! Parametric families, their power masses, and contamination mixtures.

use std::f64::consts::PI;
use std::fmt;

use statrs::function::gamma::ln_gamma;

use crate::density::{log_add_exp, merged_hints, DensityModel, Sampler, Support};
use crate::error::{Error, Result};

/// Size of the binomial family used by default.
pub const DEFAULT_BINOMIAL_SIZE: u32 = 12;

/// The model families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    /// `N(μ, σ²)` with σ fixed; θ = (μ).
    NormalLocation { sigma: f64 },
    /// `N(μ, σ²)` with μ fixed; θ = (σ).
    NormalScale { mu: f64 },
    /// θ = (μ, σ).
    NormalLocationScale,
    /// `N_p(μ, σ² I)` with σ fixed; θ = (μ₁, …, μ_p).
    MvNormalLocationIso { dim: usize, sigma: f64 },
    /// `N_p(μ·1, σ² I)` with μ fixed; θ = (σ).
    MvNormalScatterIso { dim: usize, mu: f64 },
    /// θ = (rate).
    Exponential,
    /// Gamma with shape `t` fixed; θ = (rate).
    GammaFixedShape { shape: f64 },
    /// Binomial(n, θ); θ = (success probability).
    BinomialFixedSize { n: u32 },
}

/// One coordinate of the parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamBound {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl ParamBound {
    pub const fn open(lower: f64, upper: f64) -> Self {
        Self { lower, upper, lower_open: true, upper_open: true }
    }

    pub const fn closed(lower: f64, upper: f64) -> Self {
        Self { lower, upper, lower_open: false, upper_open: false }
    }

    /// Whether `v` is an admissible value.
    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lower_open { v > self.lower } else { v >= self.lower };
        let below = if self.upper_open { v < self.upper } else { v <= self.upper };
        v.is_finite() && above && below
    }

    /// Distance from `v` to the nearest boundary point, in the coordinate's
    /// natural metric (`|ln v|`-type distances are the caller's business).
    pub fn distance_to_boundary(&self, v: f64) -> f64 {
        (v - self.lower).abs().min((self.upper - v).abs())
    }
}

/// A model family with its parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub param_space: Vec<ParamBound>,
}

const REAL: ParamBound = ParamBound::open(f64::NEG_INFINITY, f64::INFINITY);
const POSITIVE: ParamBound = ParamBound::open(0.0, f64::INFINITY);

impl FamilySpec {
    pub fn new(kind: FamilyKind) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let dim_ok = |d: usize| {
            if d == 0 {
                Err(Error::InvalidArgument("dimension must be at least 1".into()))
            } else {
                Ok(())
            }
        };
        let param_space = match kind {
            FamilyKind::NormalLocation { sigma } => {
                positive("sigma", sigma)?;
                vec![REAL]
            }
            FamilyKind::NormalScale { mu } => {
                if !mu.is_finite() {
                    return Err(Error::InvalidArgument("mu must be finite".into()));
                }
                vec![POSITIVE]
            }
            FamilyKind::NormalLocationScale => vec![REAL, POSITIVE],
            FamilyKind::MvNormalLocationIso { dim, sigma } => {
                dim_ok(dim)?;
                positive("sigma", sigma)?;
                vec![REAL; dim]
            }
            FamilyKind::MvNormalScatterIso { dim, mu } => {
                dim_ok(dim)?;
                if !mu.is_finite() {
                    return Err(Error::InvalidArgument("mu must be finite".into()));
                }
                vec![POSITIVE]
            }
            FamilyKind::Exponential => vec![POSITIVE],
            FamilyKind::GammaFixedShape { shape } => {
                positive("shape", shape)?;
                vec![POSITIVE]
            }
            FamilyKind::BinomialFixedSize { n } => {
                if n == 0 {
                    return Err(Error::InvalidArgument("binomial size must be at least 1".into()));
                }
                vec![ParamBound::closed(0.0, 1.0)]
            }
        };
        Ok(Self { kind, param_space })
    }

    pub fn normal_location(sigma: f64) -> Result<Self> {
        Self::new(FamilyKind::NormalLocation { sigma })
    }

    pub fn normal_scale(mu: f64) -> Result<Self> {
        Self::new(FamilyKind::NormalScale { mu })
    }

    pub fn normal_location_scale() -> Self {
        Self::new(FamilyKind::NormalLocationScale).expect("no constants to validate")
    }

    pub fn exponential() -> Self {
        Self::new(FamilyKind::Exponential).expect("no constants to validate")
    }

    pub fn gamma(shape: f64) -> Result<Self> {
        Self::new(FamilyKind::GammaFixedShape { shape })
    }

    pub fn binomial(n: u32) -> Result<Self> {
        Self::new(FamilyKind::BinomialFixedSize { n })
    }

    /// Number of free parameters.
    pub fn n_params(&self) -> usize {
        self.param_space.len()
    }

    /// Names of the parameter coordinates, used for output columns.
    pub fn param_names(&self) -> Vec<String> {
        match self.kind {
            FamilyKind::NormalLocation { .. } => vec!["mu".into()],
            FamilyKind::NormalScale { .. } | FamilyKind::MvNormalScatterIso { .. } => vec!["sigma".into()],
            FamilyKind::NormalLocationScale => vec!["mu".into(), "sigma".into()],
            FamilyKind::MvNormalLocationIso { dim, .. } => (1..=dim).map(|i| format!("mu{i}")).collect(),
            FamilyKind::Exponential | FamilyKind::GammaFixedShape { .. } => vec!["rate".into()],
            FamilyKind::BinomialFixedSize { .. } => vec!["theta".into()],
        }
    }

    /// Support of every member of the family.
    pub fn support(&self) -> Support {
        match self.kind {
            FamilyKind::NormalLocation { .. } | FamilyKind::NormalScale { .. } | FamilyKind::NormalLocationScale => {
                Support::RealLine
            }
            FamilyKind::MvNormalLocationIso { dim, .. } | FamilyKind::MvNormalScatterIso { dim, .. } => {
                Support::RealSpace(dim)
            }
            FamilyKind::Exponential | FamilyKind::GammaFixedShape { .. } => Support::HalfLinePositive,
            FamilyKind::BinomialFixedSize { n } => Support::IntegerRange(0, n as i64),
        }
    }

    /// Checks `theta` against the parameter space.
    pub fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::InvalidArgument(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                theta.len()
            )));
        }
        for (v, b) in theta.iter().zip(&self.param_space) {
            if !b.contains(*v) {
                return Err(Error::BoundaryParameter {
                    theta: theta.to_vec(),
                    reason: format!("{v} not in {}{}, {}{}", bracket_l(b), b.lower, b.upper, bracket_r(b)),
                });
            }
        }
        Ok(())
    }
}

fn bracket_l(b: &ParamBound) -> char {
    if b.lower_open {
        '('
    } else {
        '['
    }
}

fn bracket_r(b: &ParamBound) -> char {
    if b.upper_open {
        ')'
    } else {
        ']'
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyKind::NormalLocation { sigma } => write!(f, "normal-location(sigma={sigma})"),
            FamilyKind::NormalScale { mu } => write!(f, "normal-scale(mu={mu})"),
            FamilyKind::NormalLocationScale => write!(f, "normal-location-scale"),
            FamilyKind::MvNormalLocationIso { dim, sigma } => write!(f, "mv-normal-location(p={dim}, sigma={sigma})"),
            FamilyKind::MvNormalScatterIso { dim, mu } => write!(f, "mv-normal-scatter(p={dim}, mu={mu})"),
            FamilyKind::Exponential => write!(f, "exponential"),
            FamilyKind::GammaFixedShape { shape } => write!(f, "gamma(shape={shape})"),
            FamilyKind::BinomialFixedSize { n } => write!(f, "binomial(n={n})"),
        }
    }
}

/// Instantiates `f_θ`.
pub fn density_at(spec: &FamilySpec, theta: &[f64]) -> Result<DensityModel> {
    spec.check(theta)?;
    Ok(match spec.kind {
        FamilyKind::NormalLocation { sigma } => normal(theta[0], sigma)?,
        FamilyKind::NormalScale { mu } => normal(mu, theta[0])?,
        FamilyKind::NormalLocationScale => normal(theta[0], theta[1])?,
        FamilyKind::MvNormalLocationIso { sigma, .. } => mv_normal_iso(theta.to_vec(), sigma)?,
        FamilyKind::MvNormalScatterIso { dim, mu } => mv_normal_iso(vec![mu; dim], theta[0])?,
        FamilyKind::Exponential => exponential(theta[0])?,
        FamilyKind::GammaFixedShape { shape } => gamma(shape, theta[0])?,
        FamilyKind::BinomialFixedSize { n } => binomial(n, theta[0])?,
    })
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Offsets, in standard deviations, used as quadrature breakpoints.
const NORMAL_HINTS: [f64; 5] = [-6.0, -2.0, 0.0, 2.0, 6.0];

/// `∫ φ_σ^β = (2π)^{(1-β)/2} σ^{1-β} β^{-1/2}`.
pub fn normal_power_mass(sd: f64, beta: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::MassDiverges(format!("normal power {beta} is not integrable")));
    }
    Ok(((1.0 - beta) * 0.5 * (2.0 * PI).ln() + (1.0 - beta) * sd.ln() - 0.5 * beta.ln()).exp())
}

/// Univariate normal density.
pub fn normal(mean: f64, sd: f64) -> Result<DensityModel> {
    if !mean.is_finite() {
        return Err(Error::InvalidArgument(format!("mean must be finite, got {mean}")));
    }
    check_positive("sd", sd)?;
    let ln_norm = -0.5 * (2.0 * PI).ln() - sd.ln();
    Ok(DensityModel::from_log_density(Support::RealLine, move |x| {
        let z = (x[0] - mean) / sd;
        ln_norm - 0.5 * z * z
    })
    .with_closed_mass(move |beta| normal_power_mass(sd, beta))
    .with_hints(NORMAL_HINTS.iter().map(|k| mean + k * sd).collect())
    .with_sampler(Sampler::Normal { mean, sd })
    .with_label(format!("N({mean}, {sd}^2)")))
}

/// Isotropic multivariate normal `N_p(mean, sd² I)`.
pub fn mv_normal_iso(mean: Vec<f64>, sd: f64) -> Result<DensityModel> {
    if mean.is_empty() || mean.iter().any(|m| !m.is_finite()) {
        return Err(Error::InvalidArgument("mean must be a nonempty finite vector".into()));
    }
    check_positive("sd", sd)?;
    let p = mean.len();
    let ln_norm = -0.5 * p as f64 * ((2.0 * PI).ln() + 2.0 * sd.ln());
    let hints = mean.iter().flat_map(|m| NORMAL_HINTS.iter().map(move |k| m + k * sd)).collect();
    let label = format!("N_{p}({mean:?}, {sd}^2 I)");
    let m = mean.clone();
    Ok(DensityModel::from_log_density(Support::RealSpace(p), move |x| {
        let q: f64 = x.iter().zip(&m).map(|(xi, mi)| ((xi - mi) / sd).powi(2)).sum();
        ln_norm - 0.5 * q
    })
    .with_closed_mass(move |beta| Ok(normal_power_mass(sd, beta)?.powi(p as i32)))
    .with_hints(hints)
    .with_sampler(Sampler::MvNormalIso { mean, sd })
    .with_label(label))
}

/// `∫ f^β = r^{β-1}/β` for the exponential density with rate `r`.
pub fn exponential_power_mass(rate: f64, beta: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::MassDiverges(format!("exponential power {beta} is not integrable")));
    }
    Ok(rate.powf(beta - 1.0) / beta)
}

/// Exponential density with the given rate.
pub fn exponential(rate: f64) -> Result<DensityModel> {
    check_positive("rate", rate)?;
    let ln_rate = rate.ln();
    Ok(DensityModel::from_log_density(Support::HalfLinePositive, move |x| {
        if x[0] < 0.0 {
            f64::NEG_INFINITY
        } else {
            ln_rate - rate * x[0]
        }
    })
    .with_closed_mass(move |beta| exponential_power_mass(rate, beta))
    .with_hints(vec![1.0 / rate, 4.0 / rate, 16.0 / rate])
    .with_sampler(Sampler::Exponential { rate })
    .with_label(format!("Exp({rate})")))
}

/// `∫ f^β` for the gamma density with shape `t` and rate `r`:
/// `r^{β-1} Γ((t-1)β+1) / (Γ(t)^β β^{(t-1)β+1})`.
pub fn gamma_power_mass(shape: f64, rate: f64, beta: f64) -> Result<f64> {
    let c = (shape - 1.0) * beta + 1.0;
    if beta <= 0.0 || c <= 0.0 {
        return Err(Error::MassDiverges(format!(
            "gamma(shape={shape}) raised to {beta} is not integrable at the origin"
        )));
    }
    Ok(((beta - 1.0) * rate.ln() + ln_gamma(c) - beta * ln_gamma(shape) - c * beta.ln()).exp())
}

/// `M_f = ∫ f^{1+α}` for the gamma density with shape `t` and rate `rate`.
pub fn gamma_mass(t: f64, rate: f64, alpha: f64) -> Result<f64> {
    check_positive("shape", t)?;
    check_positive("rate", rate)?;
    if alpha < 0.0 {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
    }
    gamma_power_mass(t, rate, 1.0 + alpha)
}

/// Gamma density with shape `t` and rate `rate`.
pub fn gamma(t: f64, rate: f64) -> Result<DensityModel> {
    check_positive("shape", t)?;
    check_positive("rate", rate)?;
    let ln_norm = t * rate.ln() - ln_gamma(t);
    let mean = t / rate;
    let spread = t.sqrt() / rate;
    let mut hints = vec![mean, mean + 4.0 * spread, mean + 12.0 * spread];
    if t > 1.0 {
        hints.push((t - 1.0) / rate);
    }
    Ok(DensityModel::from_log_density(Support::HalfLinePositive, move |x| {
        let v = x[0];
        if v < 0.0 {
            f64::NEG_INFINITY
        } else if v == 0.0 {
            // density at the origin: 0, rate (t = 1) or +inf
            match t.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Greater) => f64::NEG_INFINITY,
                Some(std::cmp::Ordering::Equal) => ln_norm,
                _ => f64::INFINITY,
            }
        } else {
            ln_norm + (t - 1.0) * v.ln() - rate * v
        }
    })
    .with_closed_mass(move |beta| gamma_power_mass(t, rate, beta))
    .with_hints(hints)
    .with_sampler(Sampler::Gamma { shape: t, rate })
    .with_label(format!("Gamma({t}, {rate})")))
}

/// `C(n, x) θ^x (1-θ)^{n-x}`, with `0^0 = 1`.
pub fn binomial_pmf(n: u32, theta: f64, x: u32) -> f64 {
    if x > n {
        return 0.0;
    }
    binomial_coefficient(n, x) * pow0(theta, x) * pow0(1.0 - theta, n - x)
}

fn pow0(base: f64, k: u32) -> f64 {
    if k == 0 {
        1.0
    } else {
        base.powi(k as i32)
    }
}

fn binomial_coefficient(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

fn pmf_model(n: u32, pmf: Vec<f64>, label: String) -> DensityModel {
    let ln_pmf: Vec<f64> = pmf.iter().map(|p| p.ln()).collect();
    let masses = pmf.clone();
    DensityModel::from_log_density(Support::IntegerRange(0, n as i64), move |x| {
        let v = x[0];
        if v < 0.0 || v > n as f64 || v.fract() != 0.0 {
            f64::NEG_INFINITY
        } else {
            ln_pmf[v as usize]
        }
    })
    .with_closed_mass(move |beta| {
        if beta <= 0.0 {
            return Err(Error::MassDiverges(format!("pmf power {beta} must be positive")));
        }
        Ok(masses.iter().filter(|&&p| p > 0.0).map(|p| p.powf(beta)).sum())
    })
    .with_label(label)
}

/// Binomial(n, θ) pmf as a density on `{0, …, n}`.
pub fn binomial(n: u32, theta: f64) -> Result<DensityModel> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::BoundaryParameter {
            theta: vec![theta],
            reason: "success probability must lie in [0, 1]".into(),
        });
    }
    let pmf = (0..=n).map(|x| binomial_pmf(n, theta, x)).collect();
    Ok(pmf_model(n, pmf, format!("Bin({n}, {theta})")))
}

/// Point mass at `at` on `{0, …, n}`.
pub fn dirac_contaminant_binomial(n: u32, at: u32) -> Result<DensityModel> {
    if at > n {
        return Err(Error::InvalidArgument(format!("point mass at {at} outside 0..={n}")));
    }
    let pmf = (0..=n).map(|x| if x == at { 1.0 } else { 0.0 }).collect();
    Ok(pmf_model(n, pmf, format!("delta_{at}")))
}

/// `(1-ε) g + ε k`.
#[derive(Debug, Clone)]
pub struct ContaminationSpec {
    pub true_model: DensityModel,
    pub contaminant: DensityModel,
    pub eps: f64,
}

impl ContaminationSpec {
    pub fn new(true_model: DensityModel, contaminant: DensityModel, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidArgument(format!("eps must lie in [0, 1], got {eps}")));
        }
        check_same_support(&true_model, &contaminant)?;
        Ok(Self { true_model, contaminant, eps })
    }
}

pub(crate) fn check_same_support(a: &DensityModel, b: &DensityModel) -> Result<()> {
    if a.support() == b.support() {
        Ok(())
    } else {
        Err(Error::DomainMismatch(a.support().to_string(), b.support().to_string()))
    }
}

/// Density of the contaminated distribution. Carries no closed-form mass.
pub fn mixture(spec: &ContaminationSpec) -> Result<DensityModel> {
    check_same_support(&spec.true_model, &spec.contaminant)?;
    let eps = spec.eps;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps must lie in [0, 1], got {eps}")));
    }
    let g = spec.true_model.clone();
    let k = spec.contaminant.clone();
    let (ln_w, ln_e) = ((1.0 - eps).ln(), eps.ln());
    let label = format!("(1-{eps})*{} + {eps}*{}", g.label(), k.label());
    let hints = merged_hints(&[&g, &k]);
    let sampler = match (g.sampler(), k.sampler()) {
        (Some(sg), Some(sk)) => Some(Sampler::Mixture(vec![(1.0 - eps, sg.clone()), (eps, sk.clone())])),
        _ => None,
    };
    let support = g.support();
    let mut model = DensityModel::from_log_density(support, move |x| {
        let a = if eps < 1.0 { ln_w + g.ln_eval(x) } else { f64::NEG_INFINITY };
        let b = if eps > 0.0 { ln_e + k.ln_eval(x) } else { f64::NEG_INFINITY };
        log_add_exp(a, b)
    })
    .with_hints(hints)
    .with_label(label);
    if let Some(s) = sampler {
        model = model.with_sampler(s);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{integrate, integrate_1d, Domain, IntegratorHandle};

    fn quad_mass(f: &DensityModel, beta: f64) -> f64 {
        let h = IntegratorHandle::quadrature_with(1e-12, 1e-15, 400);
        let d = Domain::from_support(f.support()).with_breakpoints(f.hints().to_vec());
        integrate(&h, |x| (beta * f.ln_eval(x)).exp(), &d).unwrap().value
    }

    #[test]
    fn standard_normal_at_zero() {
        let f = density_at(&FamilySpec::normal_location(1.0).unwrap(), &[0.0]).unwrap();
        assert!((f.eval1(0.0) - (2.0 * PI).powf(-0.5)).abs() < 1e-16);
    }

    #[test]
    fn exponential_mass_formula() {
        let f = density_at(&FamilySpec::exponential(), &[2.0]).unwrap();
        assert!((f.closed_mass(2.0).unwrap().unwrap() - 1.0).abs() < 1e-15);
        let alpha: f64 = 0.37;
        let lam: f64 = 3.1;
        let expect = lam.powf(alpha) / (1.0 + alpha);
        assert!((f64::abs(exponential(lam).unwrap().closed_mass(1.0 + alpha).unwrap().unwrap() - expect)) < 1e-14);
    }

    #[test]
    fn normal_mass_at_alpha_one() {
        let f = normal(0.0, 1.0).unwrap();
        let m = f.closed_mass(2.0).unwrap().unwrap();
        assert!((m - 0.282_094_791_773_878_1).abs() < 1e-15);
        assert!((quad_mass(&f, 2.0) - m).abs() < 1e-12);
    }

    #[test]
    fn unit_shape_gamma_is_exponential() {
        let g = gamma(1.0, 1.7).unwrap();
        let e = exponential(1.7).unwrap();
        for x in [0.0, 1e-3, 0.4, 2.0, 11.0] {
            assert!((g.eval1(x) - e.eval1(x)).abs() <= 1e-15 * e.eval1(x).max(1e-300), "x={x}");
        }
        for alpha in [0.0, 0.3, 1.0] {
            let a = gamma_mass(1.0, 1.7, alpha).unwrap();
            let b = 1.7_f64.powf(alpha) / (1.0 + alpha);
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn gamma_mass_values() {
        assert!((gamma_mass(2.0, 1.0, 1.0).unwrap() - 0.25).abs() < 1e-14);
        let q = quad_mass(&gamma(2.0, 1.0).unwrap(), 2.0);
        assert!((q - 0.25).abs() < 1e-12);
        assert!(matches!(gamma_mass(0.3, 1.0, 1.0), Err(Error::MassDiverges(_))));
    }

    #[test]
    fn gamma_mass_divergence_seen_by_quadrature() {
        // truncated integrals keep growing as the cutoff shrinks
        let f = gamma(0.3, 1.0).unwrap();
        let h = IntegratorHandle::quadrature_with(1e-10, 1e-14, 400);
        let mut prev = 0.0;
        for cut in [1e-2, 1e-4, 1e-6, 1e-8] {
            let v = integrate_1d(&h, |x| f.eval1(x).powi(2), cut, 1.0, &[]).unwrap().value;
            assert!(v > 2.0 * prev, "cut={cut} v={v} prev={prev}");
            prev = v;
        }
    }

    #[test]
    fn binomial_values() {
        assert!((binomial_pmf(12, 0.5, 6) - 924.0 / 4096.0).abs() < 1e-16);
        assert_eq!(binomial_pmf(12, 1.0, 12), 1.0);
        assert_eq!(binomial_pmf(12, 0.0, 0), 1.0);
        let s: f64 = (0..=12).map(|x| binomial_pmf(12, 0.5, x)).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn binomial_point_mass_mixture() {
        let g = binomial(12, 0.5).unwrap();
        let k = dirac_contaminant_binomial(12, 12).unwrap();
        assert_eq!(k.eval1(12.0), 1.0);
        assert_eq!(k.eval1(3.0), 0.0);
        let eps = 0.3;
        let m = mixture(&ContaminationSpec::new(g, k, eps).unwrap()).unwrap();
        assert!((m.eval1(12.0) - ((1.0 - eps) * 2f64.powi(-12) + eps)).abs() < 1e-15);
        let s: f64 = (0..=12).map(|x| m.eval1(x as f64)).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixture_endpoints_and_value() {
        let g = normal(0.0, 1.0).unwrap();
        let k = normal(5.0, 1.0).unwrap();
        for x in [-1.0, 0.0, 2.5, 5.0] {
            let m0 = mixture(&ContaminationSpec::new(g.clone(), k.clone(), 0.0).unwrap()).unwrap();
            let m1 = mixture(&ContaminationSpec::new(g.clone(), k.clone(), 1.0).unwrap()).unwrap();
            assert!((m0.eval1(x) - g.eval1(x)).abs() < 1e-16);
            assert!((m1.eval1(x) - k.eval1(x)).abs() < 1e-16);
        }
        let m = mixture(&ContaminationSpec::new(g, k, 0.4).unwrap()).unwrap();
        let c = (2.0 * PI).powf(-0.5);
        let expect = 0.6 * c + 0.4 * c * (-12.5f64).exp();
        assert!((m.eval1(0.0) - expect).abs() < 1e-16);
    }

    #[test]
    fn mixture_rejects_mismatched_supports() {
        let spec = ContaminationSpec::new(normal(0.0, 1.0).unwrap(), exponential(1.0).unwrap(), 0.1);
        assert!(matches!(spec, Err(Error::DomainMismatch(..))));
    }

    #[test]
    fn open_boundaries_are_rejected() {
        let fam = FamilySpec::exponential();
        assert!(matches!(density_at(&fam, &[0.0]), Err(Error::BoundaryParameter { .. })));
        let bin = FamilySpec::binomial(12).unwrap();
        assert!(density_at(&bin, &[1.0]).is_ok());
        assert!(density_at(&bin, &[1.1]).is_err());
        assert!(FamilySpec::gamma(0.0).is_err());
    }

    #[test]
    fn mv_mass_is_product_of_univariate() {
        let f = mv_normal_iso(vec![0.3, -1.0, 2.0], 0.8).unwrap();
        let uni = normal_power_mass(0.8, 1.5).unwrap();
        assert!((f.closed_mass(1.5).unwrap().unwrap() - uni.powi(3)).abs() < 1e-15);
    }
}
