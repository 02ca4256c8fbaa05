//! Evaluable densities and probability mass functions.
//!
//! A [`DensityModel`] is stored through its log-density so that powers,
//! products and ratios of densities can be formed in log space. This keeps
//! integrands such as `f^B g^A` or `g ln(g/f)` accurate far in the tails,
//! where the densities themselves underflow long before their logarithms do.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};

use crate::error::Result;

/// Where a density lives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    RealLine,
    /// `(0, ∞)`.
    HalfLinePositive,
    /// Integers `lo..=hi`; integration is summation.
    IntegerRange(i64, i64),
    /// `ℝ^dim`.
    RealSpace(usize),
}

impl Support {
    /// Dimension of a point in this support.
    pub fn dim(&self) -> usize {
        match self {
            Support::RealSpace(d) => *d,
            _ => 1,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Support::IntegerRange(..))
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Support::RealLine => write!(f, "R"),
            Support::HalfLinePositive => write!(f, "(0, inf)"),
            Support::IntegerRange(lo, hi) => write!(f, "{{{lo}..{hi}}}"),
            Support::RealSpace(d) => write!(f, "R^{d}"),
        }
    }
}

/// Direct samplers for the families that have one.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    Normal {
        mean: f64,
        sd: f64,
    },
    Exponential {
        rate: f64,
    },
    Gamma {
        shape: f64,
        rate: f64,
    },
    MvNormalIso {
        mean: Vec<f64>,
        sd: f64,
    },
    /// Finite mixture; weights sum to one.
    Mixture(Vec<(f64, Sampler)>),
}

impl Sampler {
    pub fn dim(&self) -> usize {
        match self {
            Sampler::MvNormalIso { mean, .. } => mean.len(),
            Sampler::Mixture(parts) => parts.first().map_or(1, |(_, s)| s.dim()),
            _ => 1,
        }
    }

    /// Draws one point into `out` (cleared first).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        self.push_sample(rng, out);
    }

    fn push_sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            Sampler::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                out.push(mean + sd * z);
            }
            Sampler::Exponential { rate } => {
                let e = Exp::new(*rate).expect("validated at construction");
                out.push(e.sample(rng));
            }
            Sampler::Gamma { shape, rate } => {
                let g = Gamma::new(*shape, 1.0 / rate).expect("validated at construction");
                out.push(g.sample(rng));
            }
            Sampler::MvNormalIso { mean, sd } => {
                for m in mean {
                    let z: f64 = StandardNormal.sample(rng);
                    out.push(m + sd * z);
                }
            }
            Sampler::Mixture(parts) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (i, (w, s)) in parts.iter().enumerate() {
                    acc += w;
                    if u < acc || i + 1 == parts.len() {
                        s.push_sample(rng, out);
                        return;
                    }
                }
            }
        }
    }
}

type LogDensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type MassFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// A nonnegative density (or pmf) together with what the numerical routines
/// need to handle it well: its support, an optional closed form for
/// `∫ f^β`, characteristic points used as quadrature breakpoints, and an
/// optional direct sampler.
#[derive(Clone)]
pub struct DensityModel {
    log_density: LogDensityFn,
    support: Support,
    closed_mass: Option<MassFn>,
    hints: Vec<f64>,
    sampler: Option<Sampler>,
    label: String,
}

impl DensityModel {
    /// Builds a model from its log-density. Points outside the support must
    /// map to `-inf`.
    pub fn from_log_density<F>(support: Support, log_density: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            log_density: Arc::new(log_density),
            support,
            closed_mass: None,
            hints: Vec::new(),
            sampler: None,
            label: String::from("custom"),
        }
    }

    /// Closed form for `β ↦ ∫ f^β`.
    pub fn with_closed_mass<F>(mut self, mass: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        self.closed_mass = Some(Arc::new(mass));
        self
    }

    pub fn with_hints(mut self, mut hints: Vec<f64>) -> Self {
        hints.retain(|h| h.is_finite());
        hints.sort_by(f64::total_cmp);
        hints.dedup();
        self.hints = hints;
        self
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Self {
        self.sampler = Some(sampler);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Drops the closed-form mass, forcing quadrature.
    pub fn without_closed_mass(mut self) -> Self {
        self.closed_mass = None;
        self
    }

    #[inline]
    pub fn ln_eval(&self, x: &[f64]) -> f64 {
        (self.log_density)(x)
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.ln_eval(x).exp()
    }

    #[inline]
    pub fn eval1(&self, x: f64) -> f64 {
        self.eval(std::slice::from_ref(&x))
    }

    #[inline]
    pub fn ln_eval1(&self, x: f64) -> f64 {
        self.ln_eval(std::slice::from_ref(&x))
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// `∫ f^β` when a closed form is attached.
    pub fn closed_mass(&self, beta: f64) -> Option<Result<f64>> {
        self.closed_mass.as_ref().map(|m| m(beta))
    }

    pub fn has_closed_mass(&self) -> bool {
        self.closed_mass.is_some()
    }

    pub fn hints(&self) -> &[f64] {
        &self.hints
    }

    pub fn sampler(&self) -> Option<&Sampler> {
        self.sampler.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for DensityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityModel")
            .field("label", &self.label)
            .field("support", &self.support)
            .field("closed_mass", &self.closed_mass.is_some())
            .field("hints", &self.hints)
            .field("sampler", &self.sampler)
            .finish()
    }
}

/// `ln(e^a + e^b)` without overflow; handles `-inf` operands.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Union of the breakpoint hints of several densities.
pub(crate) fn merged_hints(models: &[&DensityModel]) -> Vec<f64> {
    let mut all: Vec<f64> = models.iter().flat_map(|m| m.hints().iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0));
    all
}
