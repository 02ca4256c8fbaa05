//! Minimum S-divergence functionals of contaminated populations.
//!
//! [`MsdObjective`] is the population objective `θ ↦ S(g_ε, f_θ)` with the
//! θ-free `∫ g^{1+α}` term dropped. Where closed forms exist (normal and
//! exponential models with `A = 1`, binomial models) they are used instead of
//! quadrature. The optimizers are deterministic and derivative-free: a
//! coarse grid followed by golden-section refinement in one dimension, and
//! multi-start Nelder–Mead otherwise.

use std::f64::consts::PI;
use std::sync::Mutex;

use crate::density::DensityModel;
use crate::divergence::{integrate_pair, mass, Branch, DivergenceParams};
use crate::error::{Error, Result};
use crate::integrate::{mc_expectation_tagged, Integral, IntegratorHandle};
use crate::models::{
    binomial, density_at, dirac_contaminant_binomial, exponential, gamma, mixture, mv_normal_iso, normal,
    ContaminationSpec, FamilyKind, FamilySpec,
};

/// Outcome of one minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub theta_hat: Vec<f64>,
    pub objective_at_min: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub restarts_used: usize,
}

/// Optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOpts {
    /// Coarse-grid points per dimension.
    pub n_grid: usize,
    /// Absolute tolerance on the (transformed) parameter.
    pub param_tol: f64,
    /// Cap on objective evaluations per minimization.
    pub max_evaluations: usize,
    /// Number of grid local minima refined. Zero disables the coarse grid
    /// of [`minimize_simplex`].
    pub max_starts: usize,
    /// Ties (objective values within [`TIE_TOL`]) go to the point closest
    /// to this reference.
    pub reference: Option<Vec<f64>>,
    /// Search box for the multivariate optimizer; points outside evaluate
    /// to `+inf`.
    pub search_box: Option<Vec<(f64, f64)>>,
    /// Additional starting points.
    pub extra_starts: Vec<Vec<f64>>,
}

/// Objective values closer than this are considered tied.
pub const TIE_TOL: f64 = 1e-10;
/// Largest coarse grid used by [`minimize_simplex`].
pub const MAX_GRID_POINTS: usize = 4096;

impl Default for OptimizerOpts {
    fn default() -> Self {
        Self {
            n_grid: 64,
            param_tol: 1e-8,
            max_evaluations: 100_000,
            max_starts: 3,
            reference: None,
            search_box: None,
            extra_starts: Vec::new(),
        }
    }
}

/// Keeps the lowest probe seen, breaking ties towards a reference point.
struct Best<'a> {
    x: Vec<f64>,
    f: f64,
    reference: Option<&'a [f64]>,
}

impl<'a> Best<'a> {
    fn new(reference: Option<&'a [f64]>) -> Self {
        Self { x: Vec::new(), f: f64::INFINITY, reference }
    }

    /// A single probe: kept only if strictly lower.
    fn offer(&mut self, x: &[f64], f: f64) {
        if f.is_finite() && (self.x.is_empty() || f < self.f) {
            self.x = x.to_vec();
            self.f = f;
        }
    }

    /// The end point of a restart: near-ties go to the reference.
    fn offer_restart(&mut self, x: &[f64], f: f64) {
        if f.is_finite() && (self.x.is_empty() || better(f, x, self.f, &self.x, self.reference)) {
            self.x = x.to_vec();
            self.f = f;
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Whether `(f1, x1)` beats `(f0, x0)`.
fn better(f1: f64, x1: &[f64], f0: f64, x0: &[f64], reference: Option<&[f64]>) -> bool {
    if (f1 - f0).abs() <= TIE_TOL * f0.abs().max(1.0) {
        match reference {
            Some(r) => distance(x1, r) < distance(x0, r),
            None => false,
        }
    } else {
        f1 < f0
    }
}

/// Objective wrapper that counts evaluations and treats non-finite values
/// as failures.
struct Counted<F> {
    f: F,
    evals: usize,
    failures: usize,
}

impl<F> Counted<F> {
    fn new(f: F) -> Self {
        Self { f, evals: 0, failures: 0 }
    }
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_finite() {
            v
        } else {
            self.failures += 1;
            f64::INFINITY
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimizes a function of one variable on `[lo, hi]`.
///
/// Evaluates a uniform grid of `n_grid` points, then refines the best
/// `max_starts` grid local minima (and any `extra_starts`) by golden-section
/// search on the neighbouring cells. Returns the lowest point ever
/// evaluated.
pub fn minimize_scalar<F>(objective: F, bracket: (f64, f64), opts: &OptimizerOpts) -> Result<EstimationResult>
where
    F: Fn(f64) -> f64,
{
    let (lo, hi) = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid bracket [{lo}, {hi}]")));
    }
    let n = opts.n_grid.max(3);
    let h = (hi - lo) / (n - 1) as f64;
    let mut obj = Counted::new(|x: &[f64]| objective(x[0]));
    let reference = opts.reference.as_deref().map(|r| &r[..1]);
    let mut best = Best::new(reference);

    let grid: Vec<f64> = (0..n).map(|i| if i + 1 == n { hi } else { lo + i as f64 * h }).collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let v = obj.eval(&[x]);
            best.offer(&[x], v);
            v
        })
        .collect();
    if obj.failures == obj.evals {
        return Err(Error::AllEvaluationsFailed(format!("no finite value on the grid over [{lo}, {hi}]")));
    }

    // grid local minima, lowest first
    let mut minima: Vec<usize> = (0..n)
        .filter(|&i| {
            let v = values[i];
            v.is_finite() && (i == 0 || values[i - 1] >= v) && (i + 1 == n || values[i + 1] >= v)
        })
        .collect();
    minima.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    minima.truncate(opts.max_starts.max(1));

    let mut brackets: Vec<(f64, f64)> =
        minima.iter().map(|&i| (grid[i.saturating_sub(1)], grid[(i + 1).min(n - 1)])).collect();
    for s in &opts.extra_starts {
        if let Some(&x) = s.first() {
            if x.is_finite() {
                let x = x.clamp(lo, hi);
                brackets.push(((x - h).max(lo), (x + h).min(hi)));
            }
        }
    }

    let mut converged = true;
    for &(a, b) in &brackets {
        let mut local = Best::new(None);
        converged &= golden(&mut obj, &mut local, a, b, opts);
        best.offer_restart(&local.x, local.f);
    }

    Ok(EstimationResult {
        theta_hat: best.x,
        objective_at_min: best.f,
        evaluations: obj.evals,
        converged,
        restarts_used: brackets.len(),
    })
}

fn golden<F: FnMut(&[f64]) -> f64>(
    obj: &mut Counted<F>,
    best: &mut Best<'_>,
    mut a: f64,
    mut b: f64,
    opts: &OptimizerOpts,
) -> bool {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = obj.eval(&[c]);
    let mut fd = obj.eval(&[d]);
    best.offer(&[c], fc);
    best.offer(&[d], fd);
    while b - a > opts.param_tol {
        if obj.evals >= opts.max_evaluations {
            return false;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = obj.eval(&[c]);
            best.offer(&[c], fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = obj.eval(&[d]);
            best.offer(&[d], fd);
        }
    }
    true
}

// Nelder–Mead coefficients: reflection, expansion, contraction, shrink.
const NM_REFLECT: f64 = 1.0;
const NM_EXPAND: f64 = 2.0;
const NM_CONTRACT: f64 = 0.5;
const NM_SHRINK: f64 = 0.5;
const NM_REINITS: usize = 3;

/// Minimizes a function of several variables by multi-start Nelder–Mead.
///
/// Starts from `start`, each of `extra_starts`, and (when a search box is
/// given) the `max_starts` lowest local minima of a coarse grid over the box
/// with at most [`MAX_GRID_POINTS`] points. Each run restarts its simplex
/// at the converged point until it stops improving.
pub fn minimize_simplex<F>(objective: F, start: &[f64], opts: &OptimizerOpts) -> Result<EstimationResult>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    if dim == 0 {
        return Err(Error::InvalidArgument("empty start vector".into()));
    }
    let bounds = opts.search_box.as_deref();
    if let Some(b) = bounds {
        if b.len() != dim || b.iter().any(|&(l, h)| !(l < h)) {
            return Err(Error::InvalidArgument("search box does not match the start vector".into()));
        }
    }
    let inside = |x: &[f64]| bounds.is_none_or(|b| x.iter().zip(b).all(|(v, &(l, h))| *v >= l && *v <= h));
    let mut obj = Counted::new(|x: &[f64]| if inside(x) { objective(x) } else { f64::INFINITY });
    let mut best = Best::new(opts.reference.as_deref());

    let mut starts: Vec<Vec<f64>> = vec![start.to_vec()];
    starts.extend(opts.extra_starts.iter().filter(|s| s.len() == dim).cloned());
    if let (Some(b), true) = (bounds, opts.max_starts > 0) {
        starts.extend(grid_minima(&mut obj, &mut best, b, opts));
    }
    let mut unique: Vec<Vec<f64>> = Vec::new();
    for s in starts {
        if !unique.iter().any(|u| distance(u, &s) <= opts.param_tol) {
            unique.push(s);
        }
    }

    let steps: Vec<f64> = match bounds {
        Some(b) => b.iter().map(|&(l, h)| 0.05 * (h - l)).collect(),
        None => start.iter().map(|v| 0.1 * v.abs().max(1.0)).collect(),
    };
    let mut converged = false;
    for s in &unique {
        let (x, f, conv) = nelder_mead(&mut obj, s, &steps, opts);
        best.offer_restart(&x, f);
        if best.x == x {
            converged = conv;
        }
        if obj.evals >= opts.max_evaluations {
            break;
        }
    }
    if best.x.is_empty() {
        return Err(Error::AllEvaluationsFailed(format!("no finite objective value in {} evaluations", obj.evals)));
    }
    Ok(EstimationResult {
        theta_hat: best.x,
        objective_at_min: best.f,
        evaluations: obj.evals,
        converged,
        restarts_used: unique.len(),
    })
}

fn grid_minima<F: FnMut(&[f64]) -> f64>(
    obj: &mut Counted<F>,
    best: &mut Best<'_>,
    bounds: &[(f64, f64)],
    opts: &OptimizerOpts,
) -> Vec<Vec<f64>> {
    let dim = bounds.len();
    let cap = (MAX_GRID_POINTS as f64).powf(1.0 / dim as f64).floor() as usize;
    let n = opts.n_grid.min(cap).max(2);
    let axis = |d: usize, i: usize| {
        let (l, h) = bounds[d];
        l + (h - l) * i as f64 / (n - 1) as f64
    };
    let total = n.pow(dim as u32);
    let mut values = Vec::with_capacity(total);
    let mut x = vec![0.0; dim];
    for idx in 0..total {
        let mut r = idx;
        for (d, xd) in x.iter_mut().enumerate() {
            *xd = axis(d, r % n);
            r /= n;
        }
        let v = obj.eval(&x);
        best.offer(&x, v);
        values.push(v);
    }
    let mut minima: Vec<usize> = (0..total)
        .filter(|&idx| {
            let v = values[idx];
            if !v.is_finite() {
                return false;
            }
            let mut stride = 1;
            for _ in 0..dim {
                let i = (idx / stride) % n;
                if i > 0 && values[idx - stride] < v {
                    return false;
                }
                if i + 1 < n && values[idx + stride] < v {
                    return false;
                }
                stride *= n;
            }
            true
        })
        .collect();
    minima.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    minima.truncate(opts.max_starts.max(1));
    minima
        .into_iter()
        .map(|idx| {
            let mut r = idx;
            (0..dim)
                .map(|d| {
                    let v = axis(d, r % n);
                    r /= n;
                    v
                })
                .collect()
        })
        .collect()
}

fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    obj: &mut Counted<F>,
    start: &[f64],
    steps: &[f64],
    opts: &OptimizerOpts,
) -> (Vec<f64>, f64, bool) {
    let dim = start.len();
    let mut x_best = start.to_vec();
    let mut f_best = obj.eval(start);
    let mut converged = false;
    for _ in 0..=NM_REINITS {
        let (x, f, conv) = nelder_mead_once(obj, &x_best, steps, opts);
        let improved = f < f_best - 1e-15 * f_best.abs().max(1e-300);
        if f <= f_best {
            x_best = x;
            f_best = f;
        }
        converged = conv;
        if !improved || !conv || obj.evals >= opts.max_evaluations {
            break;
        }
    }
    debug_assert_eq!(x_best.len(), dim);
    (x_best, f_best, converged)
}

fn nelder_mead_once<F: FnMut(&[f64]) -> f64>(
    obj: &mut Counted<F>,
    start: &[f64],
    steps: &[f64],
    opts: &OptimizerOpts,
) -> (Vec<f64>, f64, bool) {
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = obj.eval(start);
    simplex.push((start.to_vec(), f0));
    for d in 0..dim {
        let mut v = start.to_vec();
        v[d] += steps[d];
        let mut fv = obj.eval(&v);
        if !fv.is_finite() {
            v[d] = start[d] - steps[d];
            fv = obj.eval(&v);
        }
        simplex.push((v, fv));
    }

    let point = |c: &[f64], toward: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(toward).map(|(ci, wi)| ci + t * (wi - ci)).collect()
    };
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let size = simplex[1..]
            .iter()
            .map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if size <= opts.param_tol && simplex[0].1.is_finite() {
            return (simplex[0].0.clone(), simplex[0].1, true);
        }
        if obj.evals >= opts.max_evaluations {
            return (simplex[0].0.clone(), simplex[0].1, false);
        }
        let worst = simplex[dim].clone();
        let mut centroid = vec![0.0; dim];
        for (v, _) in &simplex[..dim] {
            for (c, vi) in centroid.iter_mut().zip(v) {
                *c += vi / dim as f64;
            }
        }
        let xr = point(&centroid, &worst.0, -NM_REFLECT);
        let fr = obj.eval(&xr);
        if fr < simplex[0].1 {
            let xe = point(&centroid, &worst.0, -NM_EXPAND);
            let fe = obj.eval(&xe);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = point(&centroid, &xr, NM_CONTRACT);
            let fc = obj.eval(&xc);
            (xc, if fc <= fr { fc } else { f64::NAN })
        } else {
            let xc = point(&centroid, &worst.0, NM_CONTRACT);
            let fc = obj.eval(&xc);
            (xc, if fc < worst.1 { fc } else { f64::NAN })
        };
        if !fc.is_nan() {
            simplex[dim] = (xc, fc);
            continue;
        }
        let x0 = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let v = point(&x0, &vertex.0, NM_SHRINK);
            let fv = obj.eval(&v);
            *vertex = (v, fv);
        }
    }
}

/// `(2π)^{-α/2} [σ^{-α}/√(1+α) - (1+1/α) σ^{1-α} {(1-ε) (σ²+α)^{-1/2} e^{-αμ²/2(σ²+α)}
/// + ε (σ²+ασ₀²)^{-1/2} e^{-α(μ-μ₀)²/2(σ²+ασ₀²)}}]`:
/// the density power divergence objective for `N(μ, σ²)` against
/// `(1-ε) N(0, 1) + ε N(μ₀, σ₀²)`. Requires `α > 0`.
pub fn mdpde_normal_objective(alpha: f64, mu: f64, sigma: f64, eps: f64, mu0: f64, sigma0: f64) -> f64 {
    normal_dpd_objective(alpha, mu, sigma, &[(1.0 - eps, 0.0, 1.0), (eps, mu0, sigma0)])
}

/// The same objective against an arbitrary normal mixture
/// `Σ wᵢ N(mᵢ, sᵢ²)`.
fn normal_dpd_objective(alpha: f64, mu: f64, sigma: f64, parts: &[(f64, f64, f64)]) -> f64 {
    let s2 = sigma * sigma;
    let cross: f64 = parts
        .iter()
        .filter(|(w, ..)| *w != 0.0)
        .map(|&(w, m, s)| {
            let v = s2 + alpha * s * s;
            w / v.sqrt() * (-alpha * (mu - m).powi(2) / (2.0 * v)).exp()
        })
        .sum();
    (2.0 * PI).powf(-alpha / 2.0)
        * (sigma.powf(-alpha) / (1.0 + alpha).sqrt() - (1.0 + 1.0 / alpha) * sigma.powf(1.0 - alpha) * cross)
}

/// `λ^α [1/(1+α) - (1+1/α) ((1-ε)/(αλ+1) + ε λ₀/(αλ+λ₀))]`: the density
/// power divergence objective for `Exp(λ)` against
/// `(1-ε) Exp(1) + ε Exp(λ₀)`. Requires `α > 0`.
pub fn mdpde_exponential_objective(alpha: f64, rate: f64, eps: f64, rate0: f64) -> f64 {
    exponential_dpd_objective(alpha, rate, &[(1.0 - eps, 1.0), (eps, rate0)])
}

fn exponential_dpd_objective(alpha: f64, rate: f64, parts: &[(f64, f64)]) -> f64 {
    let cross: f64 = parts.iter().filter(|(w, _)| *w != 0.0).map(|&(w, r)| w * r / (alpha * rate + r)).sum();
    rate.powf(alpha) * (1.0 / (1.0 + alpha) - (1.0 + 1.0 / alpha) * cross)
}

/// Full discrete S-divergence between `(1-ε) Bin(12, 1/2) + ε δ₁₂` and
/// `Bin(12, θ)`.
pub fn msd_binomial_objective(params: &DivergenceParams, theta: f64, eps: f64) -> Result<f64> {
    binomial_objective(params, 12, 0.5, 12, theta, eps)
}

/// Discrete S-divergence between `(1-ε) Bin(n, θ_true) + ε δ_at` and
/// `Bin(n, θ)`, all three terms included.
pub fn binomial_objective(
    params: &DivergenceParams,
    n: u32,
    theta_true: f64,
    at: u32,
    theta: f64,
    eps: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps must lie in [0, 1], got {eps}")));
    }
    let f = binomial(n, theta)?;
    let g = mixture(&ContaminationSpec::new(binomial(n, theta_true)?, dirac_contaminant_binomial(n, at)?, eps)?)?;
    Ok((0..=n)
        .map(|x| {
            let x = [x as f64];
            params.integrand(g.ln_eval(&x), f.ln_eval(&x))
        })
        .sum())
}

/// `θ ↦ S(g, f_θ)` up to a θ-free constant, for a fixed data density `g`.
#[derive(Debug, Clone)]
pub struct MsdObjective {
    pub params: DivergenceParams,
    pub family: FamilySpec,
    pub data: DensityModel,
    pub integrator: IntegratorHandle,
}

impl MsdObjective {
    pub fn new(
        params: DivergenceParams,
        family: FamilySpec,
        contaminated: &ContaminationSpec,
        integrator: IntegratorHandle,
    ) -> Result<Self> {
        let data = mixture(contaminated)?;
        if data.support() != family.support() {
            return Err(Error::DomainMismatch(data.support().to_string(), family.support().to_string()));
        }
        Ok(Self { params, family, data, integrator })
    }

    pub fn value(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.value_with_error(theta)?.value)
    }

    /// Objective and its numerical error estimate (the Monte Carlo standard
    /// error of the cross term under a Monte Carlo handle).
    pub fn value_with_error(&self, theta: &[f64]) -> Result<Integral> {
        let f = density_at(&self.family, theta)?;
        let g = &self.data;
        let p = &self.params;
        let ap1 = 1.0 + p.alpha;
        let (a, b) = (p.a_exp, p.b_exp);
        let mf = mass(&f, p.alpha, &self.integrator)?;
        let mc = self.integrator.is_monte_carlo() && !f.support().is_discrete();
        // cross terms as integrands, and as expectations under f or g for Monte Carlo
        let (cross, coef) = match p.branch {
            Branch::Generic => {
                let c = if mc {
                    let s = self.sampler_of(&f)?;
                    mc_expectation_tagged(
                        &self.integrator,
                        s,
                        |x| ((b - 1.0) * f.ln_eval(x) + a * g.ln_eval(x)).exp(),
                        11,
                    )?
                } else {
                    exact(integrate_pair(&self.integrator, &f, g, |x| (b * f.ln_eval(x) + a * g.ln_eval(x)).exp(), 11)?)
                };
                (c, -ap1 / (a * b))
            }
            Branch::ALimit => {
                let term = |x: &[f64], w: f64| {
                    let lf = f.ln_eval(x);
                    if lf == f64::NEG_INFINITY {
                        return 0.0;
                    }
                    (w * lf).exp() * (lf - g.ln_eval(x))
                };
                let c = if mc {
                    let s = self.sampler_of(&f)?;
                    mc_expectation_tagged(&self.integrator, s, |x| term(x, p.alpha), 12)?
                } else {
                    exact(integrate_pair(&self.integrator, &f, g, |x| term(x, ap1), 12)?)
                };
                (c, 1.0)
            }
            Branch::BLimit => {
                let term = |x: &[f64], w: f64| {
                    let lg = g.ln_eval(x);
                    if lg == f64::NEG_INFINITY {
                        return 0.0;
                    }
                    (w * lg).exp() * f.ln_eval(x)
                };
                let c = if mc {
                    let s = self.sampler_of(g)?;
                    mc_expectation_tagged(&self.integrator, s, |x| term(x, p.alpha), 13)?
                } else {
                    exact(integrate_pair(&self.integrator, &f, g, |x| term(x, ap1), 13)?)
                };
                (c, -1.0)
            }
        };
        let lead = match p.branch {
            Branch::Generic => mf / a,
            _ => mf / ap1 * if p.branch == Branch::ALimit { -1.0 } else { 1.0 },
        };
        Ok(Integral { value: lead + coef * cross.value, err_estimate: coef.abs() * cross.err_estimate })
    }

    fn sampler_of<'a>(&self, d: &'a DensityModel) -> Result<&'a DensityModel> {
        d.sampler().map(|_| d).ok_or(Error::SamplerUnavailable)
    }
}

fn exact(value: f64) -> Integral {
    Integral { value, err_estimate: 0.0 }
}

/// `S(g_ε, f_θ)` minus the θ-free term `∫ g_ε^{1+α}/B` (or its limit-branch
/// analogue).
pub fn msd_objective(
    params: &DivergenceParams,
    family: &FamilySpec,
    theta: &[f64],
    contaminated: &ContaminationSpec,
    integrator: &IntegratorHandle,
) -> Result<f64> {
    MsdObjective::new(*params, family.clone(), contaminated, *integrator)?.value(theta)
}

/// The contaminating distribution of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum Contaminant {
    Normal {
        mean: f64,
        sd: f64,
    },
    MvNormalIso {
        mean: Vec<f64>,
        sd: f64,
    },
    Exponential {
        rate: f64,
    },
    Gamma {
        shape: f64,
        rate: f64,
    },
    /// Point mass at an integer (binomial families).
    PointMass {
        at: u32,
    },
}

impl Contaminant {
    pub fn density(&self) -> Result<DensityModel> {
        match self {
            Contaminant::Normal { mean, sd } => normal(*mean, *sd),
            Contaminant::MvNormalIso { mean, sd } => mv_normal_iso(mean.clone(), *sd),
            Contaminant::Exponential { rate } => exponential(*rate),
            Contaminant::Gamma { shape, rate } => gamma(*shape, *rate),
            Contaminant::PointMass { .. } => Err(Error::InvalidArgument(
                "a point mass needs the binomial size; use ContaminationScenario::contaminant_density".into(),
            )),
        }
    }

    /// The family parameter that reproduces this contaminant, when there is one.
    fn as_theta(&self, family: &FamilySpec) -> Option<Vec<f64>> {
        match (self, family.kind) {
            (Contaminant::Normal { mean, .. }, FamilyKind::NormalLocation { .. }) => Some(vec![*mean]),
            (Contaminant::Normal { sd, .. }, FamilyKind::NormalScale { .. }) => Some(vec![*sd]),
            (Contaminant::Normal { mean, sd }, FamilyKind::NormalLocationScale) => Some(vec![*mean, *sd]),
            (Contaminant::MvNormalIso { mean, .. }, FamilyKind::MvNormalLocationIso { dim, .. })
                if mean.len() == dim =>
            {
                Some(mean.clone())
            }
            (Contaminant::MvNormalIso { sd, .. }, FamilyKind::MvNormalScatterIso { .. }) => Some(vec![*sd]),
            (Contaminant::Exponential { rate }, FamilyKind::Exponential) => Some(vec![*rate]),
            (Contaminant::Gamma { rate, .. }, FamilyKind::GammaFixedShape { .. }) => Some(vec![*rate]),
            (Contaminant::PointMass { at }, FamilyKind::BinomialFixedSize { n }) => {
                Some(vec![(*at as f64 / n as f64).min(1.0)])
            }
            _ => None,
        }
    }
}

/// True parameter and contaminant; the contaminated population at
/// proportion ε is `(1-ε) f_truth + ε k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContaminationScenario {
    pub truth: Vec<f64>,
    pub contaminant: Contaminant,
}

impl ContaminationScenario {
    pub fn new(truth: Vec<f64>, contaminant: Contaminant) -> Self {
        Self { truth, contaminant }
    }

    pub fn contaminant_density(&self, family: &FamilySpec) -> Result<DensityModel> {
        match (&self.contaminant, family.kind) {
            (Contaminant::PointMass { at }, FamilyKind::BinomialFixedSize { n }) => dirac_contaminant_binomial(n, *at),
            (Contaminant::PointMass { .. }, _) => {
                Err(Error::InvalidArgument("point-mass contamination needs a binomial family".into()))
            }
            (c, _) => c.density(),
        }
    }

    pub fn contamination(&self, family: &FamilySpec, eps: f64) -> Result<ContaminationSpec> {
        let g = density_at(family, &self.truth)?;
        let k = self.contaminant_density(family)?;
        ContaminationSpec::new(g, k, eps)
    }
}

/// How the objective of a sweep is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveSource {
    ClosedFormNormal,
    ClosedFormExponential,
    BinomialSum,
    Quadrature,
    MonteCarlo,
}

impl ObjectiveSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            ObjectiveSource::ClosedFormNormal => "closed-form-normal",
            ObjectiveSource::ClosedFormExponential => "closed-form-exponential",
            ObjectiveSource::BinomialSum => "binomial-sum",
            ObjectiveSource::Quadrature => "quadrature",
            ObjectiveSource::MonteCarlo => "monte-carlo",
        }
    }
}

/// Coordinates the optimizer works in: logarithms for positive parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    /// Per coordinate: `(lo, hi, log_scale)` in natural units.
    pub axes: Vec<(f64, f64, bool)>,
}

pub const MU_BOX: (f64, f64) = (-20.0, 20.0);
pub const SIGMA_BOX: (f64, f64) = (1e-3, 20.0);
pub const RATE_BOX: (f64, f64) = (1e-3, 1e3);

impl SearchSpace {
    pub fn for_family(family: &FamilySpec) -> Self {
        let mu = (MU_BOX.0, MU_BOX.1, false);
        let sigma = (SIGMA_BOX.0, SIGMA_BOX.1, true);
        let rate = (RATE_BOX.0, RATE_BOX.1, true);
        let axes = match family.kind {
            FamilyKind::NormalLocation { .. } => vec![mu],
            FamilyKind::NormalScale { .. } | FamilyKind::MvNormalScatterIso { .. } => vec![sigma],
            FamilyKind::NormalLocationScale => vec![mu, sigma],
            FamilyKind::MvNormalLocationIso { dim, .. } => vec![mu; dim],
            FamilyKind::Exponential | FamilyKind::GammaFixedShape { .. } => vec![rate],
            FamilyKind::BinomialFixedSize { .. } => vec![(0.0, 1.0, false)],
        };
        Self { axes }
    }

    pub fn to_search(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(&self.axes)
            .map(|(&v, &(lo, hi, log))| {
                let v = v.clamp(lo, hi);
                if log {
                    v.ln()
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn to_theta(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.axes).map(|(&v, &(_, _, log))| if log { v.exp() } else { v }).collect()
    }

    pub fn search_box(&self) -> Vec<(f64, f64)> {
        self.axes.iter().map(|&(lo, hi, log)| if log { (lo.ln(), hi.ln()) } else { (lo, hi) }).collect()
    }
}

/// Population objective for one contaminated distribution, routed to the
/// cheapest exact evaluation available.
pub struct SweepObjective {
    source: ObjectiveSource,
    params: DivergenceParams,
    family: FamilySpec,
    scenario: ContaminationScenario,
    eps: f64,
    generic: Option<MsdObjective>,
}

impl SweepObjective {
    pub fn new(
        params: &DivergenceParams,
        family: &FamilySpec,
        scenario: &ContaminationScenario,
        eps: f64,
        integrator: &IntegratorHandle,
    ) -> Result<Self> {
        let dpd_slice = params.a_exp == 1.0 && params.alpha > 0.0;
        let source = match (&family.kind, &scenario.contaminant) {
            (FamilyKind::BinomialFixedSize { .. }, Contaminant::PointMass { .. }) => ObjectiveSource::BinomialSum,
            (
                FamilyKind::NormalLocation { .. } | FamilyKind::NormalScale { .. } | FamilyKind::NormalLocationScale,
                Contaminant::Normal { .. },
            ) if dpd_slice => ObjectiveSource::ClosedFormNormal,
            (FamilyKind::Exponential, Contaminant::Exponential { .. }) if dpd_slice => {
                ObjectiveSource::ClosedFormExponential
            }
            _ if integrator.is_monte_carlo() => ObjectiveSource::MonteCarlo,
            _ => ObjectiveSource::Quadrature,
        };
        family.check(&scenario.truth)?;
        let generic = match source {
            ObjectiveSource::Quadrature | ObjectiveSource::MonteCarlo => {
                Some(MsdObjective::new(*params, family.clone(), &scenario.contamination(family, eps)?, *integrator)?)
            }
            _ => None,
        };
        Ok(Self { source, params: *params, family: family.clone(), scenario: scenario.clone(), eps, generic })
    }

    pub fn source(&self) -> ObjectiveSource {
        self.source
    }

    /// Normal parameters `(mean, sd)` of `f_θ`.
    fn normal_params(&self, theta: &[f64]) -> (f64, f64) {
        match self.family.kind {
            FamilyKind::NormalLocation { sigma } => (theta[0], sigma),
            FamilyKind::NormalScale { mu } => (mu, theta[0]),
            _ => (theta[0], theta[1]),
        }
    }

    pub fn value(&self, theta: &[f64]) -> Result<f64> {
        let alpha = self.params.alpha;
        let eps = self.eps;
        match self.source {
            ObjectiveSource::BinomialSum => {
                let (FamilyKind::BinomialFixedSize { n }, Contaminant::PointMass { at }) =
                    (self.family.kind, &self.scenario.contaminant)
                else {
                    unreachable!("routed to the binomial sum")
                };
                binomial_objective(&self.params, n, self.scenario.truth[0], *at, theta[0], eps)
            }
            ObjectiveSource::ClosedFormNormal => {
                self.family.check(theta)?;
                let Contaminant::Normal { mean, sd } = self.scenario.contaminant else {
                    unreachable!("routed to the normal closed form")
                };
                let (m_t, s_t) = self.normal_params(&self.scenario.truth);
                let (mu, sigma) = self.normal_params(theta);
                Ok(normal_dpd_objective(alpha, mu, sigma, &[(1.0 - eps, m_t, s_t), (eps, mean, sd)]))
            }
            ObjectiveSource::ClosedFormExponential => {
                self.family.check(theta)?;
                let Contaminant::Exponential { rate } = self.scenario.contaminant else {
                    unreachable!("routed to the exponential closed form")
                };
                Ok(exponential_dpd_objective(alpha, theta[0], &[(1.0 - eps, self.scenario.truth[0]), (eps, rate)]))
            }
            ObjectiveSource::Quadrature | ObjectiveSource::MonteCarlo => {
                self.generic.as_ref().expect("built for generic sources").value(theta)
            }
        }
    }
}

/// Which candidate of a sweep point was kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidate {
    /// Local refinement around the previous grid point's minimizer.
    Warm,
    /// Full grid restart.
    Cold,
}

/// One point of a contamination sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub eps: f64,
    /// The kept estimate, or the error that prevented one.
    pub outcome: std::result::Result<EstimationResult, Error>,
    pub kept: Option<Candidate>,
    pub warm: Option<EstimationResult>,
    pub cold: Option<EstimationResult>,
    pub source: Option<ObjectiveSource>,
}

/// Estimates `θ̂(ε)` for each ε of an ascending grid.
///
/// Each point runs two candidates concurrently: a local search started at
/// the previous point's estimate, and a full grid restart. The lower
/// objective wins; ties go to the estimate closer to the true parameter.
/// Failures are recorded in the point and do not stop the sweep.
pub fn sweep(
    params: &DivergenceParams,
    family: &FamilySpec,
    scenario: &ContaminationScenario,
    eps_grid: &[f64],
    integrator: &IntegratorHandle,
    opts: &OptimizerOpts,
) -> Result<Vec<SweepPoint>> {
    if eps_grid.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Error::InvalidArgument("eps grid must lie in [0, 1]".into()));
    }
    if eps_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("eps grid must be sorted".into()));
    }
    family.check(&scenario.truth)?;
    let space = SearchSpace::for_family(family);
    let truth_u = space.to_search(&scenario.truth);
    let mut starts = vec![truth_u.clone()];
    if let Some(c) = scenario.contaminant.as_theta(family) {
        starts.push(space.to_search(&c));
        // contaminant location with the true scale
        if let (FamilyKind::NormalLocationScale, Some(&s)) = (family.kind, scenario.truth.get(1)) {
            starts.push(space.to_search(&[c[0], s]));
        }
    }
    let n_grid = match family.kind {
        FamilyKind::BinomialFixedSize { .. } => opts.n_grid.max(128),
        _ => opts.n_grid,
    };
    let cold_opts = OptimizerOpts {
        n_grid,
        reference: Some(truth_u.clone()),
        search_box: Some(space.search_box()),
        extra_starts: starts,
        ..opts.clone()
    };

    let mut previous: Option<Vec<f64>> = None;
    let mut out = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let point = sweep_point(params, family, scenario, eps, integrator, &space, &cold_opts, previous.as_deref());
        if let Ok(r) = &point.outcome {
            previous = Some(space.to_search(&r.theta_hat));
        }
        out.push(point);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn sweep_point(
    params: &DivergenceParams,
    family: &FamilySpec,
    scenario: &ContaminationScenario,
    eps: f64,
    integrator: &IntegratorHandle,
    space: &SearchSpace,
    cold_opts: &OptimizerOpts,
    previous: Option<&[f64]>,
) -> SweepPoint {
    let objective = match SweepObjective::new(params, family, scenario, eps, integrator) {
        Ok(o) => o,
        Err(e) => return SweepPoint { eps, outcome: Err(e), kept: None, warm: None, cold: None, source: None },
    };
    let last_error: Mutex<Option<Error>> = Mutex::new(None);
    let f = |u: &[f64]| match objective.value(&space.to_theta(u)) {
        Ok(v) => v,
        Err(e) => {
            *last_error.lock().expect("poisoned") = Some(e);
            f64::INFINITY
        }
    };
    let bounds = space.search_box();
    let run = |opts: &OptimizerOpts, start: &[f64]| -> Result<EstimationResult> {
        if start.len() == 1 {
            let bracket = opts.search_box.as_ref().map_or(bounds[0], |b| b[0]);
            minimize_scalar(|x| f(&[x]), bracket, opts)
        } else {
            minimize_simplex(f, start, opts)
        }
    };
    let (cold, warm) = rayon::join(
        || run(cold_opts, &cold_opts.extra_starts[0]),
        || {
            previous.map(|p| {
                let warm_opts = warm_options(cold_opts, p, &bounds);
                run(&warm_opts, p)
            })
        },
    );
    let into_theta = |r: EstimationResult| EstimationResult { theta_hat: space.to_theta(&r.theta_hat), ..r };
    let cold = cold.map(into_theta);
    let warm = warm.map(|w| w.map(into_theta));

    let truth = &scenario.truth;
    let (outcome, kept) = match (&cold, &warm) {
        (Ok(c), Some(Ok(w))) => {
            if better(w.objective_at_min, &w.theta_hat, c.objective_at_min, &c.theta_hat, Some(truth)) {
                (Ok(w.clone()), Some(Candidate::Warm))
            } else {
                (Ok(c.clone()), Some(Candidate::Cold))
            }
        }
        (Ok(c), _) => (Ok(c.clone()), Some(Candidate::Cold)),
        (Err(_), Some(Ok(w))) => (Ok(w.clone()), Some(Candidate::Warm)),
        (Err(e), _) => {
            let detail = last_error.lock().expect("poisoned").take();
            (Err(detail.unwrap_or_else(|| e.clone())), None)
        }
    };
    SweepPoint {
        eps,
        outcome,
        kept,
        warm: warm.and_then(|w| w.ok()),
        cold: cold.ok(),
        source: Some(objective.source()),
    }
}

/// Local search around the previous estimate: golden section over the two
/// neighbouring coarse-grid cells in one dimension, a single Nelder–Mead run
/// otherwise.
fn warm_options(cold: &OptimizerOpts, previous: &[f64], bounds: &[(f64, f64)]) -> OptimizerOpts {
    let search_box = if previous.len() == 1 {
        let (lo, hi) = bounds[0];
        let h = (hi - lo) / (cold.n_grid.max(3) - 1) as f64;
        vec![((previous[0] - 2.0 * h).max(lo), (previous[0] + 2.0 * h).min(hi))]
    } else {
        bounds.to_vec()
    };
    OptimizerOpts {
        n_grid: 5,
        max_starts: if previous.len() == 1 { 1 } else { 0 },
        extra_starts: Vec::new(),
        search_box: Some(search_box),
        ..cold.clone()
    }
}
