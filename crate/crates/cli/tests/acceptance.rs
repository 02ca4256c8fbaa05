//! Acceptance suite: nine criteria, one PASS/FAIL line each.
//!
//! Every criterion runs against its stated tolerance and time budget. The
//! lines are written straight to stdout so they show up without
//! `--nocapture`.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sdiv::breakdown::*;
use sdiv::divergence::{dpd, exponents, mass, s_divergence};
use sdiv::estimate::{mdpde_exponential_objective, mdpde_normal_objective, msd_binomial_objective, msd_objective};
use sdiv::integrate::{integrate, integrate_weighted, Domain};
use sdiv::models::*;
use sdiv::{derive_exponents, Branch, DensityModel, IntegratorHandle};
use sdiv_cli::config::{Command, RunConfig};
use sdiv_cli::{cmd_bound_grid, cmd_check, cmd_sweep, Table};

type Verdict = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn config(command: Command, pairs: &[(&str, &str)]) -> RunConfig {
    let map: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    RunConfig::from_pairs(command, &map).unwrap()
}

fn column(t: &Table, name: &str) -> Vec<f64> {
    let c = t.column(name).unwrap_or_else(|| panic!("no column {name}"));
    t.rows.iter().map(|r| r[c].parse().unwrap_or(f64::NAN)).collect()
}

fn quad() -> IntegratorHandle {
    IntegratorHandle::quadrature()
}

fn c1_bound_formulas() -> Verdict {
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let alpha = i as f64 / 99.0;
        let b = bound_theorem2(&derive_exponents(alpha, 0.0).unwrap()).unwrap().bound;
        worst = worst.max((b - alpha / (1.0 + alpha)).abs());
    }
    ensure(worst <= 1e-12, || format!("dpd slice off by {worst:e}"))?;
    let hellinger = bound_theorem2(&derive_exponents(0.0, -0.5).unwrap()).unwrap().bound;
    ensure((hellinger - 0.25).abs() <= 1e-12, || format!("(0, -0.5) gives {hellinger}"))?;
    for lambda in [-3.0, -1.0, 0.0, 0.5, 3.0] {
        let b = bound_theorem2(&derive_exponents(1.0, lambda).unwrap()).unwrap().bound;
        ensure((b - 0.5).abs() <= 1e-12, || format!("alpha 1, lambda {lambda} gives {b}"))?;
    }
    Ok(format!("max dpd deviation {worst:.1e}; hellinger 0.25; alpha=1 gives 0.5"))
}

fn c2_scenarios() -> Verdict {
    let implode = Direction::Implode;
    let regime = RateRegime::Unknown;
    let mut worst: f64 = 0.0;
    let mut check = |got: f64, want: f64| worst = worst.max((got - want).abs());
    for i in 1..=20 {
        let alpha = i as f64 / 20.0;
        let p = derive_exponents(alpha, 0.0).unwrap();
        let exp = scenario_breakdown(&LimitScenario::Exponential { direction: implode, regime }, &p).unwrap().bound;
        check(exp, alpha / (1.0 + alpha).powi(2));
        let ns = LimitScenario::NormalScale { direction: implode, eta: 0.0, regime };
        check(scenario_breakdown(&ns, &p).unwrap().bound, alpha / (1.0 + alpha).powf(1.5));
        for dim in [1usize, 2, 4, 8] {
            let sc = LimitScenario::MvNormalScatter { dim, direction: implode, eta: 0.0, regime };
            check(scenario_breakdown(&sc, &p).unwrap().bound, alpha * (1.0 + alpha).powf(-(1.0 + dim as f64 / 2.0)));
        }
    }
    let p = derive_exponents(0.5, 0.0).unwrap();
    let v = scenario_breakdown(&LimitScenario::Exponential { direction: implode, regime }, &p).unwrap().bound;
    check(v, 2.0 / 9.0);
    // gamma with t = 1 against the exponential, across the family
    for i in 0..=20 {
        for j in 0..=60 {
            let (alpha, lambda) = (i as f64 * 0.05, -3.0 + j as f64 * 0.1);
            let Ok(p) = derive_exponents(alpha, lambda) else { continue };
            if p.branch == Branch::ALimit {
                continue;
            }
            for direction in [Direction::Implode, Direction::Explode] {
                for regime in [RateRegime::Unknown, RateRegime::EstimateFaster, RateRegime::EstimateSlower] {
                    let g = scenario_breakdown(&LimitScenario::Gamma { shape: 1.0, direction, regime }, &p).unwrap();
                    let e = scenario_breakdown(&LimitScenario::Exponential { direction, regime }, &p).unwrap();
                    check(g.bound, e.bound);
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.1e}"))
}

fn c3_lemma1() -> Verdict {
    let cfg = config(Command::CheckLemma1, &[("instances", "500"), ("seed", "42")]);
    let t = cmd_check(&cfg).map_err(|e| e.to_string())?;
    let v = t.column("verdict").unwrap();
    let skips = t.rows.iter().filter(|r| r[v] == "precondition_skip").count();
    ensure(t.rows.len() == 500, || format!("{} rows", t.rows.len()))?;
    ensure(skips == 0, || format!("{skips} instances violated the hypotheses"))?;
    ensure(t.failures == 0, || format!("{} numerical failures", t.failures))?;
    ensure(t.violations == 0, || format!("{} violations", t.violations))?;
    Ok("500 instances, 0 violations".into())
}

fn random_pair(rng: &mut ChaCha8Rng) -> (DensityModel, DensityModel) {
    if rng.random_bool(0.5) {
        (
            normal(rng.random_range(-3.0..3.0), rng.random_range(0.3..3.0)).unwrap(),
            normal(rng.random_range(-3.0..3.0), rng.random_range(0.3..3.0)).unwrap(),
        )
    } else {
        (exponential(rng.random_range(0.2..5.0)).unwrap(), exponential(rng.random_range(0.2..5.0)).unwrap())
    }
}

fn c4_axioms() -> Verdict {
    let q = quad();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut min_s, mut max_self, mut max_dpd, mut max_alpha1): (f64, f64, f64, f64) = (f64::INFINITY, 0.0, 0.0, 0.0);
    for i in 0..200 {
        let (g, f) = random_pair(&mut rng);
        let alpha: f64 = rng.random_range(0.0..=1.0);
        // every fifth pair sits on an A = 0 or B = 0 line
        let lambda = if alpha < 1.0 && i % 5 == 0 {
            if i % 10 == 0 {
                -1.0 / (1.0 - alpha)
            } else {
                alpha / (1.0 - alpha)
            }
        } else if alpha < 1.0 {
            let lo = (-1.0 / (1.0 - alpha)).max(-3.0);
            let hi = (alpha / (1.0 - alpha)).min(3.0);
            lo + rng.random_range(0.0..1.0) * (hi - lo)
        } else {
            rng.random_range(-3.0..3.0)
        };
        let p = derive_exponents(alpha, lambda).map_err(|e| e.to_string())?;
        let s = s_divergence(&p, &g, &f, &q).map_err(|e| e.to_string())?;
        min_s = min_s.min(s);
        max_self = max_self.max(s_divergence(&p, &g, &g, &q).map_err(|e| e.to_string())?.abs());

        let p0 = derive_exponents(alpha, 0.0).unwrap();
        let s0 = s_divergence(&p0, &g, &f, &q).map_err(|e| e.to_string())?;
        let d = dpd(alpha, &g, &f, &q).map_err(|e| e.to_string())?;
        max_dpd = max_dpd.max((s0 - d).abs());

        let l2 = rng.random_range(-3.0..3.0);
        let a = s_divergence(&derive_exponents(1.0, lambda.clamp(-3.0, 3.0)).unwrap(), &g, &f, &q).unwrap();
        let b = s_divergence(&derive_exponents(1.0, l2).unwrap(), &g, &f, &q).unwrap();
        max_alpha1 = max_alpha1.max((a - b).abs());
    }
    ensure(min_s >= -1e-10, || format!("negative divergence {min_s:e}"))?;
    ensure(max_self <= 1e-10, || format!("S(g,g) = {max_self:e}"))?;
    ensure(max_dpd <= 1e-9, || format!("lambda = 0 vs DPD off by {max_dpd:e}"))?;
    ensure(max_alpha1 <= 1e-9, || format!("alpha = 1 varies with lambda by {max_alpha1:e}"))?;

    // limit branches against generic values 1e-8 away in A or B
    let mut max_limit: f64 = 0.0;
    for _ in 0..20 {
        let (g, f) = random_pair(&mut rng);
        let alpha: f64 = rng.random_range(0.05..0.95);
        for (line, shift) in [(-1.0 / (1.0 - alpha), 1e-8), (alpha / (1.0 - alpha), -1e-8)] {
            let exact = s_divergence(&derive_exponents(alpha, line).unwrap(), &g, &f, &q).unwrap();
            let near = derive_exponents(alpha, line + shift / (1.0 - alpha)).unwrap();
            ensure(near.branch == Branch::Generic, || "shifted point is not generic".into())?;
            let near = s_divergence(&near, &g, &f, &q).map_err(|e| e.to_string())?;
            max_limit = max_limit.max((exact - near).abs());
        }
    }
    ensure(max_limit <= 1e-4, || format!("limit branches off by {max_limit:e}"))?;
    Ok(format!(
        "min S {min_s:.1e}, |S(g,g)| {max_self:.1e}, dpd {max_dpd:.1e}, alpha=1 {max_alpha1:.1e}, limits {max_limit:.1e}"
    ))
}

fn c5_closed_forms() -> Verdict {
    let q = quad();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut max_n, mut max_e): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let alpha = rng.random_range(0.05..1.0);
        let (mu, sigma) = (rng.random_range(-4.0..8.0), rng.random_range(0.3..4.0));
        let (eps, mu0, sigma0) = (rng.random_range(0.0..1.0), rng.random_range(-6.0..6.0), rng.random_range(0.2..3.0));
        let c = ContaminationSpec::new(normal(0.0, 1.0).unwrap(), normal(mu0, sigma0).unwrap(), eps).unwrap();
        let p = derive_exponents(alpha, 0.0).unwrap();
        let numeric =
            msd_objective(&p, &FamilySpec::normal_location_scale(), &[mu, sigma], &c, &q).map_err(|e| e.to_string())?;
        max_n = max_n.max((numeric - mdpde_normal_objective(alpha, mu, sigma, eps, mu0, sigma0)).abs());

        let (rate, eps, rate0) =
            (rng.random_range(0.1..10.0), rng.random_range(0.0..1.0), rng.random_range(0.05..20.0));
        let c = ContaminationSpec::new(exponential(1.0).unwrap(), exponential(rate0).unwrap(), eps).unwrap();
        let numeric = msd_objective(&p, &FamilySpec::exponential(), &[rate], &c, &q).map_err(|e| e.to_string())?;
        max_e = max_e.max((numeric - mdpde_exponential_objective(alpha, rate, eps, rate0)).abs());
    }
    ensure(max_n <= 1e-8, || format!("normal objective off by {max_n:e}"))?;
    ensure(max_e <= 1e-8, || format!("exponential objective off by {max_e:e}"))?;

    let models = vec![
        normal(0.0, 1.0).unwrap(),
        normal(3.0, 0.2).unwrap(),
        normal(-1.0, 4.0).unwrap(),
        mv_normal_iso(vec![0.5, -1.0], 0.8).unwrap(),
        mv_normal_iso(vec![0.0, 0.0, 1.0], 1.5).unwrap(),
        exponential(0.3).unwrap(),
        exponential(7.0).unwrap(),
        gamma(1.0, 1.0).unwrap(),
        gamma(2.5, 0.7).unwrap(),
        gamma(6.0, 3.0).unwrap(),
        binomial(12, 0.5).unwrap(),
        binomial(30, 0.1).unwrap(),
    ];
    let mut max_rel: f64 = 0.0;
    for m in &models {
        for alpha in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let closed = mass(m, alpha, &q).map_err(|e| e.to_string())?;
            let numeric =
                mass(&m.clone().without_closed_mass(), alpha, &q).map_err(|e| format!("{}: {e}", m.label()))?;
            max_rel = max_rel.max((closed - numeric).abs() / closed.abs());
        }
    }
    ensure(max_rel <= 1e-8, || format!("closed mass off by relative {max_rel:e}"))?;
    Ok(format!("normal {max_n:.1e}, exponential {max_e:.1e}, masses rel {max_rel:.1e}"))
}

fn c6_kl_linearity() -> Verdict {
    let run = |pairs: &[(&str, &str)]| -> Result<Table, String> {
        let mut all = vec![("alpha", "0"), ("lambda", "0")];
        all.extend_from_slice(pairs);
        let t = cmd_sweep(&config(Command::Sweep, &all)).map_err(|e| e.to_string())?;
        ensure(t.failures == 0, || format!("{} failed points", t.failures))?;
        ensure(t.rows.len() == 101, || format!("{} rows", t.rows.len()))?;
        Ok(t)
    };
    let t = run(&[("family", "normal-location"), ("mu0", "5")])?;
    let normal_err =
        column(&t, "eps").iter().zip(column(&t, "mu_hat")).map(|(e, m)| (m - 5.0 * e).abs()).fold(0.0, f64::max);
    let t = run(&[("family", "exponential"), ("rate0", "0.01")])?;
    let exp_err = column(&t, "eps")
        .iter()
        .zip(column(&t, "rate_hat"))
        .map(|(e, r)| (1.0 / r - ((1.0 - e) + e / 0.01)).abs())
        .fold(0.0, f64::max);
    let t = run(&[("family", "binomial")])?;
    let bin_err = column(&t, "eps")
        .iter()
        .zip(column(&t, "theta_hat"))
        .map(|(e, th)| (th - 0.5 - 0.5 * e).abs())
        .fold(0.0, f64::max);
    ensure(normal_err <= 1e-4 && exp_err <= 1e-4 && bin_err <= 1e-4, || {
        format!("max errors: normal {normal_err:e}, exponential {exp_err:e}, binomial {bin_err:e}")
    })?;
    Ok(format!("max errors: normal {normal_err:.1e}, exponential {exp_err:.1e}, binomial {bin_err:.1e}"))
}

/// Grid argmin of `f` over `lo + i * step`.
fn brute_argmin(f: impl Fn(f64) -> f64 + Sync, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n)
        .into_par_iter()
        .map(|i| {
            let x = lo + i as f64 * step;
            (f(x), x)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .unwrap()
        .1
}

fn c7_robust_regime() -> Verdict {
    let sweep = |pairs: &[(&str, &str)]| -> Result<(Vec<f64>, Vec<f64>, Table), String> {
        let t = cmd_sweep(&config(Command::Sweep, pairs)).map_err(|e| e.to_string())?;
        ensure(t.failures == 0, || format!("{} failed points", t.failures))?;
        let eps = column(&t, "eps");
        let name = t.header[5].clone();
        Ok((eps, column(&t, &name), t))
    };

    // binomial, α = 0.9
    let (eps, th, _) = sweep(&[("family", "binomial"), ("alpha", "0.9"), ("eps", "0.4, 0.6")])?;
    let p = derive_exponents(0.9, 0.0).unwrap();
    for (&e, &t) in eps.iter().zip(&th) {
        let obj = |x: f64| msd_binomial_objective(&p, x, e).unwrap();
        let b = brute_argmin(obj, 0.0, 1.0, 1e-4);
        ensure((t - b).abs() <= 1e-4 && obj(t) <= obj(b) + 1e-12, || format!("binomial eps {e}: {t} vs grid {b}"))?;
    }
    ensure(th[0] < 0.55 && th[1] > 0.95, || format!("binomial estimates {th:?}"))?;

    // exponential, α = 0.5, contaminant rate 0.01; grid in log rate
    let (eps, rate, _) =
        sweep(&[("family", "exponential"), ("alpha", "0.5"), ("rate0", "0.01"), ("eps", "0:0.3:0.005")])?;
    let mut max_dev: f64 = 0.0;
    for (&e, &r) in eps.iter().zip(&rate) {
        let obj = |u: f64| mdpde_exponential_objective(0.5, u.exp(), e, 0.01);
        let b = brute_argmin(obj, 1e-3f64.ln(), 1e3f64.ln(), 1e-4);
        ensure((r.ln() - b).abs() <= 1e-4 && obj(r.ln()) <= obj(b) + 1e-12, || {
            format!("exponential eps {e}: {r} vs grid {}", b.exp())
        })?;
        max_dev = max_dev.max((1.0 / r - 1.0).abs());
    }
    ensure(max_dev < 0.5, || format!("|1/rate - 1| reaches {max_dev}"))?;

    // normal location, α = 0.9, contaminant N(5, 1)
    let (eps, mu, _) = sweep(&[("family", "normal-location"), ("alpha", "0.9"), ("mu0", "5"), ("eps", "0:0.4:0.005")])?;
    let mut max_mu: f64 = 0.0;
    for (&e, &m) in eps.iter().zip(&mu) {
        let obj = |x: f64| mdpde_normal_objective(0.9, x, 1.0, e, 5.0, 1.0);
        let b = brute_argmin(obj, -20.0, 20.0, 1e-4);
        ensure((m - b).abs() <= 1e-4 && obj(m) <= obj(b) + 1e-12, || format!("normal eps {e}: {m} vs grid {b}"))?;
        max_mu = max_mu.max(m.abs());
    }
    ensure(max_mu < 0.5, || format!("|mu_hat| reaches {max_mu}"))?;
    Ok(format!(
        "binomial {:.4}/{:.4}; max |1/rate-1| {max_dev:.3}; max |mu| {max_mu:.4}; all match grid oracles",
        th[0], th[1]
    ))
}

fn c8_figure_grid() -> Verdict {
    let t = cmd_bound_grid(&config(Command::BoundGrid, &[("alpha", "0:1:0.05"), ("lambda", "-3:3:0.1")]))
        .map_err(|e| e.to_string())?;
    ensure(t.rows.len() == 21 * 61, || format!("{} cells", t.rows.len()))?;
    let (a, l, b) = (t.column("alpha").unwrap(), t.column("lambda").unwrap(), t.column("bound").unwrap());
    let (mut flagged, mut quarter) = (0, 0);
    for row in &t.rows {
        let (alpha, lambda): (f64, f64) = (row[a].parse().unwrap(), row[l].parse().unwrap());
        let (big_a, big_b) = (1.0 + lambda * (1.0 - alpha), alpha - lambda * (1.0 - alpha));
        let outside = big_a < -1e-12 || big_b < -1e-12;
        ensure((row[b] == "NOGUARANTEE") == outside, || format!("({alpha}, {lambda}): {}", row[b]))?;
        if outside {
            flagged += 1;
            continue;
        }
        // direct evaluation; on A = 0 the bound is the limit in A
        let x = if big_a.abs() <= 1e-12 {
            (-1.0 / (1.0 + alpha)).exp()
        } else {
            (big_b.max(0.0) / (1.0 + alpha)).powf(1.0 / big_a)
        };
        let direct = x.min(1.0 - x);
        let got: f64 = row[b].parse().unwrap();
        ensure((got - direct).abs() <= 1e-12, || format!("({alpha}, {lambda}): {got} vs {direct}"))?;
        if direct >= 0.25 {
            ensure(got >= 0.25, || format!("({alpha}, {lambda}) below 1/4"))?;
            quarter += 1;
        }
    }
    let (ea, eb) = exponents(0.0, -0.5);
    ensure(ea == 0.5 && eb == 0.5, || "Hellinger exponents".into())?;
    ensure(2 * quarter > t.rows.len(), || format!("only {quarter} cells reach 1/4"))?;
    Ok(format!("{flagged} NOGUARANTEE cells, {quarter} of {} cells at least 1/4", t.rows.len()))
}

fn c9_monte_carlo() -> Verdict {
    let q = quad();
    let cases: Vec<(DensityModel, DensityModel, f64, f64)> = (0..20)
        .map(|i| {
            let eps = 0.05 * (i % 10) as f64 + 0.02;
            let beta = 1.05 + 0.1 * (i % 7) as f64;
            match i % 4 {
                0 => (normal(0.0, 1.0).unwrap(), normal(5.0, 1.0).unwrap(), eps, beta),
                1 => (normal(0.0, 1.0).unwrap(), normal(2.0, 0.3).unwrap(), eps, beta),
                2 => (exponential(1.0).unwrap(), exponential(10.0).unwrap(), eps, beta),
                _ => (gamma(2.0, 1.0).unwrap(), gamma(2.0, 0.2).unwrap(), eps, beta),
            }
        })
        .collect();
    let mut worst_z: f64 = 0.0;
    for (i, (f, k, eps, beta)) in cases.iter().enumerate() {
        let g = mixture(&ContaminationSpec::new(f.clone(), k.clone(), *eps).unwrap()).unwrap();
        let support = g.support();
        let dom = Domain::from_support(support).with_breakpoints(g.hints().to_vec());
        let h = |x: &[f64]| (beta * g.ln_eval(x)).exp();
        let exact = integrate(&q, h, &dom).map_err(|e| e.to_string())?.value;
        let mc = IntegratorHandle::monte_carlo(10_000, 1000 + i as u64);
        let a = integrate_weighted(&mc, h, &g, &dom, 0).map_err(|e| e.to_string())?;
        let b = integrate_weighted(&mc, h, &g, &dom, 0).map_err(|e| e.to_string())?;
        ensure(a.value.to_bits() == b.value.to_bits() && a.err_estimate.to_bits() == b.err_estimate.to_bits(), || {
            format!("case {i}: repeated run differs")
        })?;
        let z = (a.value - exact).abs() / (a.err_estimate + 1e-12 * exact.abs());
        ensure(z <= 4.0, || format!("case {i} ({support}): {} vs {exact}, z = {z:.2}", a.value))?;
        worst_z = worst_z.max(z);
    }
    Ok(format!("20 integrands, max |z| {worst_z:.2}, repeat runs bit-identical"))
}

#[test]
fn acceptance() {
    let criteria: Vec<Criterion> = vec![
        ("bound formulas exact", Duration::from_secs(1), c1_bound_formulas),
        ("piecewise scenario breakdowns", Duration::from_secs(1), c2_scenarios),
        ("Lemma 1 property suite", Duration::from_secs(120), c3_lemma1),
        ("divergence axioms", Duration::from_secs(120), c4_axioms),
        ("closed form vs quadrature", Duration::from_secs(60), c5_closed_forms),
        ("KL sweeps are linear", Duration::from_secs(60), c6_kl_linearity),
        ("robust regime shapes", Duration::from_secs(600), c7_robust_regime),
        ("bound heatmap grid", Duration::from_secs(5), c8_figure_grid),
        ("Monte Carlo coherence", Duration::from_secs(60), c9_monte_carlo),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let took = start.elapsed();
        let (pass, detail) = match verdict {
            Ok(d) if took <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {budget:?} budget")),
            Err(e) => (false, e),
        };
        writeln!(
            out,
            "{} criterion {}: {name}: {detail} [{:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            took.as_secs_f64()
        )
        .unwrap();
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn hellinger_region_is_a_majority() {
    let mut n = 0;
    let mut total = 0;
    for i in 0..=20 {
        for j in 0..=60 {
            total += 1;
            if let BoundValue::Value(v) = bound_cell(i as f64 * 0.05, -3.0 + j as f64 * 0.1).unwrap().bound {
                n += (v >= 0.25) as usize;
            }
        }
    }
    assert!(2 * n > total);
}
