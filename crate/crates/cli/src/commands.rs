//! The four commands. Each builds a [`Table`] from a [`RunConfig`]; no
//! command reads anything but its config, so reruns are byte-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sdiv::breakdown::{bound_cell, bp3_inequality_check, lemma1_check, scenario_breakdown, BoundValue, LimitScenario};
use sdiv::estimate::{sweep, Candidate, Contaminant, ContaminationScenario, OptimizerOpts};
use sdiv::models::{exponential, normal, FamilyKind, FamilySpec};
use sdiv::{derive_exponents, DensityModel, DivergenceParams, Error, IntegratorHandle};

use crate::config::{Command, FamilyName, RunConfig, ScenarioName};
use crate::output::{fmt_f64, Table};
use crate::CliError;

/// Runs whichever command the config names.
pub fn run(cfg: &RunConfig) -> Result<Table, CliError> {
    match cfg.command {
        Command::BoundGrid => cmd_bound_grid(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::ScenarioBound => cmd_scenario_bound(cfg),
        Command::CheckLemma1 | Command::CheckBp3 => cmd_check(cfg),
    }
}

pub fn integrator(cfg: &RunConfig) -> IntegratorHandle {
    if cfg.mc_samples > 0 {
        IntegratorHandle::monte_carlo(cfg.mc_samples, cfg.seed)
    } else {
        IntegratorHandle::quadrature_with(cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)
    }
}

fn pairs(cfg: &RunConfig) -> Vec<(f64, f64)> {
    let lambdas = cfg.lambda.values();
    cfg.alpha.values().into_iter().flat_map(|a| lambdas.iter().map(move |&l| (a, l))).collect()
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

/// `(alpha, lambda, A, B, bound)` over the parameter grid.
pub fn cmd_bound_grid(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(["alpha", "lambda", "A", "B", "branch", "bound"]);
    for (alpha, lambda) in pairs(cfg) {
        check_alpha(alpha)?;
        let c = bound_cell(alpha, lambda).map_err(|e| CliError::Numeric(e.to_string()))?;
        let bound = match c.bound {
            BoundValue::Value(v) => fmt_f64(v),
            BoundValue::NoGuarantee => "NOGUARANTEE".into(),
        };
        let branch = c.branch.map_or("out-of-family", |b| b.as_str());
        t.rows.push(vec![fmt_f64(alpha), fmt_f64(lambda), fmt_f64(c.a_exp), fmt_f64(c.b_exp), branch.into(), bound]);
    }
    Ok(t)
}

/// Model family, true parameter and contaminant of a sweep.
pub fn sweep_setup(cfg: &RunConfig) -> Result<(FamilySpec, ContaminationScenario), CliError> {
    let usage = |e: Error| CliError::Usage(e.to_string());
    let (fam, truth, contaminant) = match cfg.family {
        FamilyName::NormalLocation => (
            FamilySpec::normal_location(1.0).map_err(usage)?,
            vec![0.0],
            Contaminant::Normal { mean: cfg.mu0, sd: cfg.sigma0 },
        ),
        FamilyName::NormalScale => (
            FamilySpec::normal_scale(0.0).map_err(usage)?,
            vec![1.0],
            Contaminant::Normal { mean: cfg.mu0, sd: cfg.sigma0 },
        ),
        FamilyName::NormalLocationScale => {
            (FamilySpec::normal_location_scale(), vec![0.0, 1.0], Contaminant::Normal { mean: cfg.mu0, sd: cfg.sigma0 })
        }
        FamilyName::Exponential => (FamilySpec::exponential(), vec![1.0], Contaminant::Exponential { rate: cfg.rate0 }),
        FamilyName::Gamma => (
            FamilySpec::gamma(cfg.shape).map_err(usage)?,
            vec![1.0],
            Contaminant::Gamma { shape: cfg.shape, rate: cfg.rate0 },
        ),
        FamilyName::Binomial => {
            (FamilySpec::binomial(cfg.n).map_err(usage)?, vec![0.5], Contaminant::PointMass { at: cfg.n })
        }
        FamilyName::MvLocation => (
            FamilySpec::new(FamilyKind::MvNormalLocationIso { dim: cfg.dim, sigma: 1.0 }).map_err(usage)?,
            vec![0.0; cfg.dim],
            Contaminant::MvNormalIso { mean: vec![cfg.mu0; cfg.dim], sd: cfg.sigma0 },
        ),
        FamilyName::MvScatter => (
            FamilySpec::new(FamilyKind::MvNormalScatterIso { dim: cfg.dim, mu: 0.0 }).map_err(usage)?,
            vec![1.0],
            Contaminant::MvNormalIso { mean: vec![cfg.mu0; cfg.dim], sd: cfg.sigma0 },
        ),
    };
    Ok((fam, ContaminationScenario::new(truth, contaminant)))
}

/// One row per `(α, λ, ε)`; failed points carry their error in `status`.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Table, CliError> {
    let (fam, scenario) = sweep_setup(cfg)?;
    let names = fam.param_names();
    let mut header: Vec<String> = ["eps", "alpha", "lambda", "A", "B"].map(String::from).to_vec();
    header.extend(names.iter().map(|n| format!("{n}_hat")));
    header.extend(
        ["objective", "converged", "restarts", "evaluations", "candidate", "source", "status"].map(String::from),
    );
    let mut t = Table::new(header);
    let eps = cfg.eps.values();
    let integ = integrator(cfg);
    let opts = OptimizerOpts { n_grid: cfg.n_grid, ..OptimizerOpts::default() };
    let combos = pairs(cfg);
    for &(alpha, _) in &combos {
        check_alpha(alpha)?;
    }
    let blank = |n: usize| vec![String::new(); n];
    let per_combo: Vec<(Vec<Vec<String>>, usize)> = combos
        .par_iter()
        .map(|&(alpha, lambda)| {
            let (a, b) = sdiv::divergence::exponents(alpha, lambda);
            let lead = |e: f64| vec![fmt_f64(e), fmt_f64(alpha), fmt_f64(lambda), fmt_f64(a), fmt_f64(b)];
            let fail_all = |msg: String| {
                let rows = eps
                    .iter()
                    .map(|&e| {
                        let mut r = lead(e);
                        r.extend(blank(names.len() + 6));
                        r.push(msg.clone());
                        r
                    })
                    .collect::<Vec<_>>();
                let n = rows.len();
                (rows, n)
            };
            let params = match derive_exponents(alpha, lambda) {
                Ok(p) => p,
                Err(e) => return fail_all(format!("error: {e}")),
            };
            let points = match sweep(&params, &fam, &scenario, &eps, &integ, &opts) {
                Ok(p) => p,
                Err(e) => return fail_all(format!("error: {e}")),
            };
            let mut failures = 0;
            let rows = points
                .into_iter()
                .map(|pt| {
                    let mut r = lead(pt.eps);
                    match &pt.outcome {
                        Ok(res) => {
                            r.extend(res.theta_hat.iter().map(|&v| fmt_f64(v)));
                            r.push(fmt_f64(res.objective_at_min));
                            r.push(res.converged.to_string());
                            r.push(res.restarts_used.to_string());
                            r.push(res.evaluations.to_string());
                            r.push(pt.kept.map_or("", candidate_name).into());
                            r.push(pt.source.map_or("", |s| s.as_str()).into());
                            r.push("ok".into());
                        }
                        Err(e) => {
                            failures += 1;
                            r.extend(blank(names.len() + 4));
                            r.push(String::new());
                            r.push(pt.source.map_or("", |s| s.as_str()).into());
                            r.push(format!("error: {e}"));
                        }
                    }
                    r
                })
                .collect();
            (rows, failures)
        })
        .collect();
    for (rows, failures) in per_combo {
        t.rows.extend(rows);
        t.failures += failures;
    }
    Ok(t)
}

fn candidate_name(c: Candidate) -> &'static str {
    match c {
        Candidate::Warm => "warm",
        Candidate::Cold => "cold",
    }
}

fn limit_scenario(cfg: &RunConfig, name: ScenarioName) -> LimitScenario {
    let (direction, regime, eta) = (cfg.direction, cfg.regime, cfg.eta);
    match name {
        ScenarioName::NormalLocation => LimitScenario::NormalLocation,
        ScenarioName::MvLocation => LimitScenario::MvNormalLocation { dim: cfg.dim },
        ScenarioName::NormalScale => LimitScenario::NormalScale { direction, eta, regime },
        ScenarioName::MvScatter => LimitScenario::MvNormalScatter { dim: cfg.dim, direction, eta, regime },
        ScenarioName::Exponential => LimitScenario::Exponential { direction, regime },
        ScenarioName::Gamma => LimitScenario::Gamma { shape: cfg.shape, direction, regime },
    }
}

/// Piecewise breakdown values per scenario and `(α, λ)`.
pub fn cmd_scenario_bound(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut t = Table::new(["scenario", "alpha", "lambda", "A", "B", "branch", "L", "epsilon_star", "status"]);
    for &name in &cfg.scenarios {
        let sc = limit_scenario(cfg, name);
        for (alpha, lambda) in pairs(cfg) {
            check_alpha(alpha)?;
            let (a, b) = sdiv::divergence::exponents(alpha, lambda);
            let mut row = vec![name.as_str().to_string(), fmt_f64(alpha), fmt_f64(lambda), fmt_f64(a), fmt_f64(b)];
            let outcome = derive_exponents(alpha, lambda).and_then(|p| scenario_breakdown(&sc, &p));
            match outcome {
                Ok(r) => {
                    row.push(r.formula_branch.clone());
                    row.push(r.intermediates.get("L").map_or(String::new(), |&l| fmt_f64(l)));
                    row.push(fmt_f64(r.bound));
                    row.push("ok".into());
                }
                Err(Error::OutOfFamily { .. }) => {
                    row.extend(["".into(), "".into(), "NOGUARANTEE".into(), "out-of-family".into()]);
                }
                Err(Error::BranchUnsupported(b)) => {
                    row.extend(["".into(), "".into(), "".into(), format!("unsupported: {b} branch")]);
                }
                Err(Error::UnknownScenario(m)) => return Err(CliError::Usage(m)),
                Err(e) => return Err(CliError::Numeric(e.to_string())),
            }
            t.rows.push(row);
        }
    }
    Ok(t)
}

/// `(α, λ)` with `A, B > 0`, away from the family boundary.
fn draw_generic_params(rng: &mut ChaCha8Rng) -> DivergenceParams {
    let alpha: f64 = rng.random_range(0.02..1.0);
    let lo = (-1.0 / (1.0 - alpha)).max(-3.0);
    let hi = (alpha / (1.0 - alpha)).min(3.0);
    let lambda = lo + rng.random_range(0.02..0.98) * (hi - lo);
    derive_exponents(alpha, lambda).expect("drawn inside the family")
}

/// One Lemma 1 instance: parameters, ε, and a pair `(g, f)` with `M_f ≥ M_g`.
pub fn lemma1_instance(seed: u64, index: u64, cap_factor: f64) -> (DivergenceParams, f64, DensityModel, DensityModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let p = draw_generic_params(&mut rng);
    let cap = (p.b_exp / (1.0 + p.alpha)).powf(1.0 / p.a_exp);
    let eps = (cap_factor * cap * rng.random_range(0.0..1.0)).min(1.0);
    let (g, f) = if rng.random_bool(0.5) {
        let (s1, s2): (f64, f64) = (rng.random_range(0.3..3.0), rng.random_range(0.3..3.0));
        let (m1, m2): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        (normal(m1, s1.max(s2)).unwrap(), normal(m2, s1.min(s2)).unwrap())
    } else {
        let (r1, r2): (f64, f64) = (rng.random_range(0.2..5.0), rng.random_range(0.2..5.0));
        (exponential(r1.min(r2)).unwrap(), exponential(r1.max(r2)).unwrap())
    };
    (p, eps, g, f)
}

/// One contamination-inequality instance: parameters, ε, and `(k, f, g)`.
pub fn bp3_instance(seed: u64, index: u64) -> (DivergenceParams, f64, DensityModel, DensityModel, DensityModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let p = draw_generic_params(&mut rng);
    let eps: f64 = rng.random_range(0.0..1.0);
    let k = normal(rng.random_range(-60.0..60.0), rng.random_range(0.5..2.0)).unwrap();
    let f = normal(rng.random_range(-60.0..60.0), rng.random_range(0.5..2.0)).unwrap();
    (p, eps, k, f, normal(0.0, 1.0).unwrap())
}

/// Randomized batches of inequality checks; every instance gets a row.
pub fn cmd_check(cfg: &RunConfig) -> Result<Table, CliError> {
    let integ = integrator(cfg);
    let idx: Vec<u64> = (0..cfg.instances as u64).collect();
    let mut t;
    // (row, failed, violated)
    let rows: Vec<(Vec<String>, bool, bool)> = match cfg.command {
        Command::CheckLemma1 => {
            t = Table::new([
                "index",
                "alpha",
                "lambda",
                "eps",
                "eps_cap",
                "g",
                "f",
                "mass_f",
                "mass_g",
                "lhs",
                "rhs",
                "chain_lhs",
                "chain_rhs",
                "holder_lhs",
                "holder_rhs",
                "verdict",
            ]);
            idx.par_iter()
                .map(|&i| {
                    let (p, eps, g, f) = lemma1_instance(cfg.seed, i, cfg.eps_cap_factor);
                    let mut row = vec![
                        i.to_string(),
                        fmt_f64(p.alpha),
                        fmt_f64(p.lambda),
                        fmt_f64(eps),
                        fmt_f64((p.b_exp / (1.0 + p.alpha)).powf(1.0 / p.a_exp)),
                        g.label().to_string(),
                        f.label().to_string(),
                    ];
                    match lemma1_check(&p, eps, &g, &f, &integ) {
                        Ok(r) => {
                            let ok = r.main.holds && r.chain.holds && r.holder.holds;
                            row.extend(
                                [
                                    r.mass_f,
                                    r.mass_g,
                                    r.main.lhs,
                                    r.main.rhs,
                                    r.chain.lhs,
                                    r.chain.rhs,
                                    r.holder.lhs,
                                    r.holder.rhs,
                                ]
                                .map(fmt_f64),
                            );
                            row.push(if ok { "holds" } else { "violation" }.into());
                            (row, false, !ok)
                        }
                        Err(Error::PreconditionViolated(_)) => {
                            row.extend(vec![String::new(); 8]);
                            row.push("precondition_skip".into());
                            (row, false, false)
                        }
                        Err(e) => {
                            row.extend(vec![String::new(); 8]);
                            row.push(format!("error: {e}"));
                            (row, true, false)
                        }
                    }
                })
                .collect()
        }
        _ => {
            t = Table::new([
                "index",
                "alpha",
                "lambda",
                "eps",
                "k",
                "f",
                "g",
                "lhs",
                "rhs",
                "holds",
                "mass_lhs",
                "mass_rhs",
                "mass_holds",
                "verdict",
            ]);
            idx.par_iter()
                .map(|&i| {
                    let (p, eps, k, f, g) = bp3_instance(cfg.seed, i);
                    let mut row = vec![
                        i.to_string(),
                        fmt_f64(p.alpha),
                        fmt_f64(p.lambda),
                        fmt_f64(eps),
                        k.label().to_string(),
                        f.label().to_string(),
                        g.label().to_string(),
                    ];
                    match bp3_inequality_check(&p, eps, &k, &f, &g, &integ) {
                        Ok(r) => {
                            let (d, m) = (r.divergence_form, r.mass_form);
                            row.extend([
                                fmt_f64(d.lhs),
                                fmt_f64(d.rhs),
                                d.holds.to_string(),
                                fmt_f64(m.lhs),
                                fmt_f64(m.rhs),
                                m.holds.to_string(),
                            ]);
                            row.push(if r.consistent { "consistent" } else { "violation" }.into());
                            (row, false, !r.consistent)
                        }
                        Err(e) => {
                            row.extend(vec![String::new(); 6]);
                            row.push(format!("error: {e}"));
                            (row, true, false)
                        }
                    }
                })
                .collect()
        }
    };
    for (row, failed, violated) in rows {
        t.failures += failed as usize;
        t.violations += violated as usize;
        t.rows.push(row);
    }
    Ok(t)
}
