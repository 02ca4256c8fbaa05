use proptest::prelude::*;
use sdiv::divergence::s_divergence;
use sdiv::estimate::*;
use sdiv::models::{density_at, mixture, ContaminationSpec, FamilySpec};
use sdiv::models::{exponential, normal};
use sdiv::{derive_exponents, IntegratorHandle};

fn eps_grid(step: f64, stop: f64) -> Vec<f64> {
    let n = (stop / step).round() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn generic_params() -> impl Strategy<Value = (f64, f64)> {
    (0.05f64..1.0, 0.05f64..0.95).prop_map(|(alpha, u)| {
        let lo = (-1.0 / (1.0 - alpha)).max(-3.0);
        let hi = (alpha / (1.0 - alpha)).min(3.0);
        (alpha, lo + u * (hi - lo))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn objective_differences_are_divergence_differences(
        (alpha, lambda) in generic_params(),
        eps in 0.0f64..0.5,
        t1 in -2.0f64..6.0,
        t2 in -2.0f64..6.0,
    ) {
        let p = derive_exponents(alpha, lambda).unwrap();
        let q = IntegratorHandle::quadrature();
        let fam = FamilySpec::normal_location(1.0).unwrap();
        let c = ContaminationSpec::new(normal(0.0, 1.0).unwrap(), normal(5.0, 1.0).unwrap(), eps).unwrap();
        let g = mixture(&c).unwrap();
        let obj = |t: f64| msd_objective(&p, &fam, &[t], &c, &q).unwrap();
        let div = |t: f64| s_divergence(&p, &g, &density_at(&fam, &[t]).unwrap(), &q).unwrap();
        let lhs = obj(t1) - obj(t2);
        let rhs = div(t1) - div(t2);
        prop_assert!((lhs - rhs).abs() <= 1e-7, "{lhs} vs {rhs}");
    }

    #[test]
    fn normal_closed_form_matches_quadrature(
        alpha in 0.05f64..1.0, mu in -4.0f64..8.0, sigma in 0.3f64..4.0,
        eps in 0.0f64..1.0, mu0 in -6.0f64..6.0, sigma0 in 0.2f64..3.0,
    ) {
        let p = derive_exponents(alpha, 0.0).unwrap();
        let fam = FamilySpec::normal_location_scale();
        let c = ContaminationSpec::new(normal(0.0, 1.0).unwrap(), normal(mu0, sigma0).unwrap(), eps).unwrap();
        let quad = msd_objective(&p, &fam, &[mu, sigma], &c, &IntegratorHandle::quadrature()).unwrap();
        let closed = mdpde_normal_objective(alpha, mu, sigma, eps, mu0, sigma0);
        prop_assert!((quad - closed).abs() <= 1e-8, "{quad} vs {closed}");
    }

    #[test]
    fn exponential_closed_form_matches_quadrature(
        alpha in 0.05f64..1.0, rate in 0.1f64..10.0, eps in 0.0f64..1.0, rate0 in 0.05f64..20.0,
    ) {
        let p = derive_exponents(alpha, 0.0).unwrap();
        let c = ContaminationSpec::new(exponential(1.0).unwrap(), exponential(rate0).unwrap(), eps).unwrap();
        let quad = msd_objective(&p, &FamilySpec::exponential(), &[rate], &c, &IntegratorHandle::quadrature()).unwrap();
        let closed = mdpde_exponential_objective(alpha, rate, eps, rate0);
        prop_assert!((quad - closed).abs() <= 1e-8, "{quad} vs {closed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn binomial_estimate_rises_with_contamination(alpha in 0.0f64..1.0, u in 0.05f64..0.95) {
        let lo = if alpha < 1.0 { (-1.0 / (1.0 - alpha)).max(-3.0) } else { -3.0 };
        let hi = if alpha < 1.0 { (alpha / (1.0 - alpha)).min(3.0) } else { 3.0 };
        let p = derive_exponents(alpha, lo + u * (hi - lo)).unwrap();
        let fam = FamilySpec::binomial(12).unwrap();
        let sc = ContaminationScenario::new(vec![0.5], Contaminant::PointMass { at: 12 });
        let pts = sweep(&p, &fam, &sc, &eps_grid(0.05, 1.0), &IntegratorHandle::quadrature(), &OptimizerOpts::default()).unwrap();
        let est: Vec<f64> = pts.iter().map(|pt| pt.outcome.as_ref().unwrap().theta_hat[0]).collect();
        for w in est.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-6, "{est:?}");
        }
    }
}

#[test]
fn kl_sweeps_are_linear() {
    let q = IntegratorHandle::quadrature();
    let opts = OptimizerOpts::default();
    let kl = derive_exponents(0.0, 0.0).unwrap();
    let grid = eps_grid(0.05, 0.5);

    let fam = FamilySpec::normal_location(1.0).unwrap();
    let sc = ContaminationScenario::new(vec![0.0], Contaminant::Normal { mean: 5.0, sd: 1.0 });
    for pt in sweep(&kl, &fam, &sc, &grid, &q, &opts).unwrap() {
        let mu = pt.outcome.unwrap().theta_hat[0];
        assert!((mu - 5.0 * pt.eps).abs() < 1e-6, "eps {}: {mu}", pt.eps);
    }

    let sc = ContaminationScenario::new(vec![1.0], Contaminant::Exponential { rate: 10.0 });
    for pt in sweep(&kl, &FamilySpec::exponential(), &sc, &grid, &q, &opts).unwrap() {
        let inv = 1.0 / pt.outcome.unwrap().theta_hat[0];
        let expect = (1.0 - pt.eps) + pt.eps / 10.0;
        assert!((inv - expect).abs() < 1e-6, "eps {}: {inv} vs {expect}", pt.eps);
    }
}

#[test]
fn continuation_agrees_with_restarts_away_from_the_jump() {
    let q = IntegratorHandle::quadrature();
    let opts = OptimizerOpts::default();
    let p = derive_exponents(0.5, 0.0).unwrap();
    let fam = FamilySpec::normal_location(1.0).unwrap();
    let sc = ContaminationScenario::new(vec![0.0], Contaminant::Normal { mean: 5.0, sd: 1.0 });
    let pts = sweep(&p, &fam, &sc, &eps_grid(0.02, 0.3), &q, &opts).unwrap();
    assert!(pts[1..].iter().all(|pt| pt.warm.is_some() && pt.cold.is_some()));
    for pt in pts {
        if let (Some(w), Some(c)) = (&pt.warm, &pt.cold) {
            assert!((w.theta_hat[0] - c.theta_hat[0]).abs() <= 10.0 * opts.param_tol, "eps {}", pt.eps);
        }
    }
    let fam = FamilySpec::exponential();
    let sc = ContaminationScenario::new(vec![1.0], Contaminant::Exponential { rate: 0.01 });
    for pt in sweep(&p, &fam, &sc, &eps_grid(0.02, 0.3), &q, &opts).unwrap() {
        let (Some(w), Some(c)) = (pt.warm, pt.cold) else { continue };
        // the rate axis is searched on a log scale
        let rel = (w.theta_hat[0] / c.theta_hat[0]).ln().abs();
        assert!(rel <= 10.0 * opts.param_tol, "eps {}: {} vs {}", pt.eps, w.theta_hat[0], c.theta_hat[0]);
    }
}

#[test]
fn location_scale_sweep_explodes_then_collapses() {
    let q = IntegratorHandle::quadrature();
    let p = derive_exponents(0.5, 0.0).unwrap();
    let fam = FamilySpec::normal_location_scale();
    let sc = ContaminationScenario::new(vec![0.0, 1.0], Contaminant::Normal { mean: 5.0, sd: 0.01 });
    let pts = sweep(&p, &fam, &sc, &[0.0, 0.1, 0.3, 0.45], &q, &OptimizerOpts::default()).unwrap();
    let th = |i: usize| pts[i].outcome.as_ref().unwrap().theta_hat.clone();
    assert!(th(0)[0].abs() < 1e-5 && (th(0)[1] - 1.0).abs() < 1e-5, "{:?}", th(0));
    assert!(th(1)[0].abs() < 0.5, "{:?}", th(1));
    assert!(th(2)[1] > 1.5, "{:?}", th(2));
    assert!((th(3)[0] - 5.0).abs() < 0.1 && th(3)[1] < 0.05, "{:?}", th(3));
}

#[test]
fn monte_carlo_objective_agrees_with_quadrature() {
    let p = derive_exponents(0.5, -0.5).unwrap();
    let fam = FamilySpec::normal_location(1.0).unwrap();
    let c = ContaminationSpec::new(normal(0.0, 1.0).unwrap(), normal(5.0, 1.0).unwrap(), 0.2).unwrap();
    let quad = MsdObjective::new(p, fam.clone(), &c, IntegratorHandle::quadrature()).unwrap();
    let mc = MsdObjective::new(p, fam, &c, IntegratorHandle::monte_carlo(10_000, 7)).unwrap();
    for t in [-1.0, 0.0, 0.5, 2.0, 5.0] {
        let exact = quad.value(&[t]).unwrap();
        let est = mc.value_with_error(&[t]).unwrap();
        assert!((est.value - exact).abs() <= 3.0 * est.err_estimate, "theta {t}: {est:?} vs {exact}");
        assert_eq!(est, mc.value_with_error(&[t]).unwrap());
    }
}
