use ifconv_core::coeffspec::{parse_expr, validate_problem, Problem, StateSpace};
use ifconv_core::quad::{classify_improper, integrate_compact, Side, Tolerances};
use ifconv_core::scale::ScaleFunction;
use ifconv_core::simkit::*;
use ifconv_core::full_verdict;
use proptest::prelude::*;

fn problem(l: f64, r: f64, x0: f64, mu: &str, sigma: &str, f: &str) -> Problem {
    Problem::new(
        StateSpace::new(l, r, x0).unwrap(),
        parse_expr(mu).unwrap(),
        parse_expr(sigma).unwrap(),
        parse_expr(f).unwrap(),
    )
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_is_additive(k in -2.0f64..2.0, w in 0.1f64..5.0, a in -3.0f64..0.0, m in 0.0f64..1.0, len in 0.1f64..4.0) {
        let g = |x: f64| (k * x).exp() * (w * x).cos().powi(2) + 1.0;
        let b = a + m * len;
        let c = a + len;
        let tol = Tolerances::default();
        let whole = integrate_compact(&g, a, c, &tol).unwrap().value;
        let parts = integrate_compact(&g, a, b, &tol).unwrap().value + integrate_compact(&g, b, c, &tol).unwrap().value;
        prop_assert!(rel(parts, whole) < 1e-8);
    }

    #[test]
    fn power_law_calibration(p in prop_oneof![0.05f64..0.9, 1.1f64..3.0]) {
        let v = classify_improper(&|x: f64| x.powf(-p), 0.0, Side::RightOf, 1.0, &Tolerances::default());
        if p < 1.0 {
            prop_assert!(v.is_finite());
            prop_assert!(rel(v.value().unwrap(), 1.0 / (1.0 - p)) < 1e-6);
        } else {
            prop_assert!(v.is_infinite());
        }
    }

    #[test]
    fn scale_changes_affinely_with_reference(a in -1.0f64..1.0, b in 0.3f64..2.0, c2 in 0.3f64..3.0, x in 0.05f64..20.0) {
        let p = problem(0.0, f64::INFINITY, 1.0, &format!("{a}*x"), &format!("{b}*x"), "1");
        let tol = Tolerances::default();
        let s1 = ScaleFunction::with_reference(&p, 1.0, tol).unwrap();
        let s2 = ScaleFunction::with_reference(&p, c2, tol).unwrap();
        let k = 1.0 / s1.rho(c2);
        let want = k * (s1.s(x) - s1.s(c2));
        prop_assert!((s2.s(x) - want).abs() <= 1e-6 * want.abs().max(1e-3), "{} vs {}", s2.s(x), want);
    }

    #[test]
    fn scale_is_increasing(a in -2.0f64..2.0, x in 0.05f64..10.0, dx in 1e-3f64..5.0) {
        let p = problem(0.0, f64::INFINITY, 1.0, &format!("{a}/x"), "1", "1");
        let sf = ScaleFunction::new(&p, Tolerances::default());
        prop_assert!(sf.s(x + dx) > sf.s(x));
        prop_assert!(sf.rho(x) > 0.0);
    }

    #[test]
    fn occupation_mass_matches_elapsed_time(seed in any::<u64>()) {
        let p = problem(f64::NEG_INFINITY, f64::INFINITY, 0.0, "0", "1", "1");
        let path = simulate_diffusion(&p, 1e-3, 1.0, seed).unwrap();
        let h = 0.02;
        let lo = path.values.iter().cloned().fold(f64::INFINITY, f64::min) - h;
        let hi = path.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + h;
        let levels: Vec<f64> = (0..).map(|j| lo + 2.0 * h * j as f64).take_while(|&x| x <= hi + 2.0 * h).collect();
        let prof = local_time_profile(&path, &levels, h);
        prop_assert!(prof.density.iter().all(|&d| d >= 0.0));
        let mass: f64 = prof.density.iter().map(|d| d * 2.0 * h).sum();
        prop_assert!(rel(mass, path.terminal_time()) < 0.03);
    }

    #[test]
    fn exit_paths_are_absorbed(seed in any::<u64>()) {
        let p = problem(0.0, 1.0, 0.5, "0.3", "1", "1");
        let path = simulate_diffusion(&p, 1e-3, 50.0, seed).unwrap();
        prop_assert_eq!(path.times[0], 0.0);
        prop_assert_eq!(path.values[0], 0.5);
        prop_assert!(path.times.windows(2).all(|w| w[1] >= w[0]));
        if let Exit::ExitAt { time, endpoint } = path.exit {
            prop_assert_eq!(path.terminal_time(), time);
            prop_assert_eq!(path.terminal_value(), p.space.endpoint(endpoint));
            let inner = &path.values[..path.values.len() - 1];
            prop_assert!(inner.iter().all(|&y| y > 0.0 && y < 1.0));
        }
    }
}

fn bessel_type(q: f64) -> Problem {
    problem(0.0, f64::INFINITY, 1.0, "1/x", "1", &format!("x^(-{q})"))
}

fn agreement(p: &Problem, params: &SimParams) -> AgreementSummary {
    let tol = Tolerances::default();
    let vp = validate_problem(p.clone(), 256).unwrap();
    let report = full_verdict(&vp, &tol);
    verdict_agreement(p, &report, params, &tol).unwrap()
}

#[test]
fn summaries_do_not_depend_on_thread_count() {
    let p = bessel_type(3.0);
    let params = SimParams { n_paths: 64, horizon: 1e6, max_step: Some(1e6), dyadic_count: 26, ..SimParams::default() };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| agreement(&p, &params))
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(1));
    let ray = |t: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
        pool.install(|| ray_knight_check(1.0, 0.0, 0.5, 200, 1e-3, None, 4, 0.01).unwrap())
    };
    assert_eq!(ray(1), ray(3));
}

#[test]
fn halving_dt_keeps_agreement_fractions() {
    let cases = [
        (
            bessel_type(3.0),
            SimParams { horizon: 2f64.powi(30), max_step: Some(1e9), dyadic_count: 30, ..SimParams::default() },
        ),
        (
            problem(f64::NEG_INFINITY, 1.0, 0.0, "0", "1", "(1-x)^(-1.5)"),
            SimParams { horizon: 1e4, max_step: Some(1e4), dyadic_count: 32, ..SimParams::default() },
        ),
        (
            problem(f64::NEG_INFINITY, 1.0, 0.0, "0", "1", "(1-x)^(-2.5)"),
            SimParams { horizon: 1e4, max_step: Some(1e4), dyadic_count: 32, ..SimParams::default() },
        ),
    ];
    for (p, params) in cases {
        let coarse = agreement(&p, &params);
        let fine = agreement(&p, &SimParams { dt: params.dt / 2.0, ..params.clone() });
        let diff = (coarse.overall_agreement - fine.overall_agreement).abs();
        assert!(diff < 0.05, "{}: {} vs {}", p.f, coarse.overall_agreement, fine.overall_agreement);
    }
}
