use lipcert::adversary::{build_bump, lower_bound_constant};
use lipcert::complexity::{estimate_sc, integral_estimate, ComplexityConfig, IntegralMethod};
use lipcert::optimizers::{cdoo_run_detailed, Envelope1D};
use lipcert::registry::{default_solver, lookup, registry};
use lipcert::{
    bisection_partition, diameter, ps_run_1d, sigma_from_trace, verify_assumptions,
    zeta_from_trace, AlgorithmKind, ComplexityScale, Domain, Norm, Partition, SampleCount,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LIP: f64 = 1.0;

#[test]
fn sigma_never_precedes_zeta() {
    for e in registry(LIP).unwrap() {
        for kind in e.algorithms().into_iter().filter(|k| k.is_certified()) {
            for eps in [0.25, 0.0625] {
                let trace = default_solver(&e, kind, eps)
                    .unwrap()
                    .run(&e.function, LIP, eps, 100_000)
                    .unwrap();
                let sigma = sigma_from_trace(&trace, eps).unwrap();
                let zeta = zeta_from_trace(&trace, Some(e.max_value()), eps).unwrap();
                let (SampleCount::At(s), SampleCount::At(z)) = (sigma, zeta) else {
                    panic!("{} {kind} eps={eps}: {sigma} / {zeta}", e.label);
                };
                assert!(z <= s, "{} {kind}: zeta {z} > sigma {s}", e.label);
            }
        }
    }
}

#[test]
fn selected_b_values_are_optimistic() {
    for label in ["tent-d1", "multibump-d1", "multibump-d2", "halftent-d1"] {
        let e = lookup(label, LIP).unwrap();
        let p = bisection_partition(&e.domain, e.norm).unwrap();
        let out = cdoo_run_detailed(&e.function, &p, LIP, 1e-3, 400).unwrap();
        assert!(!out.selections.is_empty());
        for s in &out.selections {
            let cell = p.cell(s.key);
            let mut probes = cell.corners();
            probes.push(p.representative(s.key));
            for x in probes {
                assert!(
                    e.function.eval(&x) <= s.b_value + 1e-12,
                    "{label}: cell {:?} b = {} below f({x:?})",
                    s.key,
                    s.b_value
                );
            }
        }
    }
}

#[test]
fn envelope_dominates_f() {
    let e = lookup("multibump-d1", LIP).unwrap();
    let trace = ps_run_1d(&e.function, (0.0, 1.0), LIP, 1e-3, 0.5, 60).unwrap();
    let mut env = Envelope1D::new(0.0, 1.0, LIP).unwrap();
    for r in trace.records() {
        env.insert(r.x[0], r.fx);
    }
    for i in 0..10_000 {
        let x = (i as f64 + 0.5) / 10_000.0;
        assert!(env.eval(x) >= e.function.eval(&[x]) - 1e-12, "x = {x}");
    }
    let top = env.maximum().unwrap();
    assert!(top.value >= e.max_value() - 1e-12);
}

#[test]
fn perturbed_functions_stay_lipschitz() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (label, center) in [
        ("halftent-d1", vec![0.31]),
        ("multibump-d2", vec![0.3, 0.32]),
    ] {
        let e = lookup(label, LIP).unwrap();
        let bump = build_bump(&e.function, &center, 0.004, LIP, e.norm).unwrap();
        let plus = bump.plus(&e.function);
        let minus = bump.minus(&e.function);
        let r = bump.radius();
        for _ in 0..10_000 {
            let x: Vec<f64> = center
                .iter()
                .map(|c| (c + rng.random_range(-1.5 * r..1.5 * r)).clamp(0.0, 1.0))
                .collect();
            let y: Vec<f64> = center
                .iter()
                .map(|c| (c + rng.random_range(-1.5 * r..1.5 * r)).clamp(0.0, 1.0))
                .collect();
            let d = e.norm.distance(&x, &y);
            for g in [&plus, &minus] {
                assert!(
                    (g.eval(&x) - g.eval(&y)).abs() <= LIP * d + 1e-12,
                    "{label} at {x:?}, {y:?}"
                );
            }
        }
        let far: Vec<f64> = center
            .iter()
            .map(|c| if *c < 0.5 { 0.95 } else { 0.05 })
            .collect();
        assert_eq!(plus.eval(&far).to_bits(), e.function.eval(&far).to_bits());
    }
}

#[test]
fn complexity_ignores_constant_shifts() {
    for label in ["tent-d1", "multibump-d1", "multibump-d2"] {
        let e = lookup(label, LIP).unwrap();
        let config = ComplexityConfig::default();
        let base = estimate_sc(&e.function, &e.domain, e.norm, LIP, 0.0625, &config).unwrap();
        let up = estimate_sc(
            &e.function.shifted(5.0),
            &e.domain,
            e.norm,
            LIP,
            0.0625,
            &config,
        )
        .unwrap();
        assert_eq!(base.packing_counts, up.packing_counts, "{label}");
        assert!(
            (base.integral - up.integral).abs() <= 1e-9 * base.integral,
            "{label}"
        );
    }
}

#[test]
fn integral_converges_under_refinement() {
    for label in [
        "tent-d1",
        "halftent-d1",
        "multibump-d1",
        "ramp-d1",
        "multibump-d2",
    ] {
        let e = lookup(label, LIP).unwrap();
        for eps in [0.25, 1.0 / 16.0, 1.0 / 64.0] {
            let step = eps / 8.0;
            let coarse = integral_estimate(
                &e.function,
                &e.domain,
                e.norm,
                LIP,
                eps,
                IntegralMethod::GridMidpoint,
                step,
            )
            .unwrap();
            let fine = integral_estimate(
                &e.function,
                &e.domain,
                e.norm,
                LIP,
                eps,
                IntegralMethod::GridMidpoint,
                step / 2.0,
            )
            .unwrap();
            let rel = (coarse.value - fine.value).abs() / fine.value;
            assert!(
                rel < 0.01,
                "{label} eps={eps}: {} vs {}",
                coarse.value,
                fine.value
            );
        }
    }
}

#[test]
fn bisection_meets_partition_assumptions() {
    for dim in 1..=3 {
        let lower = vec![-0.5; dim];
        let upper: Vec<f64> = (0..dim).map(|j| 1.0 + 0.25 * j as f64).collect();
        for domain in [
            Domain::unit_cube(dim),
            Domain::rectangle(lower, upper).unwrap(),
        ] {
            let p = bisection_partition(&domain, Norm::Sup).unwrap();
            let v = verify_assumptions(&p, 6, 2);
            assert!(v.passed, "d={dim}: {:?}", v.violation);
            assert!(v.cells_checked > 0);
        }
    }
}

#[test]
fn lower_bound_statement_holds() {
    for label in ["halftent-d1", "multibump-d1", "multibump-d2"] {
        let e = lookup(label, LIP).unwrap();
        let c = lower_bound_constant(e.dim, LIP, e.lip_f);
        for eps in [0.125, 0.03125] {
            let report = estimate_sc(
                &e.function,
                &e.domain,
                e.norm,
                LIP,
                eps,
                &ComplexityConfig::default(),
            )
            .unwrap();
            let scale = ComplexityScale::for_domain(&e.domain, e.norm, LIP, eps).unwrap();
            let bound = c * report.sc as f64 / (1 + scale.m_eps) as f64;
            for kind in e.algorithms().into_iter().filter(|k| k.is_certified()) {
                let trace = default_solver(&e, kind, eps)
                    .unwrap()
                    .run(&e.function, LIP, eps, 100_000)
                    .unwrap();
                let sigma = sigma_from_trace(&trace, eps).unwrap().value().unwrap();
                assert!(
                    sigma as f64 > bound,
                    "{label} {kind}: sigma {sigma} <= {bound}"
                );
            }
        }
    }
}

#[test]
fn ncdoo_never_certifies() {
    let e = lookup("tent-d1", LIP).unwrap();
    let trace = default_solver(&e, AlgorithmKind::Ncdoo, 0.1)
        .unwrap()
        .run(&e.function, LIP, 0.1, 50)
        .unwrap();
    assert_eq!(trace.len(), 50);
    assert!(trace.records().iter().all(|r| r.xi.is_none()));
    assert!(sigma_from_trace(&trace, 0.1).unwrap() == SampleCount::NotReached);
}

fn norm_strategy() -> impl Strategy<Value = Norm> {
    prop_oneof![Just(Norm::Sup), Just(Norm::Euclidean), Just(Norm::L1)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diameter_is_translation_invariant(
        dim in 1usize..=3,
        widths in prop::collection::vec(0.1f64..3.0, 3),
        shift in prop::collection::vec(-10.0f64..10.0, 3),
        radius in 0.1f64..2.0,
        norm in norm_strategy(),
        ball_norm in norm_strategy(),
    ) {
        let lower = vec![0.0; dim];
        let upper: Vec<f64> = widths[..dim].to_vec();
        let rect = Domain::rectangle(lower, upper).unwrap();
        let ball = Domain::ball(vec![0.0; dim], radius, ball_norm).unwrap();
        for domain in [rect, ball] {
            let a = diameter(&domain, norm).unwrap();
            let b = diameter(&domain.translated(&shift[..dim]), norm).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn certificates_bound_the_error_on_random_tents(
        peak in 0.0f64..1.0,
        slope in 0.05f64..1.0,
        eps in 0.01f64..0.5,
    ) {
        let f = lipcert::TestFunction::new("tent", LIP, move |x: &[f64]| -slope * (x[0] - peak).abs())
            .unwrap()
            .with_exact_lip(slope)
            .unwrap();
        let p = bisection_partition(&Domain::unit_cube(1), Norm::Sup).unwrap();
        let doo = lipcert::cdoo_run(&f, &p, LIP, eps, 10_000).unwrap();
        let ps = ps_run_1d(&f, (0.0, 1.0), LIP, eps, 0.5, 10_000).unwrap();
        for trace in [doo, ps] {
            prop_assert!(!trace.is_empty());
            let v = lipcert::certificate_validity(&trace, 0.0, 1e-9);
            prop_assert!(v.passed, "{:?}", v.first_violation);
            prop_assert!(trace.last().unwrap().xi.unwrap() <= eps);
        }
    }
}
