use heavymin::verify::{ks_critical, ks_statistics_ext};
use heavymin::{
    construct_family, construct_pair, ks_test, sample_family, sqrt_split, ClosedForm, Error,
    ExtReal, GrowthFunction, HeavyFamily, Horizon, KsKind, Policy, RiskFunction,
    TargetDistribution,
};

fn independent(risks: Vec<RiskFunction>, target: TargetDistribution) -> HeavyFamily {
    HeavyFamily {
        n: risks.len(),
        k: risks.len(),
        target,
        risks,
        plan: None,
        notes: Vec::new(),
    }
}

#[test]
fn seeded_sampling_is_reproducible() {
    let fam = construct_pair(
        &TargetDistribution::exponential(1.0).unwrap(),
        &GrowthFunction::exp(0.5).unwrap(),
        Policy::ExactMinimal,
        Horizon::Intervals(12),
    )
    .unwrap();
    let a = sample_family(&fam, 500, 7).unwrap();
    let b = sample_family(&fam, 500, 7).unwrap();
    let c = sample_family(&fam, 500, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.columns, c.columns);
    assert_ne!(a.columns[0], a.columns[1]);
}

#[test]
fn short_horizon_names_required_risk() {
    let fam = construct_pair(
        &TargetDistribution::exponential(1.0).unwrap(),
        &GrowthFunction::exp(0.5).unwrap(),
        Policy::TargetMinimal,
        Horizon::Intervals(3),
    )
    .unwrap();
    match sample_family(&fam, 10, 1).unwrap_err() {
        Error::HorizonTooShort { required, .. } => {
            assert!((required - 53.0 * 2f64.ln()).abs() < 1e-12)
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn self_test_accepts_at_nominal_rate() {
    let f = TargetDistribution::exponential(1.0).unwrap();
    let fam = independent(vec![RiskFunction::of_target(&f)], f.clone());
    let accepted = (0..100u64)
        .filter(|&seed| {
            let m = sample_family(&fam, 10_000, seed).unwrap();
            ks_test(&m.columns[0], &f, KsKind::TwoSided, 0.01)
                .unwrap()
                .passed
        })
        .count();
    assert!(accepted >= 95, "{accepted} of 100");
}

#[test]
fn sum_law_for_independent_minimum() {
    let e1 = TargetDistribution::exponential(1.0).unwrap();
    let e2 = TargetDistribution::exponential(2.0).unwrap();
    let e3 = TargetDistribution::exponential(3.0).unwrap();
    let fam = independent(
        vec![RiskFunction::of_target(&e1), RiskFunction::of_target(&e2)],
        e3.clone(),
    );
    let m = sample_family(&fam, 100_000, 11).unwrap();
    assert!(
        ks_test(&m.min_over(&[0, 1]), &e3, KsKind::TwoSided, 0.01)
            .unwrap()
            .passed
    );
    assert!(
        !ks_test(&m.columns[0], &e3, KsKind::TwoSided, 0.01)
            .unwrap()
            .passed
    );
}

#[test]
fn sqrt_split_components_are_half_rate() {
    let f = TargetDistribution::exponential(1.0).unwrap();
    let fam = sqrt_split(&f, None).unwrap();
    let m = sample_family(&fam, 100_000, 3).unwrap();
    let half = TargetDistribution::exponential(0.5).unwrap();
    assert!(
        ks_test(&m.columns[1], &half, KsKind::TwoSided, 0.01)
            .unwrap()
            .passed
    );
    assert!(
        ks_test(&m.min_over(&[0, 1]), &f, KsKind::TwoSided, 0.01)
            .unwrap()
            .passed
    );
}

#[test]
fn pair_minimum_matches_target_for_closed_forms() {
    for (form, a, b) in [
        (ClosedForm::Exponential, 2.0, 1.0),
        (ClosedForm::Weibull, 0.5, 0.25),
    ] {
        let f = form.target(a).unwrap();
        let fam = construct_pair(
            &f,
            &form.gauge(b).unwrap(),
            Policy::TargetMinimal,
            Horizon::Intervals(32),
        )
        .unwrap();
        let m = sample_family(&fam, 20_000, 5).unwrap();
        let t = ks_test(&m.min_over(&[0, 1]), &f, KsKind::TwoSided, 0.01).unwrap();
        assert!(t.passed, "{form:?}: {t:?}");
        // single components are not distributed as F
        let one = ks_statistics_ext(&m.columns[0], &f).unwrap();
        assert!(one.two_sided > ks_critical(KsKind::TwoSided, 0.01, one.n));
    }
}

#[test]
fn family_minima_dominated() {
    let f = TargetDistribution::exponential(1.0).unwrap();
    let fam = construct_family(
        &f,
        &GrowthFunction::exp(0.5).unwrap(),
        3,
        2,
        Policy::ExactMinimal,
        Horizon::Intervals(30),
    )
    .unwrap();
    let m = sample_family(&fam, 20_000, 9).unwrap();
    for s in [[0, 1], [0, 2], [1, 2]] {
        assert!(
            ks_test(&m.min_over(&s), &f, KsKind::Lower, 0.01)
                .unwrap()
                .passed
        );
    }
    let x = m.min_over(&[0, 1]);
    assert!(x.iter().all(|v| *v >= ExtReal::ZERO));
}
