//! Benchmark fixtures shared by the criterion targets.

use heavymin::{
    construct_family, construct_pair, ClosedForm, GrowthFunction, HeavyFamily, Horizon, Policy,
};

/// Pair construction for one closed-form parameter set.
pub fn closed_form_pair(form: ClosedForm, alpha: f64, beta: f64, intervals: usize) -> HeavyFamily {
    let f = form.target(alpha).expect("valid alpha");
    let g = form.gauge(beta).expect("valid beta");
    construct_pair(&f, &g, Policy::TargetMinimal, Horizon::Intervals(intervals))
        .expect("construction")
}

pub fn identity_gauge_pair(intervals: usize) -> HeavyFamily {
    let f = ClosedForm::Exponential.target(1.0).expect("valid alpha");
    construct_pair(
        &f,
        &GrowthFunction::IdentityPlus,
        Policy::TargetMinimal,
        Horizon::Intervals(intervals),
    )
    .expect("construction")
}

pub fn family(n: usize, k: usize, intervals: usize) -> HeavyFamily {
    let f = ClosedForm::Exponential.target(1.0).expect("valid alpha");
    let g = GrowthFunction::exp(0.5).expect("valid beta");
    construct_family(
        &f,
        &g,
        n,
        k,
        Policy::ExactMinimal,
        Horizon::Intervals(intervals),
    )
    .expect("construction")
}
