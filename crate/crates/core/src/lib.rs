//! Heavy-tailed families whose minimum reproduces, or is dominated by, a
//! given target distribution, with numeric checks of every property the
//! constructions promise.
//!
//! ```
//! use heavymin::{construct_pair, GrowthFunction, Horizon, Policy, TargetDistribution};
//!
//! let f = TargetDistribution::exponential(1.0).unwrap();
//! let g = GrowthFunction::exp(0.5).unwrap();
//! let fam = construct_pair(&f, &g, Policy::TargetMinimal, Horizon::Intervals(5)).unwrap();
//! let a: Vec<f64> = fam.plan.unwrap().breakpoints.iter().map(|a| a.to_f64().unwrap()).collect();
//! assert_eq!(a[..4], [0.0, 1.0, 2.0, 6.0]);
//! ```

pub mod construct;
pub mod error;
pub mod ext;
pub mod risk;
pub mod targets;
pub mod verify;

pub use construct::{
    certificate_passes, construct_family, construct_from_breakpoints, construct_pair,
    example_sequence, frozen_subsets, minimal_sequence, sqrt_split, validate_explicit_sequence,
    ClosedForm, ConstructionPlan, HeavyFamily, Horizon, IntervalRule, PlanStatus, Policy,
    PolicyKind, SequenceReport, CERTIFICATE_TOL,
};
pub use error::{Error, Result};
pub use ext::ExtReal;
pub use risk::{
    quantile_from_risk, risk_from_tail, risk_from_tail_table, sum_risks, tail_from_risk,
    PiecewiseRisk, RiskFunction, Segment, TailValue,
};
pub use targets::{
    classify_tail, GrowthFunction, Table, TailEvidence, TailProbe, TailReport, TargetDistribution,
};
pub use verify::{
    check_minimum_distribution, divergence_certificate, evaluation_grid, hazard_ratio_diagnostic,
    ks_statistic, ks_test, sample_family, verify_family, KsKind, KsTest, MinimumCheck, Probes,
    SampleMatrix, VerificationReport, VerifyConfig,
};
