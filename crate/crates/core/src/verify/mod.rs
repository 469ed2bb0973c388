//! Numeric and statistical checks of constructed families.

mod ks;

use itertools::Itertools;
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{certificate_passes, ConstructionPlan, HeavyFamily};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::risk::{RiskFunction, Segment};

pub use ks::{
    cdf_ext, ks_critical, ks_from_cdf, ks_statistic, ks_statistics_ext, ks_test, KsKind,
    KsStatistics, KsTest,
};

/// Largest `-ln(1 - u)` an open-interval `f64` uniform can produce.
pub fn max_sample_risk() -> f64 {
    53.0 * std::f64::consts::LN_2
}

/// Tolerance for comparing a computed risk against `reference`: `1e-12`
/// relative, widened to the representation's own resolution where that is
/// coarser.
pub fn exactness_tolerance(reference: &ExtReal) -> f64 {
    match reference.level() {
        0 | 1 => 1e-12f64.max(16.0 * reference.resolution()),
        _ => 1e-12,
    }
}

/// Samples per component, `columns[i][j]` is draw `j` of component `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix {
    pub seed: u64,
    pub columns: Vec<Vec<ExtReal>>,
}

impl SampleMatrix {
    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-wise minimum over the components in `subset`.
    pub fn min_over(&self, subset: &[usize]) -> Vec<ExtReal> {
        (0..self.len())
            .map(|j| {
                subset
                    .iter()
                    .map(|&i| self.columns[i][j])
                    .min()
                    .expect("non-empty subset")
            })
            .collect()
    }
}

/// Inverse-transform sampling with one ChaCha20 stream per component: all
/// streams share `seed`, component `i` reads stream `i`.
pub fn sample_family(fam: &HeavyFamily, n_samples: usize, seed: u64) -> Result<SampleMatrix> {
    let need = max_sample_risk();
    for (component, r) in fam.risks.iter().enumerate() {
        if let Some(reached) = r.risk_at_horizon() {
            if reached < ExtReal::from_f64(need) {
                return Err(Error::HorizonTooShort {
                    component,
                    reached,
                    required: need,
                });
            }
        }
    }
    let columns = fam
        .risks
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            (0..n_samples)
                .map(|_| {
                    let u: f64 = rng.sample(Open01);
                    r.inverse(&ExtReal::from_f64(-(-u).ln_1p()))
                })
                .collect()
        })
        .collect();
    Ok(SampleMatrix { seed, columns })
}

/// Points at which constructed risks are compared with the target: a few
/// below `a_0`, then per interval both ends, their neighbours and points
/// spread evenly in the order-preserving encoding (geometric within the
/// linear range, then across tower levels).
pub fn evaluation_grid(plan: &ConstructionPlan, total: usize) -> Vec<ExtReal> {
    let spans: Vec<(i128, i128)> = plan
        .breakpoints
        .windows(2)
        .map(|w| (w[0].ordinal(), w[1].ordinal()))
        .collect();
    let counts = allocate(&spans, total);
    let a0 = plan.breakpoints[0];
    let mut grid = vec![a0.sub(&ExtReal::ONE), a0];
    for ((w, &(oa, ob)), &per) in plan.breakpoints.windows(2).zip(&spans).zip(&counts) {
        let (a, b) = (w[0], w[1]);
        grid.extend([a.next_up(), b.next_down(), b]);
        for j in 1..per {
            grid.push(ExtReal::from_ordinal(
                oa + (ob - oa) * j as i128 / per as i128,
            ));
        }
        if let (Some(x), Some(y)) = (a.to_f64(), b.to_f64()) {
            for t in [0.25, 0.5, 0.75] {
                grid.push(ExtReal::from_f64(x + t * (y - x)));
            }
        }
    }
    grid.retain(|x| *x <= *plan.breakpoints.last().expect("a_0 present"));
    grid.sort();
    grid.dedup();
    grid
}

/// Splits `total` points over the intervals, moving the share of intervals
/// with too few representable points to the others.
fn allocate(spans: &[(i128, i128)], total: usize) -> Vec<usize> {
    let cap: Vec<usize> = spans
        .iter()
        .map(|&(a, b)| (b - a).clamp(1, total.max(4) as i128) as usize)
        .collect();
    let mut counts = vec![0usize; spans.len()];
    let mut left = total.max(4 * spans.len());
    loop {
        let open: Vec<usize> = (0..spans.len()).filter(|&i| counts[i] < cap[i]).collect();
        if open.is_empty() || left == 0 {
            break;
        }
        let share = (left / open.len()).max(1);
        for i in open {
            let add = share.min(cap[i] - counts[i]).min(left);
            counts[i] += add;
            left -= add;
        }
    }
    counts
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MinimumCheck {
    /// `sum R_i = R_F`: worst relative error and whether every grid point
    /// was within its tolerance.
    Exact {
        sup_error: f64,
        worst_x: ExtReal,
        passed: bool,
    },
    /// `sum R_i >= R_F`: smallest relative slack `(sum - R_F) / max(1, R_F)`.
    Dominance {
        min_slack: f64,
        worst_x: ExtReal,
        passed: bool,
    },
}

impl MinimumCheck {
    pub fn passed(&self) -> bool {
        match self {
            MinimumCheck::Exact { passed, .. } | MinimumCheck::Dominance { passed, .. } => *passed,
        }
    }
}

fn check_subset(
    fam: &HeavyFamily,
    subset: &[usize],
    size: usize,
    what: &str,
) -> Result<Vec<usize>> {
    if subset.len() != size {
        let hint = if what == "minimum" && subset.len() + 1 == fam.k {
            "; (k-1)-subsets carry the heaviness claim, use divergence_certificate"
        } else {
            ""
        };
        return Err(Error::SubsetSize(format!(
            "{what} check needs a subset of size {size}, got {}{hint}",
            subset.len()
        )));
    }
    let mut s = subset.to_vec();
    s.sort_unstable();
    if s.windows(2).any(|w| w[0] == w[1]) || s.last().is_some_and(|&i| i >= fam.n) {
        return Err(Error::SubsetSize(format!(
            "subset {subset:?} is not a set of components of 0..{}",
            fam.n
        )));
    }
    Ok(s)
}

/// Exactness (`n == k`) or dominance of the subset minimum against `F`.
pub fn check_minimum_distribution(
    fam: &HeavyFamily,
    subset: &[usize],
    grid: &[ExtReal],
) -> Result<MinimumCheck> {
    let subset = check_subset(fam, subset, fam.k, "minimum")?;
    if grid.is_empty() {
        return Err(Error::Empty("evaluation grid"));
    }
    let sum = fam.subset_risk(&subset)?;
    let exact = fam.n == fam.k;
    let mut worst = (f64::INFINITY, grid[0]);
    let mut sup = (0.0f64, grid[0]);
    let mut passed = true;
    for x in grid {
        let s = sum.eval(x)?;
        let f = fam.target.risk(x);
        let diff = s.rel_diff(&f);
        if exact {
            if diff > sup.0 {
                sup = (diff, *x);
            }
            passed &= diff <= exactness_tolerance(&f);
        } else {
            let slack = if s >= f { diff } else { -diff };
            if slack < worst.0 {
                worst = (slack, *x);
            }
        }
    }
    Ok(if exact {
        MinimumCheck::Exact {
            sup_error: sup.0,
            worst_x: sup.1,
            passed,
        }
    } else {
        MinimumCheck::Dominance {
            min_slack: worst.0,
            worst_x: worst.1,
            passed: worst.0 >= -1e-12,
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceBound {
    pub subset: Vec<usize>,
    /// Position `m` of the subset in the freeze cycle.
    pub residue: usize,
    /// Intervals `j < L` with `j = m (mod M)`.
    pub qualifying: usize,
    /// Sum of their certificates: a lower bound on the truncated `E g` of
    /// the subset minimum.
    pub bound: ExtReal,
    pub min_log_certificate: Option<ExtReal>,
    /// Every qualifying certificate is at least `1 - 1e-12`.
    pub certificates_pass: bool,
}

/// Finite-horizon lower bound on `E g(min over subset)` from the
/// certificates of the intervals where `subset` is frozen.
pub fn divergence_certificate(
    fam: &HeavyFamily,
    subset: &[usize],
    l: usize,
) -> Result<DivergenceBound> {
    let plan = fam
        .plan
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("family has no construction plan".into()))?;
    let subset = check_subset(fam, subset, fam.k - 1, "divergence")?;
    if l > plan.intervals() {
        return Err(Error::InvalidParameter(format!(
            "L = {l} exceeds the plan's {} intervals",
            plan.intervals()
        )));
    }
    let residue = plan
        .subsets
        .iter()
        .position(|s| *s == subset)
        .expect("all (k-1)-subsets are enumerated");
    let m = plan.cycle_len();
    let mut bound = ExtReal::ZERO;
    let mut qualifying = 0;
    let mut min_log = None::<ExtReal>;
    let mut pass = true;
    for j in (residue..l).step_by(m) {
        qualifying += 1;
        let c = plan.log_certificates[j];
        pass &= certificate_passes(c.as_ref());
        if let Some(c) = c {
            bound = bound.add(&c.exp());
            min_log = Some(min_log.map_or(c, |v| v.min(c)));
        }
    }
    Ok(DivergenceBound {
        subset,
        residue,
        qualifying,
        bound,
        min_log_certificate: min_log,
        certificates_pass: pass,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Probes {
    /// Right ends of the intervals where the risk is flat and positive.
    FrozenEnds,
    Points(Vec<ExtReal>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HazardPoint {
    pub x: ExtReal,
    /// `ln(R(x) / x)`.
    pub log_ratio: ExtReal,
    /// `R(x) / x` when it is a plain `f64`.
    pub ratio: f64,
    /// Running minimum of `log_ratio`.
    pub running_min: ExtReal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HazardTrace {
    pub points: Vec<HazardPoint>,
    /// Probes dropped for lying beyond the horizon or at `x <= 0`.
    pub clipped: usize,
}

impl HazardTrace {
    pub fn running_min_strictly_decreasing(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].running_min < w[0].running_min)
    }
}

/// Trace of `R(x)/x` at probe points; a running minimum that keeps falling
/// is evidence for a zero `liminf` and hence a heavy tail.
pub fn hazard_ratio_diagnostic(r: &RiskFunction, probes: &Probes) -> Result<HazardTrace> {
    let raw: Vec<ExtReal> = match probes {
        Probes::Points(p) => p.clone(),
        Probes::FrozenEnds => match r {
            RiskFunction::Piecewise(p) => p
                .segments()
                .iter()
                .zip(&p.knots()[1..])
                .filter(|(s, _)| matches!(s, Segment::Flat { value } if !value.is_zero()))
                .map(|(_, a)| *a)
                .collect(),
            _ => {
                return Err(Error::InvalidParameter(
                    "frozen-end probes need a piecewise risk".into(),
                ))
            }
        },
    };
    let horizon = r.horizon();
    let before = raw.len();
    let xs: Vec<ExtReal> = raw
        .into_iter()
        .filter(|x| *x > ExtReal::ZERO && horizon.is_none_or(|h| *x <= h))
        .collect();
    let clipped = before - xs.len();
    if xs.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "hazard diagnostic needs at least two probes inside the horizon, got {}",
            xs.len()
        )));
    }
    let mut points = Vec::with_capacity(xs.len());
    let mut run: Option<ExtReal> = None;
    for x in xs {
        let v = r.eval(&x)?;
        let log_ratio = if v.is_zero() {
            ExtReal::NEG_INFINITY
        } else {
            ExtReal::ln_ratio(&v, &x)
        };
        let running_min = run.map_or(log_ratio, |m| m.min(log_ratio));
        run = Some(running_min);
        points.push(HazardPoint {
            x,
            log_ratio,
            ratio: log_ratio.exp().to_f64_saturating(),
            running_min,
        });
    }
    Ok(HazardTrace { points, clipped })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub grid_points: usize,
    /// Monte Carlo sample size; 0 skips the KS checks.
    pub samples: usize,
    pub seed: u64,
    pub significance: f64,
    /// Interval count for divergence bounds; defaults to the whole plan.
    pub divergence_intervals: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            grid_points: 10_000,
            samples: 0,
            seed: 0,
            significance: 0.01,
            divergence_intervals: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetResult<T> {
    pub subset: Vec<usize>,
    pub result: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n: usize,
    pub k: usize,
    pub grid_points: usize,
    /// Worst relative error of `sum R_i - R_F` (pair-type families only).
    pub exactness_sup_error: Option<f64>,
    pub minimum_checks: Vec<SubsetResult<MinimumCheck>>,
    pub divergence: Vec<DivergenceBound>,
    pub ks: Vec<SubsetResult<KsTest>>,
    pub hazard: Vec<Option<HazardTrace>>,
    pub passed: bool,
}

/// Runs every applicable check of a constructed family.
pub fn verify_family(fam: &HeavyFamily, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let plan = fam
        .plan
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("family has no construction plan".into()))?;
    let grid = evaluation_grid(plan, cfg.grid_points);
    let k_sets: Vec<Vec<usize>> = (0..fam.n).combinations(fam.k).collect();
    let minimum_checks = k_sets
        .par_iter()
        .map(|s| {
            Ok(SubsetResult {
                subset: s.clone(),
                result: check_minimum_distribution(fam, s, &grid)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let exactness_sup_error = (fam.n == fam.k).then(|| match &minimum_checks[0].result {
        MinimumCheck::Exact { sup_error, .. } => *sup_error,
        MinimumCheck::Dominance { .. } => unreachable!("n == k is checked for exactness"),
    });
    let l = cfg.divergence_intervals.unwrap_or(plan.intervals());
    let divergence = plan
        .subsets
        .iter()
        .map(|s| divergence_certificate(fam, s, l))
        .collect::<Result<Vec<_>>>()?;
    let ks = if cfg.samples > 0 {
        let m = sample_family(fam, cfg.samples, cfg.seed)?;
        let kind = if fam.n == fam.k {
            KsKind::TwoSided
        } else {
            KsKind::Lower
        };
        k_sets
            .par_iter()
            .map(|s| {
                let t = ks_test(&m.min_over(s), &fam.target, kind, cfg.significance)?;
                Ok(SubsetResult {
                    subset: s.clone(),
                    result: t,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let hazard = fam
        .risks
        .iter()
        .map(|r| hazard_ratio_diagnostic(r, &Probes::FrozenEnds).ok())
        .collect();
    let passed = minimum_checks.iter().all(|c| c.result.passed())
        && divergence.iter().all(|d| {
            d.certificates_pass && d.bound >= ExtReal::from_f64(d.qualifying as f64 * (1.0 - 1e-12))
        })
        && ks.iter().all(|t| t.result.passed);
    Ok(VerificationReport {
        n: fam.n,
        k: fam.k,
        grid_points: grid.len(),
        exactness_sup_error,
        minimum_checks,
        divergence,
        ks,
        hazard,
        passed,
    })
}
