//! Target distributions `F` and heaviness gauges `g`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::risk::RiskFunction;

fn check_param(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Piecewise-linear table of `(x, y)` nodes, extrapolated with the last slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Table {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let t = Table { x, y };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(format!("table: {m}")));
        if self.x.len() != self.y.len() {
            return bad("x and y lengths differ".into());
        }
        if self.x.len() < 2 {
            return bad("needs at least two nodes".into());
        }
        if self.x.iter().chain(&self.y).any(|v| !v.is_finite()) {
            return bad("non-finite node".into());
        }
        if self.y[0] < 0.0 {
            return bad("negative value".into());
        }
        for i in 1..self.x.len() {
            if self.x[i] <= self.x[i - 1] {
                return bad(format!("x not strictly increasing at node {i}"));
            }
            if self.y[i] < self.y[i - 1] {
                return bad(format!("values decrease at node {i}"));
            }
        }
        if self.slope() <= 0.0 {
            return bad("last segment must increase so the function is unbounded".into());
        }
        Ok(())
    }

    fn slope(&self) -> f64 {
        let n = self.x.len();
        (self.y[n - 1] - self.y[n - 2]) / (self.x[n - 1] - self.x[n - 2])
    }

    /// Value at `x >= x[0]`.
    fn eval(&self, x: &ExtReal) -> ExtReal {
        let n = self.x.len();
        let last = self.x[n - 1];
        match x.to_f64() {
            Some(v) if v <= last => {
                let i = self.x.partition_point(|&xi| xi < v);
                if i == 0 || self.x[i] == v {
                    return ExtReal::from_f64(self.y[i]);
                }
                let t = (v - self.x[i - 1]) / (self.x[i] - self.x[i - 1]);
                ExtReal::from_f64(self.y[i - 1] + t * (self.y[i] - self.y[i - 1]))
            }
            _ => x
                .sub(&ExtReal::from_f64(last))
                .scale(self.slope())
                .add(&ExtReal::from_f64(self.y[n - 1])),
        }
    }

    /// `inf{x >= x[0] : value(x) >= y}`.
    fn inverse(&self, y: &ExtReal) -> ExtReal {
        let n = self.x.len();
        let top = self.y[n - 1];
        match y.to_f64() {
            Some(v) if v <= top => {
                let i = self.y.partition_point(|&yi| yi < v);
                if i == 0 {
                    return ExtReal::from_f64(self.x[0]);
                }
                let t = (v - self.y[i - 1]) / (self.y[i] - self.y[i - 1]);
                ExtReal::from_f64(self.x[i - 1] + t * (self.x[i] - self.x[i - 1]))
            }
            _ => y
                .sub(&ExtReal::from_f64(top))
                .scale(1.0 / self.slope())
                .add(&ExtReal::from_f64(self.x[n - 1])),
        }
    }
}

/// A right-unbounded target distribution described by its risk function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TargetDistribution {
    /// Tail `exp(-alpha x)`.
    Exponential { alpha: f64 },
    /// Tail `(1 + x)^-alpha`.
    Polynomial { alpha: f64 },
    /// Tail `exp(-x^alpha)`.
    Weibull { alpha: f64 },
    /// Risk interpolated linearly between `(x, R(x))` nodes. A first node
    /// with positive risk is an atom at `x[0]`.
    Tabulated { risk: Table },
}

impl TargetDistribution {
    pub fn exponential(alpha: f64) -> Result<Self> {
        check_param("alpha", alpha)?;
        Ok(Self::Exponential { alpha })
    }

    pub fn polynomial(alpha: f64) -> Result<Self> {
        check_param("alpha", alpha)?;
        Ok(Self::Polynomial { alpha })
    }

    pub fn weibull(alpha: f64) -> Result<Self> {
        check_param("alpha", alpha)?;
        Ok(Self::Weibull { alpha })
    }

    pub fn tabulated(x: Vec<f64>, risk: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated {
            risk: Table::new(x, risk)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Exponential { alpha } | Self::Polynomial { alpha } | Self::Weibull { alpha } => {
                check_param("alpha", *alpha)
            }
            Self::Tabulated { risk } => risk.validate(),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exponential",
            Self::Polynomial { .. } => "polynomial",
            Self::Weibull { .. } => "weibull",
            Self::Tabulated { .. } => "tabulated",
        }
    }

    /// Left end of the support; the risk vanishes below it.
    pub fn support_start(&self) -> f64 {
        match self {
            Self::Tabulated { risk } => risk.x[0],
            _ => 0.0,
        }
    }

    pub fn risk(&self, x: &ExtReal) -> ExtReal {
        if *x < ExtReal::from_f64(self.support_start()) {
            return ExtReal::ZERO;
        }
        match self {
            Self::Exponential { alpha } => x.scale(*alpha),
            Self::Polynomial { alpha } => x.ln_1p().scale(*alpha),
            Self::Weibull { alpha } => x.powf(*alpha),
            Self::Tabulated { risk } => risk.eval(x),
        }
    }

    pub fn risk_f64(&self, x: f64) -> f64 {
        self.risk(&ExtReal::from_f64(x)).to_f64_saturating()
    }

    /// Generalized inverse `inf{x : R(x) >= r}`; `-inf` for `r <= 0`.
    pub fn inverse_risk(&self, r: &ExtReal) -> ExtReal {
        if *r <= ExtReal::ZERO {
            return ExtReal::NEG_INFINITY;
        }
        match self {
            Self::Exponential { alpha } => r.scale(1.0 / alpha),
            Self::Polynomial { alpha } => r.scale(1.0 / alpha).exp_m1(),
            Self::Weibull { alpha } => r.powf(1.0 / alpha),
            Self::Tabulated { risk } => risk.inverse(r),
        }
    }

    pub fn tail(&self, x: f64) -> f64 {
        (-self.risk_f64(x)).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        -(-self.risk_f64(x)).exp_m1()
    }

    /// `inf{x : F(x) >= u}` for `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<ExtReal> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile level {u} outside (0, 1)"
            )));
        }
        Ok(self.inverse_risk(&ExtReal::from_f64(-(-u).ln_1p())))
    }
}

/// A non-negative, non-decreasing, unbounded gauge `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GrowthFunction {
    /// `x^beta` on `x >= 0`, zero below.
    Power { beta: f64 },
    /// `exp(beta x)`.
    Exp { beta: f64 },
    /// `exp((x+)^beta)`.
    ExpPower { beta: f64 },
    /// `max(x, 0)`.
    IdentityPlus,
    /// Constant `g[0]` below `x[0]`, linear between nodes.
    Tabulated { g: Table },
}

impl GrowthFunction {
    pub fn power(beta: f64) -> Result<Self> {
        check_param("beta", beta)?;
        Ok(Self::Power { beta })
    }

    pub fn exp(beta: f64) -> Result<Self> {
        check_param("beta", beta)?;
        Ok(Self::Exp { beta })
    }

    pub fn exp_power(beta: f64) -> Result<Self> {
        check_param("beta", beta)?;
        Ok(Self::ExpPower { beta })
    }

    pub fn tabulated(x: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated {
            g: Table::new(x, g)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Power { beta } | Self::Exp { beta } | Self::ExpPower { beta } => {
                check_param("beta", *beta)
            }
            Self::IdentityPlus => Ok(()),
            Self::Tabulated { g } => g.validate(),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Power { .. } => "power",
            Self::Exp { .. } => "exp",
            Self::ExpPower { .. } => "exp_power",
            Self::IdentityPlus => "identity_plus",
            Self::Tabulated { .. } => "tabulated",
        }
    }

    pub fn eval(&self, x: &ExtReal) -> ExtReal {
        let pos = (*x).max(ExtReal::ZERO);
        match self {
            Self::Power { beta } => pos.powf(*beta),
            Self::Exp { beta } => x.scale(*beta).exp(),
            Self::ExpPower { beta } => pos.powf(*beta).exp(),
            Self::IdentityPlus => pos,
            Self::Tabulated { g } => {
                if *x <= ExtReal::from_f64(g.x[0]) {
                    ExtReal::from_f64(g.y[0])
                } else {
                    g.eval(x)
                }
            }
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.eval(&ExtReal::from_f64(x)).to_f64_saturating()
    }

    /// Generalized inverse `inf{x : g(x) >= t}`, `-inf` when `t` does not
    /// exceed `inf g`.
    pub fn inverse(&self, t: &ExtReal) -> Result<ExtReal> {
        if t.is_negative() {
            return Err(Error::InvalidParameter(format!(
                "gauge inverse of negative level {t}"
            )));
        }
        let below = |floor: f64| *t <= ExtReal::from_f64(floor);
        Ok(match self {
            Self::Power { beta } if !below(0.0) => t.powf(1.0 / beta),
            Self::Exp { beta } if !below(0.0) => t.ln().scale(1.0 / beta),
            Self::ExpPower { beta } if !below(1.0) => t.ln().powf(1.0 / beta),
            Self::IdentityPlus if !below(0.0) => *t,
            Self::Tabulated { g } if !below(g.y[0]) => g.inverse(t),
            _ => ExtReal::NEG_INFINITY,
        })
    }
}

/// Input accepted by [`classify_tail`].
#[derive(Clone, Copy, Debug)]
pub enum TailSource<'a> {
    Target(&'a TargetDistribution),
    Risk(&'a RiskFunction),
}

impl<'a> From<&'a TargetDistribution> for TailSource<'a> {
    fn from(t: &'a TargetDistribution) -> Self {
        TailSource::Target(t)
    }
}

impl<'a> From<&'a RiskFunction> for TailSource<'a> {
    fn from(r: &'a RiskFunction) -> Self {
        TailSource::Risk(r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProbe {
    /// Number of log-spaced risk levels between `1` and `max_risk`.
    pub count: usize,
    pub max_risk: f64,
    /// Heavy evidence once the normalised ratio drops below this.
    pub epsilon: f64,
    /// Light evidence while the normalised ratio stays above this.
    pub margin: f64,
}

impl Default for TailProbe {
    fn default() -> Self {
        TailProbe {
            count: 40,
            max_risk: 1e300,
            epsilon: 0.01,
            margin: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailEvidence {
    Light,
    Heavy,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub evidence: TailEvidence,
    /// `(x, ln(R(x)/x))` at each probe, in increasing `x`.
    pub trace: Vec<(ExtReal, f64)>,
    /// `ln(R(x)/x)` at the reference point `x = R^-1(1)`.
    pub reference: f64,
    /// Smallest normalised log-ratio over all probes.
    pub min_normalized: f64,
    /// Share of probe steps along which the ratio does not increase.
    pub decreasing_share: f64,
    /// Probes dropped because they fell beyond a construction horizon.
    pub clipped: usize,
}

/// Finite-sample evidence on whether `R(x)/x` tends to zero along the tail.
pub fn classify_tail<'a>(src: impl Into<TailSource<'a>>, probe: &TailProbe) -> Result<TailReport> {
    if probe.count < 2 {
        return Err(Error::InvalidParameter(
            "classify_tail needs at least two probes".into(),
        ));
    }
    if !(probe.epsilon > 0.0 && probe.margin > 0.0 && probe.max_risk > 1.0) {
        return Err(Error::InvalidParameter(
            "classify_tail: epsilon, margin must be positive, max_risk > 1".into(),
        ));
    }
    let src = src.into();
    let risk = |x: &ExtReal| -> Result<ExtReal> {
        match src {
            TailSource::Target(t) => Ok(t.risk(x)),
            TailSource::Risk(r) => r.eval(x),
        }
    };
    let inverse = |r: &ExtReal| -> ExtReal {
        match src {
            TailSource::Target(t) => t.inverse_risk(r),
            TailSource::Risk(rf) => rf.inverse(r),
        }
    };

    let step = probe.max_risk.ln() / (probe.count - 1) as f64;
    let mut xs: Vec<ExtReal> = (0..probe.count)
        .map(|j| inverse(&ExtReal::from_f64((j as f64 * step).exp())))
        .collect();
    if let TailSource::Risk(r) = src {
        xs.extend(r.knots());
    }
    let horizon = match src {
        TailSource::Risk(r) => r.horizon(),
        TailSource::Target(_) => None,
    };
    let before = xs.len();
    xs.retain(|x| x.is_finite() && *x > ExtReal::ZERO && horizon.is_none_or(|h| *x <= h));
    let clipped = before - xs.len();
    xs.sort();
    xs.dedup();

    let log_ratio = |x: &ExtReal| -> Result<Option<f64>> {
        let r = risk(x)?;
        if r.is_zero() {
            return Ok(None);
        }
        Ok(Some(ExtReal::ln_ratio(&r, x).to_f64_saturating()))
    };
    let mut trace = Vec::with_capacity(xs.len());
    for x in xs {
        if let Some(l) = log_ratio(&x)? {
            trace.push((x, l));
        }
    }
    if trace.len() < 2 {
        return Err(Error::InvalidParameter(
            "classify_tail: fewer than two usable probes".into(),
        ));
    }
    let x_ref = inverse(&ExtReal::ONE);
    let reference = match log_ratio(&x_ref) {
        Ok(Some(l)) if x_ref > ExtReal::ZERO => l,
        _ => trace[0].1,
    };

    let normalized: Vec<f64> = trace.iter().map(|(_, l)| l - reference).collect();
    let min_normalized = normalized.iter().copied().fold(f64::INFINITY, f64::min);
    let upper_min = normalized[normalized.len() / 2..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let steps = normalized.len() - 1;
    let down = normalized.windows(2).filter(|w| w[1] <= w[0]).count();
    let evidence = if min_normalized < probe.epsilon.ln() {
        TailEvidence::Heavy
    } else if upper_min >= probe.margin.ln() {
        TailEvidence::Light
    } else {
        TailEvidence::Inconclusive
    };
    Ok(TailReport {
        evidence,
        trace,
        reference,
        min_normalized,
        decreasing_share: down as f64 / steps as f64,
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(v: f64) -> ExtReal {
        ExtReal::from_f64(v)
    }

    #[test]
    fn parametric_risks() {
        assert_eq!(
            TargetDistribution::exponential(1.0).unwrap().risk_f64(2.0),
            2.0
        );
        let p = TargetDistribution::polynomial(3.0).unwrap();
        assert!((p.risk_f64(1.0) - 3.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(p.risk_f64(-5.0), 0.0);
        let e2 = TargetDistribution::exponential(2.0).unwrap();
        assert!((e2.tail(1.0) - (-2f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn quantiles() {
        let e = TargetDistribution::exponential(1.0).unwrap();
        assert!((e.quantile(0.5).unwrap().to_f64().unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(e.quantile(1e-300).unwrap().to_f64().unwrap() < 1e-299);
        assert!(e.quantile(1.0).is_err());
        assert!(e.quantile(0.0).is_err());
    }

    #[test]
    fn tabulated_target_with_atom() {
        let t = TargetDistribution::tabulated(vec![1.0, 2.0, 4.0], vec![0.5, 1.0, 3.0]).unwrap();
        assert_eq!(t.risk_f64(0.999), 0.0);
        assert_eq!(t.risk_f64(1.0), 0.5);
        assert_eq!(t.risk_f64(3.0), 2.0);
        assert_eq!(t.risk_f64(6.0), 5.0);
        assert_eq!(t.inverse_risk(&x(0.2)), x(1.0));
        assert_eq!(t.inverse_risk(&x(2.0)), x(3.0));
        assert_eq!(t.inverse_risk(&x(5.0)), x(6.0));
        assert!(TargetDistribution::tabulated(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn gauges() {
        let g = GrowthFunction::exp(0.5).unwrap();
        assert!((g.eval_f64(2.0) - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(g.inverse(&x(1.0)).unwrap(), ExtReal::ZERO);
        assert!(g.inverse(&ExtReal::ZERO).unwrap().is_neg_infinity());
        assert_eq!(GrowthFunction::IdentityPlus.eval_f64(-3.0), 0.0);
        let ep = GrowthFunction::exp_power(0.5).unwrap();
        assert!((ep.eval_f64(4.0) - 2f64.exp()).abs() < 1e-14);
        assert!(ep.inverse(&x(1.0)).unwrap().is_neg_infinity());
        assert_eq!(
            GrowthFunction::power(2.0)
                .unwrap()
                .inverse(&x(9.0))
                .unwrap(),
            x(3.0)
        );
        assert!(GrowthFunction::IdentityPlus.inverse(&x(-1.0)).is_err());
    }

    #[test]
    fn gauge_inverse_handles_towers() {
        let g = GrowthFunction::exp(0.5).unwrap();
        let a = ExtReal::tower(2, 1000.0);
        let back = g.eval(&g.inverse(&a).unwrap());
        assert_eq!(back, a);
    }

    #[test]
    fn tail_classification() {
        let cfg = TailProbe::default();
        for alpha in [1e-3, 1.0, 50.0] {
            let e = TargetDistribution::exponential(alpha).unwrap();
            assert_eq!(
                classify_tail(&e, &cfg).unwrap().evidence,
                TailEvidence::Light
            );
        }
        for t in [
            TargetDistribution::polynomial(3.0).unwrap(),
            TargetDistribution::weibull(0.5).unwrap(),
        ] {
            assert_eq!(
                classify_tail(&t, &cfg).unwrap().evidence,
                TailEvidence::Heavy
            );
        }
        let bad = TailProbe { count: 1, ..cfg };
        assert!(classify_tail(&TargetDistribution::weibull(0.5).unwrap(), &bad).is_err());
    }

    #[test]
    fn serde_names() {
        let t = TargetDistribution::weibull(0.5).unwrap();
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"family":"weibull","alpha":0.5}"#
        );
        let g: GrowthFunction = serde_json::from_str(r#"{"family":"identity_plus"}"#).unwrap();
        assert_eq!(g, GrowthFunction::IdentityPlus);
        let g: GrowthFunction =
            serde_json::from_str(r#"{"family":"exp_power","beta":0.25}"#).unwrap();
        assert_eq!(g.family_name(), "exp_power");
    }
}
