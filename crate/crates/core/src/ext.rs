//! Extended reals for quantities that outgrow `f64`.
//!
//! Breakpoints and risk values produced by the freeze/track constructions grow
//! like towers of exponentials, so a value is stored as `±exp^level(m)`:
//!
//! * level 0: `m` is the value itself, `|m| <= 1e300`;
//! * level `L >= 1`: the value is `exp` applied `L` times to `m`, with
//!   `ln(1e300) < m <= 1e300`.
//!
//! The mantissa at levels `>= 1` is a double-double, so values such as
//! `exp(2e9)` keep roughly 1e-23 relative precision. Every value has exactly
//! one canonical representation; structural equality is value equality.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const BIG: f64 = 1e300;
const LN_BIG: f64 = 690.775_527_898_213_7;

/// Highest tower level; `exp` beyond it saturates to [`ExtReal::INFINITY`].
pub const MAX_LEVEL: u8 = 250;

/// Unnormalised double-double: `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const fn new(hi: f64) -> Self {
        Dd { hi, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let e = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: e }
    }

    fn quick_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        Dd {
            hi: s,
            lo: b - (s - a),
        }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Dd {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn add(self, o: Dd) -> Self {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let r = Dd::quick_two_sum(s.hi, s.lo + t.hi);
        Dd::quick_two_sum(r.hi, r.lo + t.lo)
    }

    fn add_f64(self, b: f64) -> Self {
        let s = Dd::two_sum(self.hi, b);
        Dd::quick_two_sum(s.hi, s.lo + self.lo)
    }

    fn neg(self) -> Self {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn sub(self, o: Dd) -> Self {
        self.add(o.neg())
    }

    fn mul_f64(self, b: f64) -> Self {
        let p = Dd::two_prod(self.hi, b);
        Dd::quick_two_sum(p.hi, p.lo + self.lo * b)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn cmp(self, o: Dd) -> Ordering {
        self.hi.total_cmp(&o.hi).then(self.lo.total_cmp(&o.lo))
    }

    /// `ln(self)` for `self >= 1e300`; only used when promoting a level.
    fn ln_big(self) -> Self {
        Dd::new(self.hi.ln()).add_f64(self.lo / self.hi)
    }

    /// `exp(self)` for `self <= ln(1e300)`; only used when demoting a level.
    fn exp_small(self) -> f64 {
        self.hi.exp() * (1.0 + self.lo)
    }
}

/// Signed extended real, see the module docs.
#[derive(Clone, Copy)]
pub struct ExtReal {
    level: u8,
    neg: bool,
    m: Dd,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::lin(0.0);
    pub const ONE: ExtReal = ExtReal::lin(1.0);
    /// Sentinel for `inf` of an empty-below set, e.g. a generalized inverse
    /// below the range of a function.
    pub const NEG_INFINITY: ExtReal = ExtReal::lin(f64::NEG_INFINITY);
    /// Saturation value above every representable tower.
    pub const INFINITY: ExtReal = ExtReal::lin(f64::INFINITY);

    const fn lin(v: f64) -> Self {
        ExtReal {
            level: 0,
            neg: false,
            m: Dd::new(v),
        }
    }

    pub fn from_f64(v: f64) -> Self {
        assert!(!v.is_nan(), "ExtReal cannot hold NaN");
        Self::normalize(0, false, Dd::new(v))
    }

    /// `exp^level(m)`, mainly for tests and closed-form sequences.
    pub fn tower(level: u8, m: f64) -> Self {
        assert!(m.is_finite());
        Self::normalize(level, false, Dd::new(m))
    }

    fn normalize(mut level: u8, mut neg: bool, mut m: Dd) -> Self {
        loop {
            if level == 0 {
                let v = m.to_f64();
                if v.is_finite() && v.abs() > BIG {
                    neg = v < 0.0;
                    m = Dd::new(v.abs().ln());
                    level = 1;
                    continue;
                }
                // -0.0 folds into 0.0 so the encoding stays canonical.
                let v = if v == 0.0 { 0.0 } else { v };
                return ExtReal::lin(v);
            }
            if m.hi > BIG {
                if level == MAX_LEVEL || !m.hi.is_finite() {
                    return if neg {
                        ExtReal::NEG_INFINITY
                    } else {
                        ExtReal::INFINITY
                    };
                }
                m = m.ln_big();
                level += 1;
                continue;
            }
            if m.hi <= LN_BIG {
                let down = m.exp_small();
                level -= 1;
                if level == 0 {
                    return Self::normalize(0, false, Dd::new(if neg { -down } else { down }));
                }
                m = Dd::new(down);
                continue;
            }
            return ExtReal { level, neg, m };
        }
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    /// Exact value when it fits in the linear range.
    pub fn to_f64(&self) -> Option<f64> {
        (self.level == 0 && self.m.hi.is_finite()).then_some(self.m.hi)
    }

    /// Like [`to_f64`](Self::to_f64) but maps out-of-range values to `±inf`.
    pub fn to_f64_saturating(&self) -> f64 {
        match self.level {
            0 => self.m.hi,
            _ if self.neg => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.level > 0 || self.m.hi.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.level == 0 && self.m.hi == 0.0
    }

    pub fn is_negative(&self) -> bool {
        if self.level == 0 {
            self.m.hi < 0.0
        } else {
            self.neg
        }
    }

    pub fn is_neg_infinity(&self) -> bool {
        self.level == 0 && self.m.hi == f64::NEG_INFINITY
    }

    pub fn abs(&self) -> Self {
        if self.level == 0 {
            ExtReal::lin(self.m.hi.abs())
        } else {
            ExtReal {
                neg: false,
                ..*self
            }
        }
    }

    pub fn neg(&self) -> Self {
        if self.level == 0 {
            Self::from_f64(-self.m.hi)
        } else {
            ExtReal {
                neg: !self.neg,
                ..*self
            }
        }
    }

    fn sign_class(&self) -> i8 {
        if self.level == 0 {
            let v = self.m.hi;
            if v == f64::NEG_INFINITY {
                -2
            } else if v == f64::INFINITY {
                2
            } else if v < 0.0 {
                -1
            } else if v == 0.0 {
                0
            } else {
                1
            }
        } else if self.neg {
            -1
        } else {
            1
        }
    }

    fn cmp_mag(a: &Self, b: &Self) -> Ordering {
        a.level.cmp(&b.level).then_with(|| {
            if a.level == 0 {
                a.m.hi.abs().total_cmp(&b.m.hi.abs())
            } else {
                a.m.cmp(b.m)
            }
        })
    }

    // |a| >= |b|, both finite.
    fn mag_add(a: &Self, b: &Self) -> Self {
        match a.level {
            0 => Self::normalize(0, false, Dd::new(a.m.hi.abs() + b.m.hi.abs())),
            1 => {
                let d = match b.level {
                    0 if b.m.hi == 0.0 => return a.abs(),
                    0 => b.m.hi.abs().ln() - a.m.hi - a.m.lo,
                    _ => b.m.sub(a.m).to_f64(),
                };
                Self::normalize(1, false, a.m.add_f64(d.exp().ln_1p()))
            }
            _ => a.abs(),
        }
    }

    // |a| >= |b|, both finite.
    fn mag_sub(a: &Self, b: &Self) -> Self {
        if Self::cmp_mag(a, b) == Ordering::Equal {
            return ExtReal::ZERO;
        }
        match a.level {
            0 => Self::normalize(0, false, Dd::new(a.m.hi.abs() - b.m.hi.abs())),
            1 => {
                let d = match b.level {
                    0 if b.m.hi == 0.0 => return a.abs(),
                    0 => b.m.hi.abs().ln() - a.m.hi - a.m.lo,
                    _ => b.m.sub(a.m).to_f64(),
                };
                if d >= 0.0 {
                    return ExtReal::ZERO;
                }
                Self::normalize(1, false, a.m.add_f64((-d.exp_m1()).ln()))
            }
            _ => a.abs(),
        }
    }

    fn with_sign(v: Self, negative: bool) -> Self {
        if negative {
            v.neg()
        } else {
            v
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        if !self.is_finite() {
            return *self;
        }
        if !o.is_finite() {
            return *o;
        }
        let (sa, sb) = (self.is_negative(), o.is_negative());
        let (big, small, big_neg) = if Self::cmp_mag(self, o) == Ordering::Less {
            (o, self, sb)
        } else {
            (self, o, sa)
        };
        if sa == sb {
            Self::with_sign(Self::mag_add(big, small), big_neg)
        } else {
            Self::with_sign(Self::mag_sub(big, small), big_neg)
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Multiplication by a positive finite constant.
    pub fn scale(&self, c: f64) -> Self {
        debug_assert!(c > 0.0 && c.is_finite());
        if c == 1.0 || !self.is_finite() {
            return *self;
        }
        match self.level {
            0 => {
                let v = self.m.hi * c;
                if v.is_finite() && v.abs() <= BIG {
                    Self::from_f64(v)
                } else {
                    let m = Dd::two_sum(self.m.hi.abs().ln(), c.ln());
                    Self::normalize(1, self.m.hi < 0.0, m)
                }
            }
            1 => Self::normalize(1, self.neg, self.m.add_f64(c.ln())),
            _ => *self,
        }
    }

    /// `self^p` for `self >= 0`, `p > 0`.
    pub fn powf(&self, p: f64) -> Self {
        debug_assert!(!self.is_negative() && p > 0.0);
        if p == 1.0 || !self.is_finite() {
            return *self;
        }
        match self.level {
            0 => {
                let v = self.m.hi;
                if v == 0.0 {
                    return ExtReal::ZERO;
                }
                let r = v.powf(p);
                if r.is_finite() && r <= BIG {
                    Self::from_f64(r)
                } else {
                    Self::normalize(1, false, Dd::two_prod(v.ln(), p))
                }
            }
            1 => Self::normalize(1, false, self.m.mul_f64(p)),
            2 => Self::normalize(2, false, self.m.add_f64(p.ln())),
            _ => *self,
        }
    }

    /// Natural log of a non-negative value; `ln 0 = -inf`.
    pub fn ln(&self) -> Self {
        debug_assert!(!self.is_negative(), "ln of negative ExtReal");
        match self.level {
            0 => Self::from_f64(self.m.hi.ln()),
            l => Self::normalize(l - 1, false, self.m),
        }
    }

    pub fn ln_1p(&self) -> Self {
        match self.level {
            0 => Self::from_f64(self.m.hi.ln_1p()),
            _ => self.ln(),
        }
    }

    pub fn exp(&self) -> Self {
        match self.level {
            0 => {
                let v = self.m.hi;
                if v <= LN_BIG {
                    Self::from_f64(v.exp())
                } else if v.is_finite() {
                    Self::normalize(1, false, Dd::new(v))
                } else {
                    ExtReal::INFINITY
                }
            }
            _ if self.neg => ExtReal::ZERO,
            l if l == MAX_LEVEL => ExtReal::INFINITY,
            l => Self::normalize(l + 1, false, self.m),
        }
    }

    pub fn exp_m1(&self) -> Self {
        match self.level {
            0 if self.m.hi <= LN_BIG => Self::from_f64(self.m.hi.exp_m1()),
            _ => self.exp().sub(&ExtReal::ONE),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return ExtReal::ZERO;
        }
        let negative = self.is_negative() != o.is_negative();
        let (a, b) = (self.abs(), o.abs());
        let r = match (a.level, b.level) {
            (0, 0) => {
                let p = a.m.hi * b.m.hi;
                if p.is_finite() && p <= BIG {
                    Self::from_f64(p)
                } else {
                    Self::normalize(1, false, Dd::two_sum(a.m.hi.ln(), b.m.hi.ln()))
                }
            }
            (0, _) => b.scale(a.m.hi),
            (_, 0) => a.scale(b.m.hi),
            (1, 1) => Self::normalize(1, false, a.m.add(b.m)),
            _ => a.ln().add(&b.ln()).exp(),
        };
        Self::with_sign(r, negative)
    }

    /// `ln(a / b)` for positive `a`, `b`, keeping double-double precision
    /// when both sit on level 1.
    pub fn ln_ratio(a: &Self, b: &Self) -> Self {
        if a.level == 1 && b.level == 1 {
            return Self::from_f64(a.m.sub(b.m).to_f64());
        }
        if a.level == 0 && b.level == 0 {
            let q = a.m.hi / b.m.hi;
            if q.is_normal() {
                return Self::from_f64(q.ln());
            }
        }
        a.ln().sub(&b.ln())
    }

    /// Relative difference `|self - o| / max(1, |o|)` as a plain real.
    pub fn rel_diff(&self, o: &Self) -> f64 {
        if self == o {
            return 0.0;
        }
        if let (Some(a), Some(b)) = (self.to_f64(), o.to_f64()) {
            return (a - b).abs() / b.abs().max(1.0);
        }
        let diff = self.sub(o).abs();
        let den = o.abs().max(ExtReal::ONE);
        Self::ln_ratio(&diff, &den).exp().to_f64_saturating()
    }

    /// Relative granularity of this representation: `eps` on level 0,
    /// mantissa resolution on level 1, unbounded above that.
    pub fn resolution(&self) -> f64 {
        match self.level {
            0 => f64::EPSILON,
            1 => self.m.hi.abs() * 2f64.powi(-104),
            _ => f64::INFINITY,
        }
    }

    /// Least canonical value above `self` (mantissa low word ignored).
    pub fn next_up(&self) -> Self {
        if !self.is_finite() {
            return *self;
        }
        let k = self.ordinal();
        let base = ExtReal::from_ordinal(k);
        if base > *self {
            base
        } else {
            ExtReal::from_ordinal(k + 1)
        }
    }

    /// Least canonical value (plain `f64` mantissa) at or above `self`.
    pub fn ceil_canonical(&self) -> Self {
        if !self.is_finite() {
            return *self;
        }
        let k = self.ordinal();
        let base = ExtReal::from_ordinal(k);
        if base >= *self {
            base
        } else {
            ExtReal::from_ordinal(k + 1)
        }
    }

    /// Greatest canonical value below `self` (mantissa low word ignored).
    pub fn next_down(&self) -> Self {
        if !self.is_finite() {
            return *self;
        }
        let k = self.ordinal();
        let base = ExtReal::from_ordinal(k);
        if base < *self {
            base
        } else {
            ExtReal::from_ordinal(k - 1)
        }
    }

    /// `ln(value)` as `f64` when representable.
    pub fn log_f64(&self) -> Option<f64> {
        if self.is_negative() {
            return None;
        }
        self.ln().to_f64().or(if self.is_zero() {
            Some(f64::NEG_INFINITY)
        } else {
            None
        })
    }

    /// `ln(ln(value))` as `f64` when representable.
    pub fn loglog_f64(&self) -> Option<f64> {
        let l = self.ln();
        if l.is_negative() || l.is_neg_infinity() {
            return None;
        }
        l.log_f64()
    }

    /// Order-preserving integer key over the canonical encodings (mantissa
    /// low word dropped). Consecutive integers are adjacent representable
    /// values, which makes bisection and geometric grids level-agnostic.
    pub fn ordinal(&self) -> i128 {
        let (b, c) = ordinal_bounds();
        let mag = if self.level == 0 {
            let v = self.m.hi.abs();
            if v.is_infinite() {
                b + 1 + MAX_LEVEL as i128 * (b - c + 1)
            } else {
                v.to_bits() as i128
            }
        } else {
            b + 1 + (self.level as i128 - 1) * (b - c + 1) + (self.m.hi.to_bits() as i128 - c)
        };
        if self.is_negative() {
            -mag
        } else {
            mag
        }
    }

    /// Inverse of [`ordinal`](Self::ordinal); out-of-range keys saturate.
    pub fn from_ordinal(k: i128) -> Self {
        let (b, c) = ordinal_bounds();
        let w = b - c + 1;
        let mag = k.unsigned_abs() as i128;
        let v = if mag >= b + 1 + MAX_LEVEL as i128 * w {
            ExtReal::INFINITY
        } else if mag <= b {
            ExtReal::lin(f64::from_bits(mag as u64))
        } else {
            let r = mag - b - 1;
            let level = (r / w) as u8 + 1;
            let m = f64::from_bits((c + r % w) as u64);
            ExtReal {
                level,
                neg: false,
                m: Dd::new(m),
            }
        };
        if k < 0 {
            v.neg()
        } else {
            v
        }
    }
}

// Bit patterns of the largest linear value and of the smallest level >= 1
// mantissa.
fn ordinal_bounds() -> (i128, i128) {
    (BIG.to_bits() as i128, LN_BIG.next_up().to_bits() as i128)
}

impl PartialEq for ExtReal {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, o: &Self) -> Ordering {
        let (sa, sb) = (self.sign_class(), o.sign_class());
        if sa != sb {
            return sa.cmp(&sb);
        }
        match sa {
            1 => Self::cmp_mag(self, o),
            -1 => Self::cmp_mag(o, self),
            _ => Ordering::Equal,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v)
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `1806.0`, `-inf`, `e^2007.5`, `e^e^(700.25,1.5e-14)`.
impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            return write!(f, "{:?}", self.m.hi);
        }
        if self.neg {
            f.write_str("-")?;
        }
        for _ in 0..self.level {
            f.write_str("e^")?;
        }
        if self.m.lo == 0.0 {
            write!(f, "{:?}", self.m.hi)
        } else {
            write!(f, "({:?},{:?})", self.m.hi, self.m.lo)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid extended real `{0}`")]
pub struct ParseExtRealError(String);

impl FromStr for ExtReal {
    type Err = ParseExtRealError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseExtRealError(s.to_string());
        let t = s.trim();
        if !t.contains("e^") {
            let v: f64 = t.parse().map_err(|_| err())?;
            if v.is_nan() {
                return Err(err());
            }
            return Ok(ExtReal::from_f64(v));
        }
        let (neg, mut rest) = match t.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, t),
        };
        let mut level: u8 = 0;
        while let Some(r) = rest.strip_prefix("e^") {
            level = level
                .checked_add(1)
                .filter(|l| *l <= MAX_LEVEL)
                .ok_or_else(err)?;
            rest = r;
        }
        let m = if let Some(inner) = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            let (hi, lo) = inner.split_once(',').ok_or_else(err)?;
            Dd {
                hi: hi.trim().parse().map_err(|_| err())?,
                lo: lo.trim().parse().map_err(|_| err())?,
            }
        } else {
            Dd::new(rest.parse().map_err(|_| err())?)
        };
        if !m.hi.is_finite() || !m.lo.is_finite() {
            return Err(err());
        }
        Ok(ExtReal::normalize(level, neg, m))
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x(v: f64) -> ExtReal {
        ExtReal::from_f64(v)
    }

    #[test]
    fn linear_arithmetic_matches_f64() {
        assert_eq!(x(2.5).add(&x(1.0)), x(3.5));
        assert_eq!(x(2.5).sub(&x(4.0)), x(-1.5));
        assert_eq!(x(3.0).scale(2.0), x(6.0));
        assert_eq!(x(9.0).powf(0.5), x(3.0));
        assert_eq!(x(-0.0), ExtReal::ZERO);
    }

    #[test]
    fn overflow_promotes_to_log_level() {
        let a = x(1e300).scale(1e10);
        assert_eq!(a.level(), 1);
        assert!((a.log_f64().unwrap() - 310.0 * 10f64.ln()).abs() < 1e-12);
        let b = x(1e200).mul(&x(1e200));
        assert_eq!(b.level(), 1);
        assert!((b.log_f64().unwrap() - 400.0 * 10f64.ln()).abs() < 1e-10);
        assert_eq!(x(800.0).exp().log_f64(), Some(800.0));
    }

    #[test]
    fn exp_ln_round_trip_is_exact_above_linear_range() {
        let a = ExtReal::tower(1, 2.0e9);
        assert_eq!(a.exp().ln(), a);
        let b = ExtReal::tower(3, 1234.5);
        assert_eq!(b.ln().exp(), b);
        assert_eq!(b.ln().ln().ln().to_f64(), Some(1234.5));
    }

    #[test]
    fn demotion_returns_to_linear() {
        let a = ExtReal::tower(1, 1000.0);
        let b = a.scale((-400.0f64).exp());
        assert_eq!(b.level(), 0);
        assert!((b.to_f64().unwrap().ln() - 600.0).abs() < 1e-12);
    }

    #[test]
    fn subtraction_on_level_one_keeps_relative_precision() {
        let r = ExtReal::tower(1, 2.0e9);
        let d = ExtReal::tower(1, 2.0e9 - 0.5);
        let back = d.add(&r.sub(&d));
        assert!(back.rel_diff(&r) < 1e-20, "{}", back.rel_diff(&r));
    }

    #[test]
    fn high_levels_absorb_smaller_terms() {
        let big = ExtReal::tower(2, 800.0);
        let small = ExtReal::tower(1, 5e299);
        assert_eq!(big.add(&small), big);
        assert_eq!(big.sub(&small), big);
        assert_eq!(big.sub(&big), ExtReal::ZERO);
        assert_eq!(big.rel_diff(&big), 0.0);
        assert!(big.rel_diff(&ExtReal::tower(2, 800.000001)) >= 1.0 - 1e-12);
    }

    #[test]
    fn ordering_across_levels_and_signs() {
        let mut v = [
            ExtReal::tower(2, 700.0),
            x(5.0),
            ExtReal::NEG_INFINITY,
            ExtReal::tower(1, 700.0).neg(),
            ExtReal::tower(1, 700.0),
            ExtReal::ZERO,
            x(-3.0),
            ExtReal::INFINITY,
        ];
        v.sort();
        let shown: Vec<String> = v.iter().map(|e| e.to_string()).collect();
        assert_eq!(
            shown,
            [
                "-inf",
                "-e^700.0",
                "-3.0",
                "0.0",
                "5.0",
                "e^700.0",
                "e^e^700.0",
                "inf"
            ]
        );
    }

    #[test]
    fn display_and_parse() {
        for s in ["1806.0", "-inf", "e^2007.5", "-e^e^700.25", "1e300"] {
            assert_eq!(s.parse::<ExtReal>().unwrap().to_string(), s);
        }
        let dd = ExtReal::tower(1, 2.0e9).add(&ExtReal::tower(1, 2.0e9 - 30.0));
        assert_eq!(dd.to_string().parse::<ExtReal>().unwrap(), dd);
        assert!("e^".parse::<ExtReal>().is_err());
        assert!("NaN".parse::<ExtReal>().is_err());
    }

    #[test]
    fn saturation_at_max_level() {
        let top = ExtReal::tower(MAX_LEVEL, 800.0);
        assert_eq!(top.exp(), ExtReal::INFINITY);
        assert!(!top.exp().is_finite());
    }

    proptest! {
        #[test]
        fn order_agrees_with_f64(a in -1e300f64..1e300, b in -1e300f64..1e300) {
            prop_assert_eq!(x(a).cmp(&x(b)), a.total_cmp(&b));
        }

        #[test]
        fn add_then_sub_recovers(a in 700.0f64..1e12, b in 700.0f64..1e12) {
            let (p, q) = (ExtReal::tower(1, a), ExtReal::tower(1, b));
            let s = p.add(&q);
            prop_assert!(s >= p.max(q));
            let back = s.sub(&q);
            let tol = 1e-12f64.max(64.0 * s.resolution());
            prop_assert!(back.rel_diff(&p) <= tol * (1.0 + (q.ln().to_f64().unwrap() - p.ln().to_f64().unwrap()).exp()));
        }

        #[test]
        fn ordinal_is_monotone_and_invertible(level in 0u8..5, m in 1.0f64..1e300, neg in any::<bool>()) {
            let v = ExtReal::tower(level, m);
            let v = if neg { v.neg() } else { v };
            prop_assert_eq!(ExtReal::from_ordinal(v.ordinal()), v);
            let up = ExtReal::from_ordinal(v.ordinal() + 1);
            prop_assert!(up > v);
        }

        #[test]
        fn serialization_round_trip(level in 0u8..4, m in 691.0f64..1e300) {
            let v = ExtReal::tower(level, m);
            let s = serde_json::to_string(&v).unwrap();
            let back: ExtReal = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, v);
        }
    }
}
