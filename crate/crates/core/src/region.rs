//! Hypothesis regions on a scalar parameter.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{EbfError, Result};
use crate::numerics::dist::Continuous;
use crate::numerics::special::log1mexp;

/// A subset `Θ_H` of a scalar parameter domain.
///
/// Half-lines are closed or open indifferently: every law the engines
/// integrate against is continuous, so the boundary carries no mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HypothesisRegion {
    Point { value: f64 },
    Below { bound: f64 },
    Above { bound: f64 },
    Interval { lower: f64, upper: f64 },
    Full,
}

/// Coarse classification used by the bias rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionKind {
    Point,
    HalfLine,
    Interval,
    Full,
}

impl HypothesisRegion {
    pub fn point(value: f64) -> Result<Self> {
        HypothesisRegion::Point { value }.validated()
    }

    pub fn below(bound: f64) -> Result<Self> {
        HypothesisRegion::Below { bound }.validated()
    }

    pub fn above(bound: f64) -> Result<Self> {
        HypothesisRegion::Above { bound }.validated()
    }

    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        HypothesisRegion::Interval { lower, upper }.validated()
    }

    pub fn full() -> Self {
        HypothesisRegion::Full
    }

    /// Check the structural invariants: finite endpoints and strictly
    /// ordered intervals.
    pub fn validate(&self) -> Result<()> {
        match *self {
            HypothesisRegion::Point { value } if !value.is_finite() => {
                Err(EbfError::domain(format!("point hypothesis needs a finite value, got {value}")))
            }
            HypothesisRegion::Below { bound } | HypothesisRegion::Above { bound } if !bound.is_finite() => {
                Err(EbfError::domain(format!("half-line needs a finite endpoint, got {bound}")))
            }
            HypothesisRegion::Interval { lower, upper } if !(lower.is_finite() && upper.is_finite() && lower < upper) => {
                Err(EbfError::domain(format!(
                    "interval endpoints must be finite and strictly ordered, got [{lower}, {upper}]"
                )))
            }
            _ => Ok(()),
        }
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn kind(&self) -> RegionKind {
        match self {
            HypothesisRegion::Point { .. } => RegionKind::Point,
            HypothesisRegion::Below { .. } | HypothesisRegion::Above { .. } => RegionKind::HalfLine,
            HypothesisRegion::Interval { .. } => RegionKind::Interval,
            HypothesisRegion::Full => RegionKind::Full,
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, HypothesisRegion::Point { .. })
    }

    /// Fraction of the full-line bias that applies to this region for
    /// location families: all of it on the full line, half on a half-line,
    /// none on points and bounded intervals.
    pub fn location_bias_fraction(&self) -> f64 {
        match self.kind() {
            RegionKind::Full => 1.0,
            RegionKind::HalfLine => 0.5,
            RegionKind::Point | RegionKind::Interval => 0.0,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match *self {
            HypothesisRegion::Point { value } => x == value,
            HypothesisRegion::Below { bound } => x < bound,
            HypothesisRegion::Above { bound } => x >= bound,
            HypothesisRegion::Interval { lower, upper } => lower <= x && x <= upper,
            HypothesisRegion::Full => true,
        }
    }

    /// Bounds `(lower, upper)` of a composite region, with infinities for
    /// open ends. Points return the degenerate pair.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            HypothesisRegion::Point { value } => (value, value),
            HypothesisRegion::Below { bound } => (f64::NEG_INFINITY, bound),
            HypothesisRegion::Above { bound } => (bound, f64::INFINITY),
            HypothesisRegion::Interval { lower, upper } => (lower, upper),
            HypothesisRegion::Full => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Map every endpoint through an increasing affine map `x ↦ (x − shift)/scale`.
    pub fn standardize(&self, shift: f64, scale: f64) -> Self {
        let f = |x: f64| (x - shift) / scale;
        match *self {
            HypothesisRegion::Point { value } => HypothesisRegion::Point { value: f(value) },
            HypothesisRegion::Below { bound } => HypothesisRegion::Below { bound: f(bound) },
            HypothesisRegion::Above { bound } => HypothesisRegion::Above { bound: f(bound) },
            HypothesisRegion::Interval { lower, upper } => HypothesisRegion::Interval { lower: f(lower), upper: f(upper) },
            HypothesisRegion::Full => HypothesisRegion::Full,
        }
    }

    /// Intersect with the support `[lo, hi]`, collapsing to `Full` when the
    /// region covers the whole support. Empty intersections are reported
    /// as degenerate regions.
    pub fn clip(&self, lo: f64, hi: f64) -> Result<Self> {
        if self.is_point() {
            let (v, _) = self.bounds();
            if v < lo || v > hi {
                return Err(EbfError::degenerate(format!("point {v} lies outside the support [{lo}, {hi}]")));
            }
            return Ok(*self);
        }
        let (a, b) = self.bounds();
        let (a, b) = (a.max(lo), b.min(hi));
        if !(a < b) {
            return Err(EbfError::degenerate(format!(
                "region {self} has no overlap with the support [{lo}, {hi}]"
            )));
        }
        Ok(match (a <= lo, b >= hi) {
            (true, true) => HypothesisRegion::Full,
            (true, false) => HypothesisRegion::Below { bound: b },
            (false, true) => HypothesisRegion::Above { bound: a },
            (false, false) => HypothesisRegion::Interval { lower: a, upper: b },
        })
    }

    /// `log P(X ∈ H)` for a continuous law. Points have no mass and are
    /// rejected; a mass that underflows is a degenerate region.
    pub fn ln_mass<D: Continuous>(&self, law: &D) -> Result<f64> {
        let value = match *self {
            HypothesisRegion::Point { .. } => {
                return Err(EbfError::domain("a point region carries no probability mass"));
            }
            HypothesisRegion::Full => 0.0,
            HypothesisRegion::Below { bound } => law.ln_cdf(bound),
            HypothesisRegion::Above { bound } => law.ln_sf(bound),
            HypothesisRegion::Interval { lower, upper } => ln_interval_mass(law, lower, upper),
        };
        if value == f64::NEG_INFINITY || value.is_nan() {
            return Err(EbfError::degenerate(format!("region {self} has numerically zero mass")));
        }
        Ok(value.min(0.0))
    }
}

/// `log(F(b) − F(a))`, taking the difference in whichever tail keeps the
/// two terms small so that far-tail intervals keep their digits.
fn ln_interval_mass<D: Continuous>(law: &D, a: f64, b: f64) -> f64 {
    let (lo_a, lo_b) = (law.ln_cdf(a), law.ln_cdf(b));
    let (hi_a, hi_b) = (law.ln_sf(a), law.ln_sf(b));
    if lo_b < hi_a {
        // Mostly in the lower tail: F(b)·(1 − F(a)/F(b)).
        lo_b + log1mexp(lo_b - lo_a)
    } else {
        hi_a + log1mexp(hi_a - hi_b)
    }
}

impl fmt::Display for HypothesisRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            HypothesisRegion::Point { value } => write!(f, "point:{value}"),
            HypothesisRegion::Below { bound } => write!(f, "below:{bound}"),
            HypothesisRegion::Above { bound } => write!(f, "above:{bound}"),
            HypothesisRegion::Interval { lower, upper } => write!(f, "interval:{lower},{upper}"),
            HypothesisRegion::Full => write!(f, "full"),
        }
    }
}

/// Parses `point:V`, `below:B`, `above:B`, `interval:A,B` and `full`.
impl FromStr for HypothesisRegion {
    type Err = EbfError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (tag, rest) = match s.split_once(':') {
            Some((t, r)) => (t.trim().to_ascii_lowercase(), Some(r.trim())),
            None => (s.to_ascii_lowercase(), None),
        };
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| EbfError::domain(format!("cannot parse region endpoint '{v}'")))
        };
        match (tag.as_str(), rest) {
            ("full", None) => Ok(HypothesisRegion::Full),
            ("point", Some(v)) => HypothesisRegion::point(num(v)?),
            ("below", Some(v)) => HypothesisRegion::below(num(v)?),
            ("above", Some(v)) => HypothesisRegion::above(num(v)?),
            ("interval", Some(v)) => {
                let (a, b) = v
                    .split_once(',')
                    .ok_or_else(|| EbfError::domain(format!("interval needs 'a,b', got '{v}'")))?;
                HypothesisRegion::interval(num(a)?, num(b)?)
            }
            _ => Err(EbfError::domain(format!(
                "unrecognised region '{s}'; expected point:V, below:B, above:B, interval:A,B or full"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dist::{Normal, normal_cdf};
    use approx::assert_relative_eq;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["point:0", "below:30", "above:-1.5", "interval:0.2,0.8", "full"] {
            let r: HypothesisRegion = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
            assert_eq!(r.to_string().parse::<HypothesisRegion>().unwrap(), r);
        }
        assert!("interval:1,0".parse::<HypothesisRegion>().is_err());
        assert!("below:inf".parse::<HypothesisRegion>().is_err());
        assert!("side:1".parse::<HypothesisRegion>().is_err());
    }

    #[test]
    fn serde_uses_kind_tag() {
        let r = HypothesisRegion::interval(0.0, 1.0).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"kind":"interval","lower":0.0,"upper":1.0}"#);
        assert_eq!(serde_json::from_str::<HypothesisRegion>(&json).unwrap(), r);
    }

    #[test]
    fn clip_to_unit_interval() {
        let unit = |r: HypothesisRegion| r.clip(0.0, 1.0);
        assert_eq!(unit(HypothesisRegion::Below { bound: 2.0 }).unwrap(), HypothesisRegion::Full);
        assert_eq!(
            unit(HypothesisRegion::Interval { lower: -1.0, upper: 0.5 }).unwrap(),
            HypothesisRegion::Below { bound: 0.5 }
        );
        assert!(unit(HypothesisRegion::Below { bound: 0.0 }).is_err());
        assert!(unit(HypothesisRegion::Point { value: 1.5 }).is_err());
    }

    #[test]
    fn masses_of_normal_law() {
        let n = Normal::new(0.0, 1.0).unwrap();
        assert_eq!(HypothesisRegion::Full.ln_mass(&n).unwrap(), 0.0);
        assert_relative_eq!(HypothesisRegion::Above { bound: 0.0 }.ln_mass(&n).unwrap(), 0.5f64.ln(), epsilon = 1e-15);
        let iv = HypothesisRegion::Interval { lower: -1.0, upper: 2.0 };
        assert_relative_eq!(iv.ln_mass(&n).unwrap().exp(), normal_cdf(2.0) - normal_cdf(-1.0), epsilon = 1e-15);
        // A far-tail interval keeps relative precision.
        let far = HypothesisRegion::Interval { lower: 40.0, upper: 41.0 };
        let m = far.ln_mass(&n).unwrap();
        assert!(m.is_finite() && m < -790.0);
        assert!(HypothesisRegion::Point { value: 0.0 }.ln_mass(&n).is_err());
    }

    #[test]
    fn bias_fractions() {
        assert_eq!(HypothesisRegion::Full.location_bias_fraction(), 1.0);
        assert_eq!(HypothesisRegion::Below { bound: 0.0 }.location_bias_fraction(), 0.5);
        assert_eq!(HypothesisRegion::Interval { lower: 0.0, upper: 1.0 }.location_bias_fraction(), 0.0);
        assert_eq!(HypothesisRegion::Point { value: 0.0 }.location_bias_fraction(), 0.0);
    }
}
