//! Adaptive Gauss–Kronrod quadrature with domain transforms.
//!
//! Infinite and semi-infinite ranges are mapped onto a bounded θ-interval
//! before subdivision, so the adaptive core only ever sees finite panels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use crate::error::{EbfError, Result};

/// How the integration range is mapped before adaptive subdivision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transform {
    /// Pick from the domain: finite ranges stay as they are, half-lines use
    /// the log map and the full line uses the arctangent map.
    #[default]
    Auto,
    /// Integrate in the original variable; the domain must be bounded.
    Finite,
    /// `x = a ± s·exp(tan θ)` for a half-line anchored at `a`.
    SemiInfiniteLog,
    /// `x = c + s·tan θ` over the whole line, or the matching
    /// sub-interval of θ for a bounded range.
    InfiniteAtan,
}

/// Tolerances and limits for one adaptive integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub absolute_tolerance: f64,
    pub relative_tolerance: f64,
    pub max_subdivisions: usize,
    pub transform: Transform,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            absolute_tolerance: 1e-9,
            relative_tolerance: 1e-8,
            max_subdivisions: 500,
            transform: Transform::Auto,
        }
    }
}

impl QuadratureSpec {
    pub fn new(absolute_tolerance: f64, relative_tolerance: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = QuadratureSpec {
            absolute_tolerance,
            relative_tolerance,
            max_subdivisions,
            transform: Transform::Auto,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_transform(mut self, transform: Transform) -> Self {
        self.transform = transform;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.absolute_tolerance > 0.0) || !(self.relative_tolerance > 0.0) {
            return Err(EbfError::domain("quadrature tolerances must be strictly positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(EbfError::domain("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.absolute_tolerance.max(self.relative_tolerance * value.abs())
    }
}

/// Integration range plus hints for where the integrand lives.
///
/// `center` and `scale` steer the infinite-range maps; they do not change
/// the value of the integral, only how quickly it converges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lower: f64,
    pub upper: f64,
    pub center: f64,
    pub scale: f64,
}

impl Domain {
    pub fn new(lower: f64, upper: f64) -> Self {
        let center = match (lower.is_finite(), upper.is_finite()) {
            (true, true) => 0.5 * (lower + upper),
            (true, false) => lower,
            (false, true) => upper,
            (false, false) => 0.0,
        };
        Domain { lower, upper, center, scale: 1.0 }
    }

    pub fn real_line() -> Self {
        Self::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn with_center(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }
}

/// Outcome of an adaptive integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl QuadResult {
    /// Turn a non-converged result into an error naming `context`.
    pub fn require(self, context: &str, spec: &QuadratureSpec) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(EbfError::NonConvergence {
                context: context.to_string(),
                estimate: self.error,
                tolerance: spec.target(self.value),
            })
        }
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        scaled = res_asc * (200.0 * scaled / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    let error = rescale_error((res_k - res_g) * half, res_abs * scale, res_asc * scale);
    Panel { a, b, value, error }
}

/// Adaptive integration of `f` over a finite interval `[a, b]`.
fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, converged: true, evaluations: 0 };
    }
    let first = kronrod21(f, a, b);
    let mut evaluations = 21;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut panels = 1;
    while error > spec.target(value) && panels < spec.max_subdivisions {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // Panel cannot be split further in floating point.
            heap.push(worst);
            break;
        }
        let left = kronrod21(f, worst.a, mid);
        let right = kronrod21(f, mid, worst.b);
        evaluations += 42;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        panels += 1;
        // Resum periodically so cancellation in the running totals does
        // not drift away from the panel contents.
        if panels % 64 == 0 {
            value = heap.iter().map(|p| p.value).sum();
            error = heap.iter().map(|p| p.error).sum();
        }
    }
    value = heap.iter().map(|p| p.value).sum();
    error = heap.iter().map(|p| p.error).sum();
    let converged = value.is_finite() && error.is_finite() && error <= spec.target(value);
    QuadResult { value, error, converged, evaluations }
}

/// Zero out non-finite products that arise where the transformed weight
/// vanishes at a θ-endpoint.
#[inline]
fn guarded(fx: f64, jac: f64) -> f64 {
    if jac == 0.0 || !jac.is_finite() {
        return 0.0;
    }
    let v = fx * jac;
    if v.is_finite() {
        v
    } else if fx == 0.0 {
        0.0
    } else {
        v
    }
}

/// Integrate `f` over `domain` to the tolerances in `spec`.
///
/// The returned result is flagged non-converged (never silently wrong) when
/// the error estimate is still above tolerance after `max_subdivisions`.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, domain: Domain, spec: &QuadratureSpec) -> QuadResult {
    let Domain { lower, upper, center, scale } = domain;
    if lower.is_nan() || upper.is_nan() || spec.validate().is_err() {
        return QuadResult { value: f64::NAN, error: f64::INFINITY, converged: false, evaluations: 0 };
    }
    if lower == upper {
        return QuadResult { value: 0.0, error: 0.0, converged: true, evaluations: 0 };
    }
    if lower > upper {
        let mut r = integrate_1d(f, Domain { lower: upper, upper: lower, center, scale }, spec);
        r.value = -r.value;
        return r;
    }
    let s = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
    let transform = match spec.transform {
        Transform::Auto => match (lower.is_finite(), upper.is_finite()) {
            (true, true) => Transform::Finite,
            (false, false) => Transform::InfiniteAtan,
            _ => Transform::SemiInfiniteLog,
        },
        t => t,
    };
    match transform {
        Transform::Finite | Transform::Auto => {
            if !(lower.is_finite() && upper.is_finite()) {
                return QuadResult { value: f64::NAN, error: f64::INFINITY, converged: false, evaluations: 0 };
            }
            adaptive(&f, lower, upper, spec)
        }
        Transform::InfiniteAtan => {
            let c = if center.is_finite() { center } else { 0.0 };
            let ta = if lower.is_finite() { ((lower - c) / s).atan() } else { -FRAC_PI_2 };
            let tb = if upper.is_finite() { ((upper - c) / s).atan() } else { FRAC_PI_2 };
            let g = |t: f64| {
                let (sin, cos) = t.sin_cos();
                let x = c + s * sin / cos;
                guarded(f(x), s / (cos * cos))
            };
            adaptive(&g, ta, tb, spec)
        }
        Transform::SemiInfiniteLog => {
            if lower.is_finite() && upper == f64::INFINITY {
                let a = lower;
                let g = |t: f64| {
                    let e = t.tan().exp();
                    let cos = t.cos();
                    guarded(f(a + s * e), s * e / (cos * cos))
                };
                adaptive(&g, -FRAC_PI_2, FRAC_PI_2, spec)
            } else if upper.is_finite() && lower == f64::NEG_INFINITY {
                let b = upper;
                let g = |t: f64| {
                    let e = t.tan().exp();
                    let cos = t.cos();
                    guarded(f(b - s * e), s * e / (cos * cos))
                };
                adaptive(&g, -FRAC_PI_2, FRAC_PI_2, spec)
            } else if lower.is_finite() && upper.is_finite() {
                adaptive(&f, lower, upper, spec)
            } else {
                let atan = spec.with_transform(Transform::InfiniteAtan);
                integrate_1d(f, domain, &atan)
            }
        }
    }
}

/// Nested 2D integral `∫ ∫ f(x, y) dy dx`, with the inner range allowed to
/// depend on `x`. The inner integrals run at the same spec; any inner
/// failure marks the whole result non-converged.
pub fn integrate_2d<F, D>(f: F, outer: Domain, inner: D, spec: &QuadratureSpec) -> QuadResult
where
    F: Fn(f64, f64) -> f64,
    D: Fn(f64) -> Domain,
{
    use std::cell::Cell;
    let inner_ok = Cell::new(true);
    let inner_err = Cell::new(0.0_f64);
    let inner_evals = Cell::new(0usize);
    let outer_fn = |x: f64| {
        let r = integrate_1d(|y| f(x, y), inner(x), spec);
        inner_evals.set(inner_evals.get() + r.evaluations);
        inner_err.set(inner_err.get().max(r.error));
        if !r.converged {
            inner_ok.set(false);
        }
        r.value
    };
    let mut r = integrate_1d(outer_fn, outer, spec);
    r.evaluations += inner_evals.get();
    r.converged = r.converged && inner_ok.get();
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::dist::normal_pdf;
    use approx::assert_relative_eq;

    fn tight() -> QuadratureSpec {
        QuadratureSpec::new(1e-12, 1e-12, 2000).unwrap()
    }

    #[test]
    fn exponential_over_half_line() {
        let r = integrate_1d(|x: f64| (-x).exp(), Domain::new(0.0, f64::INFINITY), &tight());
        assert!(r.converged);
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-11);
    }

    #[test]
    fn normal_density_over_real_line() {
        let r = integrate_1d(normal_pdf, Domain::real_line(), &tight());
        assert!(r.converged);
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-11);
        let far = integrate_1d(normal_pdf, Domain::real_line().with_center(3.0).with_scale(0.5), &tight());
        assert_relative_eq!(far.value, 1.0, epsilon = 1e-11);
    }

    #[test]
    fn lower_half_line() {
        let r = integrate_1d(normal_pdf, Domain::new(f64::NEG_INFINITY, 0.0), &tight());
        assert_relative_eq!(r.value, 0.5, epsilon = 1e-11);
        let atan = tight().with_transform(Transform::InfiniteAtan);
        let r = integrate_1d(normal_pdf, Domain::new(f64::NEG_INFINITY, 1.0), &atan);
        assert_relative_eq!(r.value, crate::numerics::dist::normal_cdf(1.0), epsilon = 1e-11);
    }

    #[test]
    fn separable_polynomial_2d() {
        let r = integrate_2d(|x, y| x * y, Domain::new(0.0, 1.0), |_| Domain::new(0.0, 1.0), &tight());
        assert!(r.converged);
        assert_relative_eq!(r.value, 0.25, epsilon = 1e-14);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate_1d(|x: f64| x * x, Domain::new(1.0, 0.0), &tight());
        assert_relative_eq!(r.value, -1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let spec = QuadratureSpec::new(1e-14, 1e-14, 3).unwrap();
        let r = integrate_1d(|x: f64| (1.0 / x).sin(), Domain::new(1e-6, 1.0), &spec);
        assert!(!r.converged);
        assert!(r.require("oscillatory", &spec).unwrap_err().is_non_convergence());
    }

    #[test]
    fn invalid_spec_rejected() {
        assert!(QuadratureSpec::new(0.0, 1e-8, 10).is_err());
        assert!(QuadratureSpec::new(1e-9, 1e-8, 0).is_err());
    }
}
