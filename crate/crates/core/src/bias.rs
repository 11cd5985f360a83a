//! Expected bias for location families.
//!
//! Let `h` be the density of a statistic `V = θ + E` with a flat prior on
//! θ, and let `g(d) = ∫ h(s) h(s − d) ds` be the density of the difference
//! of two independent errors. The posterior marginal likelihood of the full
//! line is `g(0)` and the replicate-prior marginal is `g(x − y)`, so the
//! expected bias collapses to
//!
//! `E b = log g(0) − ∫ g(d) log g(d) dd`,
//!
//! a log-density at the origin plus a differential entropy. This holds for
//! the t family directly and for the F family on the log scale, where
//! `h(v) = e^v f(e^v)`. It replaces a three-dimensional integral by a
//! convolution nested inside a one-dimensional integral.

use crate::error::{EbfError, Result};
use crate::evidence::BiasValue;
use crate::numerics::quad::{integrate_1d, Domain, QuadratureSpec, Transform};

/// Inner tolerance for the convolution `g(d)`; tight enough that its error
/// is negligible next to the outer tolerance.
const INNER_ABS: f64 = 1e-14;
const INNER_REL: f64 = 1e-11;

/// A location family described by its error log-density.
pub struct LocationFamily<F: Fn(f64) -> f64 + Sync> {
    pub ln_density: F,
    /// Where the error density has most of its mass.
    pub center: f64,
    /// Rough spread of the error density.
    pub scale: f64,
}

impl<F: Fn(f64) -> f64 + Sync> LocationFamily<F> {
    /// Density of the difference of two independent errors at `d`.
    ///
    /// The integrand has one bump from each factor, at `center` and at
    /// `center + d`; the range is split at their midpoint and each half is
    /// mapped around its own bump, so distant bumps are never missed.
    pub fn difference_density(&self, d: f64) -> Result<(f64, f64)> {
        let spec = QuadratureSpec::new(INNER_ABS, INNER_REL, 2000)?.with_transform(Transform::InfiniteAtan);
        let h = &self.ln_density;
        let f = |s: f64| {
            let v = h(s) + h(s - d);
            if v.is_finite() {
                v.exp()
            } else {
                0.0
            }
        };
        let mid = self.center + 0.5 * d;
        let (lo_peak, hi_peak) = if d >= 0.0 { (self.center, self.center + d) } else { (self.center + d, self.center) };
        let left = integrate_1d(f, Domain::new(f64::NEG_INFINITY, mid).with_center(lo_peak).with_scale(self.scale), &spec);
        let right = integrate_1d(f, Domain::new(mid, f64::INFINITY).with_center(hi_peak).with_scale(self.scale), &spec);
        let v = left.require("difference density", &spec)? + right.require("difference density", &spec)?;
        Ok((v, left.error + right.error))
    }

    /// Full-line expected bias to the tolerances of `spec`.
    pub fn expected_bias(&self, spec: &QuadratureSpec) -> Result<BiasValue> {
        let (g0, g0_err) = self.difference_density(0.0)?;
        if !(g0 > 0.0) {
            return Err(EbfError::domain("difference density vanishes at the origin"));
        }
        let failure = std::cell::Cell::new(None);
        let inner_err = std::cell::Cell::new(0.0f64);
        // g is symmetric, so integrate one side and double.
        let integrand = |d: f64| match self.difference_density(d) {
            Ok((g, err)) => {
                inner_err.set(inner_err.get().max(err * (1.0 + g.ln().abs())));
                if g > 0.0 {
                    g * g.ln()
                } else {
                    0.0
                }
            }
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        };
        let outer = integrate_1d(integrand, Domain::new(0.0, f64::INFINITY).with_center(0.0).with_scale(2.0 * self.scale), spec);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let half_entropy = outer.require("expected bias", spec)?;
        let value = g0.ln() - 2.0 * half_entropy;
        let error = 2.0 * outer.error + g0_err / g0 + 2.0 * inner_err.get();
        Ok(BiasValue::quadrature(value, error))
    }
}
