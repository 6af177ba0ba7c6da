use serde::{Deserialize, Serialize};

use super::PriceBounds;
use crate::error::{Error, Result};

/// `a·exp(b x)` renormalised over `[π̲, π̄]`.
///
/// The scale `a` cancels in the normalised density and is kept only for
/// reporting. With `s = p - π̲` the CDF is `expm1(b s) / expm1(b Δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentialParams", into = "ExponentialParams")]
pub struct TruncatedExponentialModel {
    bounds: PriceBounds,
    a: f64,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct ExponentialParams {
    pi_min: f64,
    pi_max: f64,
    a: f64,
    b: f64,
}

impl TryFrom<ExponentialParams> for TruncatedExponentialModel {
    type Error = Error;
    fn try_from(s: ExponentialParams) -> Result<Self> {
        TruncatedExponentialModel::new(PriceBounds::new(s.pi_min, s.pi_max)?, s.a, s.b)
    }
}

impl From<TruncatedExponentialModel> for ExponentialParams {
    fn from(m: TruncatedExponentialModel) -> Self {
        ExponentialParams {
            pi_min: m.bounds.pi_min,
            pi_max: m.bounds.pi_max,
            a: m.a,
            b: m.b,
        }
    }
}

// below this |b s| the closed forms switch to series
const SMALL: f64 = 1e-4;

impl TruncatedExponentialModel {
    /// A positive `b` is accepted (fits can produce it) but logged, since the
    /// strategy results assume a nonincreasing density.
    pub fn new(bounds: PriceBounds, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid(format!("scale a must be positive, got {a}")));
        }
        if !b.is_finite() {
            return Err(Error::invalid(format!("rate b must be finite, got {b}")));
        }
        if b > 0.0 {
            log::warn!("exponential rate b = {b} > 0: density increases with price");
        }
        Ok(TruncatedExponentialModel { bounds, a, b })
    }

    pub fn bounds(&self) -> PriceBounds {
        self.bounds
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Integral of `a·exp(b x)` over the support (the dropped constant).
    pub fn normalization(&self) -> f64 {
        let d = self.bounds.width();
        let lo = self.bounds.pi_min;
        if self.b == 0.0 {
            return self.a * d;
        }
        self.a * (self.b * lo).exp() * (self.b * d).exp_m1() / self.b
    }

    fn s(&self, p: f64) -> f64 {
        (p - self.bounds.pi_min).clamp(0.0, self.bounds.width())
    }

    fn uniform(&self) -> bool {
        (self.b * self.bounds.width()).abs() < 1e-12
    }

    pub(super) fn cdf(&self, p: f64) -> f64 {
        let s = self.s(p);
        let d = self.bounds.width();
        if self.uniform() {
            return s / d;
        }
        ((self.b * s).exp_m1() / (self.b * d).exp_m1()).clamp(0.0, 1.0)
    }

    pub(super) fn sf(&self, p: f64) -> f64 {
        let s = self.s(p);
        let d = self.bounds.width();
        if self.uniform() {
            return (d - s) / d;
        }
        // e^{bs} (e^{b(Δ-s)} - 1) / (e^{bΔ} - 1)
        let v = (self.b * s).exp() * (self.b * (d - s)).exp_m1() / (self.b * d).exp_m1();
        v.clamp(0.0, 1.0)
    }

    pub(super) fn pdf(&self, p: f64) -> f64 {
        let s = self.s(p);
        let d = self.bounds.width();
        if self.uniform() {
            return 1.0 / d;
        }
        self.b * (self.b * s).exp() / (self.b * d).exp_m1()
    }

    pub(super) fn conditional_mean(&self, p: f64) -> f64 {
        let s = self.s(p);
        let x = self.b * s;
        let excess = if x.abs() < SMALL {
            s / 2.0 + self.b * s * s / 12.0
        } else {
            s / (-(-x).exp_m1()) - 1.0 / self.b
        };
        self.bounds.pi_min + excess
    }

    pub(super) fn partial_mean(&self, p: f64) -> f64 {
        if self.s(p) == 0.0 {
            return 0.0;
        }
        self.conditional_mean(p) * self.cdf(p)
    }

    pub(super) fn quantile(&self, u: f64) -> f64 {
        let d = self.bounds.width();
        if self.uniform() {
            return self.bounds.pi_min + u * d;
        }
        let s = (u * (self.b * d).exp_m1()).ln_1p() / self.b;
        self.bounds.pi_min + s.clamp(0.0, d)
    }
}
