use serde::{Deserialize, Serialize};

use super::PriceBounds;
use crate::error::{Error, Result};

/// Heavy-tailed density that decays towards the on-demand price:
/// `f(π) ∝ (α/θ) Δ^{-α} (π̄ - π)^{α+1}` on `[π̲, π̄]`, with `Δ = π̄ - π̲`.
///
/// The raw expression integrates to `α Δ² / (θ (α + 2))`, which is not 1 in
/// general, so the model divides by that constant. After normalisation the
/// CDF is `1 - u^κ` with `u = (π̄ - π)/Δ` and `κ = α + 2`, which makes every
/// derived quantity closed-form. `θ` only enters through the constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParetoParams", into = "ParetoParams")]
pub struct BoundedParetoModel {
    bounds: PriceBounds,
    alpha: f64,
    theta: f64,
    norm: f64,
}

#[derive(Serialize, Deserialize)]
struct ParetoParams {
    pi_min: f64,
    pi_max: f64,
    alpha: f64,
    theta: f64,
}

impl TryFrom<ParetoParams> for BoundedParetoModel {
    type Error = Error;
    fn try_from(s: ParetoParams) -> Result<Self> {
        BoundedParetoModel::new(PriceBounds::new(s.pi_min, s.pi_max)?, s.alpha, s.theta)
    }
}

impl From<BoundedParetoModel> for ParetoParams {
    fn from(m: BoundedParetoModel) -> Self {
        ParetoParams {
            pi_min: m.bounds.pi_min,
            pi_max: m.bounds.pi_max,
            alpha: m.alpha,
            theta: m.theta,
        }
    }
}

impl BoundedParetoModel {
    pub fn new(bounds: PriceBounds, alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::invalid(format!(
                "theta must be positive, got {theta}"
            )));
        }
        let d = bounds.width();
        let norm = alpha * d * d / (theta * (alpha + 2.0));
        Ok(BoundedParetoModel {
            bounds,
            alpha,
            theta,
            norm,
        })
    }

    pub fn bounds(&self) -> PriceBounds {
        self.bounds
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Integral of the unnormalised density over the support.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// The density exactly as parameterised, before normalisation.
    pub fn raw_pdf(&self, p: f64) -> f64 {
        let d = self.bounds.width();
        let gap = (self.bounds.pi_max - p).max(0.0);
        self.alpha * d.powf(-self.alpha) * gap.powf(self.alpha + 1.0) / self.theta
    }

    fn kappa(&self) -> f64 {
        self.alpha + 2.0
    }

    fn u(&self, p: f64) -> f64 {
        ((self.bounds.pi_max - p) / self.bounds.width()).clamp(0.0, 1.0)
    }

    pub(super) fn cdf(&self, p: f64) -> f64 {
        let u = self.u(p);
        if u >= 1.0 {
            return 0.0;
        }
        -(self.kappa() * u.ln()).exp_m1()
    }

    pub(super) fn sf(&self, p: f64) -> f64 {
        self.u(p).powf(self.kappa())
    }

    pub(super) fn pdf(&self, p: f64) -> f64 {
        let k = self.kappa();
        k / self.bounds.width() * self.u(p).powf(k - 1.0)
    }

    pub(super) fn partial_mean(&self, p: f64) -> f64 {
        let k = self.kappa();
        let u = self.u(p);
        let d = self.bounds.width();
        let upper = self.bounds.pi_max;
        upper * self.cdf(p) - d * k / (k + 1.0) * (1.0 - u.powf(k + 1.0))
    }

    pub(super) fn conditional_mean(&self, p: f64) -> f64 {
        let k = self.kappa();
        let u = self.u(p);
        let ln_u = u.ln();
        // ratio of (1 - u^{κ+1}) to (1 - u^κ), both via expm1
        let ratio = ((k + 1.0) * ln_u).exp_m1() / (k * ln_u).exp_m1();
        self.bounds.pi_max - self.bounds.width() * k / (k + 1.0) * ratio
    }

    pub(super) fn quantile(&self, v: f64) -> f64 {
        let tail = (1.0 - v).powf(1.0 / self.kappa());
        self.bounds.pi_max - self.bounds.width() * tail
    }
}
