use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::price_model::PriceModel;

/// Timing of a job, all in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    /// uninterrupted execution time
    pub t_e: f64,
    /// deadline
    pub t_s: f64,
    /// slot length between spot price updates
    pub t_k: f64,
    /// recovery time after a persistent request resumes
    pub t_r: f64,
}

impl JobSpec {
    pub fn new(t_e: f64, t_s: f64, t_k: f64, t_r: f64) -> Result<Self> {
        let job = JobSpec { t_e, t_s, t_k, t_r };
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("t_e", self.t_e), ("t_s", self.t_s), ("t_k", self.t_k)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.t_r >= 0.0 && self.t_r.is_finite()) {
            return Err(Error::invalid(format!(
                "t_r must be nonnegative, got {}",
                self.t_r
            )));
        }
        Ok(())
    }

    /// The deadline must leave room for running two halves in parallel.
    pub fn require_splittable(&self) -> Result<()> {
        self.validate()?;
        if self.t_e > 2.0 * self.t_s {
            return Err(Error::Infeasible(format!(
                "t_e = {} exceeds twice the deadline t_s = {}",
                self.t_e, self.t_s
            )));
        }
        Ok(())
    }

    /// Feasible on-demand share: `q t_e ≤ t_s` and `(1 - q) t_e ≤ t_s`.
    pub fn q_interval(&self) -> Result<(f64, f64)> {
        self.require_splittable()?;
        let lo = (1.0 - self.t_s / self.t_e).max(0.0);
        let hi = (self.t_s / self.t_e).min(1.0);
        Ok((lo, hi))
    }
}

/// A bidding portfolio: on-demand share `q` and spot bid `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub q: f64,
    pub p: f64,
}

impl Strategy {
    pub fn new(q: f64, p: f64) -> Self {
        Strategy { q, p }
    }

    /// Checks the box `0 ≤ q ≤ 1`, `pi_min ≤ p ≤ pi_max`.
    pub fn check_bounds(&self, model: &PriceModel) -> Result<()> {
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::invalid(format!(
                "q must lie in [0, 1], got {}",
                self.q
            )));
        }
        model.bounds().check(self.p)?;
        Ok(())
    }
}
