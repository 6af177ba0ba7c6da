//! Persistent requests: the spot share pauses when outbid and resumes, paying
//! a recovery time `t_r` on each resume, so it always finishes eventually.
//!
//! Expected completion time of the spot share is
//! `T = (1 - q) t_e / (1 - (t_r/t_k)(1 - F)) / F`. Minimising
//! `Φ₃ = q t_e π̄ + (1 - q) t_e E[π | π ≤ p] / (1 - (t_r/t_k)(1 - F))`
//! subject to `T ≤ t_s` gives:
//!
//! * `t_e / 2 < t_s ≤ t_e`: bid the ceiling `π̄` and buy `q = 1 - t_s / t_e`.
//! * `t_s > t_e`: no on-demand share, bid `ψ₃⁻¹(t_e / t_s)` where
//!   `ψ₃ = F (1 - (t_r/t_k)(1 - F))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::job::{JobSpec, Strategy};
use crate::numeric::{bisect_root, RootBracket};
use crate::price_model::PriceModel;

/// Which completion-time expression to use.
///
/// `Draft` subtracts one recovery time from the spot share; it exists only to
/// compare against that older accounting and is never the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrVariant {
    #[default]
    Final,
    Draft,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PrOptions {
    pub variant: PrVariant,
}

fn spot_work(job: &JobSpec, q: f64, opts: PrOptions) -> f64 {
    let w = (1.0 - q) * job.t_e;
    match opts.variant {
        PrVariant::Final => w,
        PrVariant::Draft => (w - job.t_r).max(0.0),
    }
}

/// Largest admissible recovery time at bid `p`: `t_k / (2 (1 - F))`.
pub fn recovery_limit(model: &PriceModel, job: &JobSpec, p: f64) -> Result<f64> {
    let sf = model.sf(p)?;
    Ok(if sf <= 0.0 {
        f64::INFINITY
    } else {
        job.t_k / (2.0 * sf)
    })
}

fn check_recovery(model: &PriceModel, job: &JobSpec, p: f64) -> Result<()> {
    let limit = recovery_limit(model, job, p)?;
    if job.t_r > 0.0 && job.t_r >= limit {
        return Err(Error::InfeasibleRecovery {
            t_r: job.t_r,
            limit,
        });
    }
    Ok(())
}

fn efficiency(model: &PriceModel, job: &JobSpec, p: f64) -> f64 {
    1.0 - job.t_r / job.t_k * model.sf_at(p)
}

/// Expected wall-clock time of the spot share; infinite if `F(p) = 0`.
pub fn completion_time(model: &PriceModel, job: &JobSpec, x: &Strategy) -> Result<f64> {
    completion_time_with(model, job, x, PrOptions::default())
}

pub fn completion_time_with(
    model: &PriceModel,
    job: &JobSpec,
    x: &Strategy,
    opts: PrOptions,
) -> Result<f64> {
    x.check_bounds(model)?;
    check_recovery(model, job, x.p)?;
    let f = model.cdf_at(x.p);
    let work = spot_work(job, x.q, opts);
    if work == 0.0 {
        return Ok(0.0);
    }
    if f <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(work / efficiency(model, job, x.p) / f)
}

/// `Φ₃(q, p)`.
pub fn objective_p3(model: &PriceModel, job: &JobSpec, x: &Strategy) -> Result<f64> {
    objective_p3_with(model, job, x, PrOptions::default())
}

pub fn objective_p3_with(
    model: &PriceModel,
    job: &JobSpec,
    x: &Strategy,
    opts: PrOptions,
) -> Result<f64> {
    x.check_bounds(model)?;
    check_recovery(model, job, x.p)?;
    let on_demand = x.q * job.t_e * model.pi_max();
    let work = spot_work(job, x.q, opts);
    if work == 0.0 {
        return Ok(on_demand);
    }
    let cm = model.conditional_mean(x.p)?;
    Ok(on_demand + work / efficiency(model, job, x.p) * cm)
}

/// `ψ₃(p) = F (1 - (t_r/t_k)(1 - F))`, increasing in `p`.
pub fn psi3(model: &PriceModel, job: &JobSpec, p: f64) -> Result<f64> {
    let f = model.cdf(p)?;
    Ok(f * efficiency(model, job, p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrSolution {
    pub strategy: Strategy,
    /// expected completion time `T` of the spot share, seconds
    pub total_time: f64,
    /// `Φ₃` at the solution
    pub cost: f64,
}

/// Optimal persistent-request portfolio.
pub fn solve_pr(model: &PriceModel, job: &JobSpec) -> Result<PrSolution> {
    solve_pr_with(model, job, PrOptions::default())
}

pub fn solve_pr_with(model: &PriceModel, job: &JobSpec, opts: PrOptions) -> Result<PrSolution> {
    job.require_splittable()?;
    let shift = match opts.variant {
        PrVariant::Final => 0.0,
        PrVariant::Draft => job.t_r,
    };
    let strategy = if job.t_s <= job.t_e {
        let q = (1.0 - (job.t_s + shift) / job.t_e).clamp(0.0, 1.0);
        Strategy {
            q,
            p: model.pi_max(),
        }
    } else {
        let target = (job.t_e - shift) / job.t_s;
        let bracket = RootBracket::new(model.pi_min(), model.pi_max(), 1e-10)?;
        let p = bisect_root(
            |p| psi3(model, job, p).map(|v| v - target).unwrap_or(f64::NAN),
            bracket,
        )?;
        Strategy { q: 0.0, p }
    };
    let total_time = completion_time_with(model, job, &strategy, opts)?;
    if total_time > job.t_s * (1.0 + 1e-6) {
        return Err(Error::Infeasible(format!(
            "expected completion {total_time} s exceeds deadline {} s",
            job.t_s
        )));
    }
    let cost = objective_p3_with(model, job, &strategy, opts)?;
    Ok(PrSolution {
        strategy,
        total_time,
        cost,
    })
}
