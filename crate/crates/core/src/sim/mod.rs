//! Slot-level Monte Carlo evaluation of a portfolio.
//!
//! Each slot of length `t_k` draws a fresh spot price. The spot share runs in
//! a slot when the bid is at least that price and pays the slot's price for
//! every second it occupies. The on-demand share always runs, at `π̄`.
//!
//! * One-time requests wait for their first winning slot (only slots that
//!   start before `t_s` can admit them), then run until done or outbid.
//! * Persistent requests pause when outbid and resume on the next win after
//!   spending `t_r` seconds of that slot on recovery.
//!
//! Work finished after `t_s` counts as late.

mod stats;

pub use stats::{AggregateStats, Stat};

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::job::{JobSpec, Strategy};
use crate::otr_p::PenaltyParams;
use crate::price_model::PriceModel;

// safety stop for persistent runs whose bid almost never wins
const MAX_SLOTS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    OneTime,
    Persistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub runs: usize,
    pub seed: u64,
    pub request_kind: RequestKind,
    pub penalty: Option<PenaltyParams>,
}

impl SimConfig {
    pub fn new(runs: usize, seed: u64, request_kind: RequestKind) -> Self {
        SimConfig {
            runs,
            seed,
            request_kind,
            penalty: None,
        }
    }

    pub fn with_penalty(mut self, penalty: PenaltyParams) -> Self {
        self.penalty = Some(penalty);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::invalid("runs must be at least 1"));
        }
        Ok(())
    }
}

/// Result of a single simulated job.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOutcome {
    pub spot_cost: f64,
    pub ondemand_cost: f64,
    pub penalty_cost: f64,
    /// time at which the last piece of work stopped, seconds
    pub completion_time: f64,
    pub completed_seconds: f64,
    pub interrupted: bool,
    pub late_seconds: f64,
    /// start of the first winning slot, if any
    pub entry_delay: Option<f64>,
}

impl TraceOutcome {
    pub fn total_cost(&self) -> f64 {
        self.spot_cost + self.ondemand_cost + self.penalty_cost
    }

    fn merge(self, other: TraceOutcome) -> TraceOutcome {
        TraceOutcome {
            spot_cost: self.spot_cost + other.spot_cost,
            ondemand_cost: self.ondemand_cost + other.ondemand_cost,
            penalty_cost: self.penalty_cost + other.penalty_cost,
            completion_time: self.completion_time.max(other.completion_time),
            completed_seconds: self.completed_seconds + other.completed_seconds,
            interrupted: self.interrupted || other.interrupted,
            late_seconds: self.late_seconds + other.late_seconds,
            entry_delay: match (self.entry_delay, other.entry_delay) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
        }
    }
}

/// Per-slot i.i.d. price stream.
struct SlotMarket<'a> {
    model: &'a PriceModel,
    rng: ChaCha8Rng,
}

impl<'a> SlotMarket<'a> {
    fn new(model: &'a PriceModel, seed: u64) -> Self {
        SlotMarket {
            model,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn next_price(&mut self) -> f64 {
        self.model.quantile_at(self.rng.random::<f64>())
    }
}

// seconds of [start, start + len) that fall after the deadline
fn after_deadline(start: f64, len: f64, t_s: f64) -> f64 {
    (start + len - start.max(t_s)).clamp(0.0, len)
}

fn base_outcome(model: &PriceModel, job: &JobSpec, x: &Strategy) -> TraceOutcome {
    TraceOutcome {
        spot_cost: 0.0,
        ondemand_cost: x.q * job.t_e * model.pi_max(),
        penalty_cost: 0.0,
        completion_time: x.q * job.t_e,
        completed_seconds: 0.0,
        interrupted: false,
        late_seconds: 0.0,
        entry_delay: None,
    }
}

/// Simulates one job whose spot share is dropped on the first lost slot.
pub fn simulate_one_time(
    model: &PriceModel,
    job: &JobSpec,
    x: &Strategy,
    penalty: Option<&PenaltyParams>,
    seed: u64,
) -> Result<TraceOutcome> {
    x.check_bounds(model)?;
    job.validate()?;
    let work = ((1.0 - x.q) * job.t_e).max(0.0);
    let mut out = base_outcome(model, job, x);
    if work > 0.0 {
        let mut market = SlotMarket::new(model, seed);
        let mut start = 0.0;
        let mut price = f64::INFINITY;
        while start < job.t_s {
            price = market.next_price();
            if price <= x.p {
                break;
            }
            start += job.t_k;
        }
        if price <= x.p {
            out.entry_delay = Some(start);
            let mut remaining = work;
            loop {
                let run = remaining.min(job.t_k);
                out.spot_cost += price * run;
                out.completed_seconds += run;
                out.late_seconds += after_deadline(start, run, job.t_s);
                out.completion_time = out.completion_time.max(start + run);
                remaining -= run;
                if remaining <= 0.0 {
                    break;
                }
                start += job.t_k;
                price = market.next_price();
                if price > x.p {
                    out.interrupted = true;
                    break;
                }
            }
        }
    }
    if let Some(pen) = penalty {
        let incomplete = (work - out.completed_seconds).max(0.0);
        out.penalty_cost = pen.c_i * incomplete + pen.c_s * out.late_seconds;
    }
    Ok(out)
}

/// Simulates one job whose spot share pauses when outbid and resumes later.
pub fn simulate_persistent(
    model: &PriceModel,
    job: &JobSpec,
    x: &Strategy,
    penalty: Option<&PenaltyParams>,
    seed: u64,
) -> Result<TraceOutcome> {
    x.check_bounds(model)?;
    job.validate()?;
    if job.t_r >= job.t_k {
        return Err(Error::invalid(format!(
            "recovery t_r = {} must be below t_k = {}",
            job.t_r, job.t_k
        )));
    }
    let work = ((1.0 - x.q) * job.t_e).max(0.0);
    let mut out = base_outcome(model, job, x);
    if work > 0.0 && model.cdf_at(x.p) > 0.0 {
        let mut market = SlotMarket::new(model, seed);
        let mut remaining = work;
        let mut running = false;
        let mut started = false;
        let mut slot = 0u64;
        while remaining > 0.0 && slot < MAX_SLOTS {
            let start = slot as f64 * job.t_k;
            let price = market.next_price();
            if price <= x.p {
                if out.entry_delay.is_none() {
                    out.entry_delay = Some(start);
                }
                let mut offset = 0.0;
                if started && !running {
                    offset = job.t_r;
                    out.spot_cost += price * job.t_r;
                }
                let run = remaining.min(job.t_k - offset);
                out.spot_cost += price * run;
                out.completed_seconds += run;
                out.late_seconds += after_deadline(start + offset, run, job.t_s);
                out.completion_time = out.completion_time.max(start + offset + run);
                remaining -= run;
                running = true;
                started = true;
            } else {
                if running {
                    out.interrupted = true;
                }
                running = false;
            }
            slot += 1;
        }
        if remaining > 0.0 {
            log::warn!("persistent run stopped after {MAX_SLOTS} slots with {remaining} s left");
        }
    }
    if let Some(pen) = penalty {
        out.penalty_cost = pen.c_s * out.late_seconds;
    }
    Ok(out)
}

/// Seed of run `index`: the base seed and index mixed by SplitMix64.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn simulate(
    model: &PriceModel,
    job: &JobSpec,
    x: &Strategy,
    cfg: &SimConfig,
    seed: u64,
) -> Result<TraceOutcome> {
    match cfg.request_kind {
        RequestKind::OneTime => simulate_one_time(model, job, x, cfg.penalty.as_ref(), seed),
        RequestKind::Persistent => simulate_persistent(model, job, x, cfg.penalty.as_ref(), seed),
    }
}

/// Runs `cfg.runs` traces in parallel and returns them in run order.
pub fn run_traces(
    model: &PriceModel,
    job: &JobSpec,
    x: &Strategy,
    cfg: &SimConfig,
) -> Result<Vec<TraceOutcome>> {
    cfg.validate()?;
    (0..cfg.runs as u64)
        .into_par_iter()
        .map(|i| simulate(model, job, x, cfg, derive_seed(cfg.seed, i)))
        .collect()
}

/// Mean and standard error of every trace field over `cfg.runs` runs.
pub fn evaluate(
    model: &PriceModel,
    job: &JobSpec,
    x: &Strategy,
    cfg: &SimConfig,
) -> Result<AggregateStats> {
    let traces = run_traces(model, job, x, cfg)?;
    Ok(AggregateStats::from_traces(&traces, (1.0 - x.q) * job.t_e))
}

/// Like [`evaluate`], but the job is split evenly over `instances` identical
/// requests that run side by side; each trace sums their outcomes.
pub fn evaluate_split(
    model: &PriceModel,
    job: &JobSpec,
    x: &Strategy,
    instances: u32,
    cfg: &SimConfig,
) -> Result<AggregateStats> {
    let traces = run_split_traces(model, job, x, instances, cfg)?;
    Ok(AggregateStats::from_traces(&traces, (1.0 - x.q) * job.t_e))
}

/// Traces behind [`evaluate_split`], in run order.
pub fn run_split_traces(
    model: &PriceModel,
    job: &JobSpec,
    x: &Strategy,
    instances: u32,
    cfg: &SimConfig,
) -> Result<Vec<TraceOutcome>> {
    cfg.validate()?;
    if instances == 0 {
        return Err(Error::invalid("instances must be at least 1"));
    }
    let part = JobSpec {
        t_e: job.t_e / instances as f64,
        ..*job
    };
    let n = instances as u64;
    (0..cfg.runs as u64)
        .into_par_iter()
        .map(|i| {
            let mut acc: Option<TraceOutcome> = None;
            for k in 0..n {
                let t = simulate(model, &part, x, cfg, derive_seed(cfg.seed, i * n + k))?;
                acc = Some(match acc {
                    None => t,
                    Some(a) => a.merge(t),
                });
            }
            Ok(acc.expect("instances >= 1"))
        })
        .collect()
}

/// Writes traces as CSV, one row per run.
pub fn write_traces_csv<W: Write>(out: W, traces: &[TraceOutcome]) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        run_index: usize,
        spot_cost: f64,
        ondemand_cost: f64,
        penalty_cost: f64,
        completion_time: f64,
        completed_seconds: f64,
        interrupted: bool,
        late_seconds: f64,
        entry_delay: Option<f64>,
    }
    let mut w = csv::Writer::from_writer(out);
    for (i, t) in traces.iter().enumerate() {
        w.serialize(Row {
            run_index: i,
            spot_cost: t.spot_cost,
            ondemand_cost: t.ondemand_cost,
            penalty_cost: t.penalty_cost,
            completion_time: t.completion_time,
            completed_seconds: t.completed_seconds,
            interrupted: t.interrupted,
            late_seconds: t.late_seconds,
            entry_delay: t.entry_delay,
        })
        .map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<traces>".into(),
        msg: e.to_string(),
    })
}

/// A reference strategy that uses a single instance type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselinePlan {
    pub strategy: Strategy,
    /// parallel instances the job is split over
    pub instances: u32,
    /// share of the job each instance runs
    pub portion_per_instance: f64,
    pub request_kind: RequestKind,
}

/// Baseline I (all on-demand) and Baseline II (all spot).
///
/// When `t_s < t_e` both split the job into two halves run side by side.
/// Baseline II bids `F⁻¹(1 - t_k / t_e')` with `t_e'` the per-instance
/// execution time, ignoring the deadline.
pub fn baseline_strategies(
    model: &PriceModel,
    job: &JobSpec,
) -> Result<(BaselinePlan, BaselinePlan)> {
    job.require_splittable()?;
    let instances = if job.t_s < job.t_e { 2 } else { 1 };
    let per_instance = job.t_e / instances as f64;
    let portion = 1.0 / instances as f64;
    let on_demand = BaselinePlan {
        strategy: Strategy {
            q: 1.0,
            p: model.pi_max(),
        },
        instances,
        portion_per_instance: portion,
        request_kind: RequestKind::OneTime,
    };
    let level = (1.0 - job.t_k / per_instance).max(0.0);
    let spot = BaselinePlan {
        strategy: Strategy {
            q: 0.0,
            p: model.quantile_at(level),
        },
        instances,
        portion_per_instance: portion,
        request_kind: RequestKind::OneTime,
    };
    Ok((on_demand, spot))
}

/// Simulates a baseline plan with its own instance split.
pub fn evaluate_baseline(
    model: &PriceModel,
    job: &JobSpec,
    plan: &BaselinePlan,
    cfg: &SimConfig,
) -> Result<AggregateStats> {
    let cfg = SimConfig {
        request_kind: plan.request_kind,
        ..*cfg
    };
    evaluate_split(model, job, &plan.strategy, plan.instances, &cfg)
}
