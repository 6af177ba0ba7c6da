//! One-time requests with penalties for unfinished and late work.
//!
//! With `K(q) = (1 - q) t_e / t_k` slots of spot work, the expected terms are
//!
//! * late time `L = t_k (1 - F)^{t_s/t_k - K + 1} F^{K - 2}`,
//! * completed time `EC = t_k (1 - F^K) / (1 - F)`,
//! * incomplete time `EI = (1 - q) t_e - EC`,
//!
//! and the cost to minimise is
//! `U = q t_e π̄ + E[π | π ≤ p] EC + c_I EI + c_s L`.
//!
//! `U` is not convex, so [`sca_solve`] runs successive convex approximation:
//! each step minimises the linearisation of `U` plus a proximal term over the
//! feasible box, which separates per coordinate and is solved by clipping.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::job::{JobSpec, Strategy};
use crate::numeric::fd_partial_in_box;
use crate::otr_eg::solve_otr_eg;
use crate::price_model::PriceModel;

/// Penalty rates in price units ($/hour), charged per second of incomplete
/// and of late work.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyParams {
    pub c_i: f64,
    pub c_s: f64,
}

impl PenaltyParams {
    pub fn new(c_i: f64, c_s: f64) -> Result<Self> {
        if !(c_s >= 0.0 && c_i.is_finite() && c_s <= c_i) {
            return Err(Error::invalid(format!(
                "penalties need 0 <= c_s <= c_I, got c_I = {c_i}, c_s = {c_s}"
            )));
        }
        Ok(PenaltyParams { c_i, c_s })
    }

    pub fn zero() -> Self {
        PenaltyParams { c_i: 0.0, c_s: 0.0 }
    }
}

/// Knobs for [`sca_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaConfig {
    /// initial proximal weight
    pub tau: f64,
    /// step size towards the subproblem minimiser
    pub gamma: f64,
    /// stop once successive objective values differ by less than this
    pub epsilon: f64,
    pub max_iter: usize,
    /// also start from 8 jittered points and keep the best
    pub multi_start: bool,
}

impl Default for ScaConfig {
    fn default() -> Self {
        ScaConfig {
            tau: 1.0,
            gamma: 0.5,
            epsilon: 1e-5,
            max_iter: 1000,
            multi_start: false,
        }
    }
}

impl ScaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::invalid("tau must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::invalid("gamma must lie in (0, 1]"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// Expected late, completed and incomplete spot seconds for one portfolio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTerms {
    /// spot work measured in slots (real-valued)
    pub k: f64,
    pub late: f64,
    pub completed: f64,
    pub incomplete: f64,
}

/// `K(q) = (1 - q) t_e / t_k`.
pub fn slots_needed(job: &JobSpec, q: f64) -> f64 {
    (1.0 - q) * job.t_e / job.t_k
}

// ln F without cancellation when F is close to one
fn ln_cdf(f: f64, sf: f64) -> f64 {
    if f > 0.5 {
        (-sf).ln_1p()
    } else {
        f.ln()
    }
}

// h(S) = (1 - (1 - S)^K) / S, so EC = t_k h(1 - F)
fn h_ratio(k: f64, sf: f64) -> f64 {
    if sf <= 0.0 {
        return k;
    }
    -(k * (-sf).ln_1p()).exp_m1() / sf
}

// h'(S); the closed form cancels badly for small S, so use the series there
fn h_ratio_deriv(k: f64, f: f64, sf: f64) -> f64 {
    if sf < 1e-3 {
        // h(S) = Σ_{j≥1} (-1)^{j+1} C(K, j) S^{j-1}
        let mut total = 0.0;
        let mut binom = k;
        let mut s_pow = 1.0;
        for j in 1..=14 {
            binom *= (k - j as f64) / (j as f64 + 1.0);
            let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
            total += sign * binom * j as f64 * s_pow;
            s_pow *= sf;
        }
        return total;
    }
    let fk = (k * ln_cdf(f, sf)).exp();
    let fk1 = if f > 0.0 {
        ((k - 1.0) * ln_cdf(f, sf)).exp()
    } else {
        0.0
    };
    (k * fk1 * sf - (1.0 - fk)) / (sf * sf)
}

fn late_from(job: &JobSpec, k: f64, f: f64, sf: f64) -> f64 {
    if f <= 0.0 || sf <= 0.0 {
        return 0.0;
    }
    let a = job.t_s / job.t_k - k + 1.0;
    let b = k - 2.0;
    job.t_k * (a * sf.ln() + b * ln_cdf(f, sf)).exp()
}

/// Expected late seconds `L(p, q)`; zero at `F ∈ {0, 1}`.
pub fn late_time(model: &PriceModel, job: &JobSpec, x: &Strategy) -> Result<f64> {
    x.check_bounds(model)?;
    let k = slots_needed(job, x.q);
    if k < 2.0 {
        log::debug!("K = {k} < 2: late-time exponent on F is negative");
    }
    Ok(late_from(job, k, model.cdf_at(x.p), model.sf_at(x.p)))
}

/// Expected completed spot seconds `EC(p, q)`.
pub fn expected_completed(model: &PriceModel, job: &JobSpec, x: &Strategy) -> Result<f64> {
    x.check_bounds(model)?;
    let k = slots_needed(job, x.q);
    if k == 0.0 {
        return Ok(0.0);
    }
    Ok(job.t_k * h_ratio(k, model.sf_at(x.p)))
}

/// Expected incomplete spot seconds, clamped at zero.
pub fn expected_incomplete(model: &PriceModel, job: &JobSpec, x: &Strategy) -> Result<f64> {
    let ec = expected_completed(model, job, x)?;
    let ei = (1.0 - x.q) * job.t_e - ec;
    if ei < 0.0 {
        if ei < -1e-9 * job.t_e {
            log::debug!("expected incomplete time {ei} < 0 clamped (K below one slot)");
        }
        return Ok(0.0);
    }
    Ok(ei)
}

pub fn penalty_terms(model: &PriceModel, job: &JobSpec, x: &Strategy) -> Result<PenaltyTerms> {
    Ok(PenaltyTerms {
        k: slots_needed(job, x.q),
        late: late_time(model, job, x)?,
        completed: expected_completed(model, job, x)?,
        incomplete: expected_incomplete(model, job, x)?,
    })
}

/// `U(p, q)`. A bid that is never admitted pays no running cost.
pub fn objective_p2(
    model: &PriceModel,
    job: &JobSpec,
    pen: &PenaltyParams,
    x: &Strategy,
) -> Result<f64> {
    let t = penalty_terms(model, job, x)?;
    let running = if model.cdf_at(x.p) > 0.0 && t.completed > 0.0 {
        model.conditional_mean_at(x.p)? * t.completed
    } else {
        0.0
    };
    Ok(x.q * job.t_e * model.pi_max() + running + pen.c_i * t.incomplete + pen.c_s * t.late)
}

// U without range checks, for finite differences that may step a hair outside
fn objective_raw(model: &PriceModel, job: &JobSpec, pen: &PenaltyParams, p: f64, q: f64) -> f64 {
    let x = Strategy {
        q: q.clamp(0.0, 1.0),
        p: model.bounds().clamp(p),
    };
    objective_p2(model, job, pen, &x).unwrap_or(f64::NAN)
}

/// Analytic `(∂U/∂p, ∂U/∂q)`.
///
/// At `p ∈ {π̲, π̄}` the closed form is singular and one-sided finite
/// differences are returned instead.
pub fn grad_u(
    model: &PriceModel,
    job: &JobSpec,
    pen: &PenaltyParams,
    x: &Strategy,
) -> Result<(f64, f64)> {
    x.check_bounds(model)?;
    let f = model.cdf_at(x.p);
    let sf = model.sf_at(x.p);
    if f <= 0.0 || sf <= 0.0 {
        log::debug!("grad_u at boundary p = {}: finite-difference fallback", x.p);
        return Ok(fd_grad_in_box(model, job, pen, x));
    }
    let density = model.pdf_at(x.p);
    let te_tk = job.t_e / job.t_k;
    let k = slots_needed(job, x.q);
    let ln_f = ln_cdf(f, sf);

    let cm = model.conditional_mean_at(x.p)?;
    let dcm = density * (x.p - cm) / f;

    let ec = job.t_k * h_ratio(k, sf);
    let dec_p = -job.t_k * density * h_ratio_deriv(k, f, sf);
    // t_e F^K ln F / (1 - F)
    let dec_q = job.t_e * (k * ln_f).exp() * (ln_f / sf);

    let a = job.t_s / job.t_k - k + 1.0;
    let b = k - 2.0;
    let late = late_from(job, k, f, sf);
    // L·A/S and L·B/F written as powers so they stay finite as S → 0
    let late_over_s = job.t_k * ((a - 1.0) * sf.ln() + b * ln_f).exp();
    let dl_p = density * (-a * late_over_s + b * late / f);
    let dl_q = late * (sf.ln() - ln_f) * te_tk;

    let incomplete_active = (1.0 - x.q) * job.t_e - ec >= 0.0;
    let ci = if incomplete_active { pen.c_i } else { 0.0 };

    let gp = dcm * ec + cm * dec_p - ci * dec_p + pen.c_s * dl_p;
    let gq = job.t_e * model.pi_max() + cm * dec_q + ci * (-job.t_e - dec_q) + pen.c_s * dl_q;
    Ok((gp, gq))
}

fn fd_grad_in_box(
    model: &PriceModel,
    job: &JobSpec,
    pen: &PenaltyParams,
    x: &Strategy,
) -> (f64, f64) {
    let b = model.bounds();
    let hp = 1e-6 * b.width();
    let hq = 1e-6;
    let gp = fd_partial_in_box(
        |p| objective_raw(model, job, pen, p, x.q),
        x.p,
        b.pi_min,
        b.pi_max,
        hp,
    );
    let gq = fd_partial_in_box(
        |q| objective_raw(model, job, pen, x.p, q),
        x.q,
        0.0,
        1.0,
        hq,
    );
    (gp, gq)
}

/// One accepted SCA iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaIterate {
    pub nu: usize,
    pub p: f64,
    pub q: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaResult {
    pub strategy: Strategy,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// where the winning run started
    pub start: Strategy,
    /// objective at the OTR-EG initialiser
    pub initial_objective: f64,
    pub trace: Vec<ScaIterate>,
}

impl ScaResult {
    /// Writes the trace as CSV with columns `nu,p,q,u`.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for it in &self.trace {
            w.serialize(it).map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<trace>".into(),
            msg: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Box2 {
    p_lo: f64,
    p_hi: f64,
    q_lo: f64,
    q_hi: f64,
}

impl Box2 {
    fn project(&self, p: f64, q: f64) -> (f64, f64) {
        (p.clamp(self.p_lo, self.p_hi), q.clamp(self.q_lo, self.q_hi))
    }
}

/// Runs SCA from the OTR-EG solution (and optionally 8 jittered starts).
pub fn sca_solve(
    model: &PriceModel,
    job: &JobSpec,
    pen: &PenaltyParams,
    cfg: &ScaConfig,
) -> Result<ScaResult> {
    cfg.validate()?;
    let (q_lo, q_hi) = job.q_interval()?;
    let bx = Box2 {
        p_lo: model.pi_min(),
        p_hi: model.pi_max(),
        q_lo,
        q_hi,
    };
    let init = solve_otr_eg(model, job)?.strategy;
    let (p0, q0) = bx.project(init.p, init.q);
    let x0 = Strategy { q: q0, p: p0 };
    let initial_objective = objective_p2(model, job, pen, &x0)?;

    let mut starts = vec![x0];
    if cfg.multi_start {
        starts.extend(jittered_starts(&bx, x0));
    }
    let runs: Vec<Result<ScaResult>> = starts
        .par_iter()
        .map(|s| sca_from(model, job, pen, cfg, &bx, *s, initial_objective))
        .collect();
    let mut best: Option<ScaResult> = None;
    for r in runs {
        let r = r?;
        let better = match &best {
            None => true,
            Some(b) => {
                r.objective < b.objective
                    || (r.objective == b.objective
                        && (r.strategy.q, r.strategy.p) < (b.strategy.q, b.strategy.p))
            }
        };
        if better {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one start"))
}

fn jittered_starts(bx: &Box2, x0: Strategy) -> Vec<Strategy> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5CA0_5CA0);
    let (wp, wq) = (bx.p_hi - bx.p_lo, bx.q_hi - bx.q_lo);
    (0..8)
        .map(|_| {
            let dp = (rng.random::<f64>() - 0.5) * 0.5 * wp;
            let dq = (rng.random::<f64>() - 0.5) * 0.5 * wq;
            let (p, q) = bx.project(x0.p + dp, x0.q + dq);
            Strategy { q, p }
        })
        .collect()
}

fn sca_from(
    model: &PriceModel,
    job: &JobSpec,
    pen: &PenaltyParams,
    cfg: &ScaConfig,
    bx: &Box2,
    start: Strategy,
    initial_objective: f64,
) -> Result<ScaResult> {
    let (mut p, mut q) = bx.project(start.p, start.q);
    let mut u = objective_p2(model, job, pen, &Strategy { q, p })?;
    let mut tau = cfg.tau;
    let mut trace = vec![ScaIterate { nu: 0, p, q, u }];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        let (gp, gq) = grad_u(model, job, pen, &Strategy { q, p })?;
        let (sp, sq) = bx.project(p - gp, q - gq);
        let stationarity = (p - sp).abs().max((q - sq).abs());
        let grad_norm = gp.hypot(gq);

        // grow τ until the damped step does not increase U
        let (np, nq, nu) = loop {
            let (hp, hq) = bx.project(p - gp / tau, q - gq / tau);
            let cp = p + cfg.gamma * (hp - p);
            let cq = q + cfg.gamma * (hq - q);
            let cu = objective_p2(model, job, pen, &Strategy { q: cq, p: cp })?;
            if cu <= u {
                break (cp, cq, cu);
            }
            tau *= 2.0;
            if !tau.is_finite() || tau > 1e300 {
                return Err(Error::Numerical("SCA step size collapsed".into()));
            }
        };
        iterations += 1;
        let delta = u - nu;
        p = np;
        q = nq;
        u = nu;
        trace.push(ScaIterate {
            nu: iterations,
            p,
            q,
            u,
        });
        if delta.abs() < cfg.epsilon && stationarity <= 1e-4 * (1.0 + grad_norm) {
            converged = true;
            break;
        }
        tau = (tau / 2.0).max(1e-12);
    }
    Ok(ScaResult {
        strategy: Strategy { q, p },
        objective: u,
        iterations,
        converged,
        start,
        initial_objective,
        trace,
    })
}
