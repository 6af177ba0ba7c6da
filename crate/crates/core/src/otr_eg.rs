//! One-time request with an expected-completion guarantee.
//!
//! The spot share must, in expectation, both fit inside one uninterrupted run
//! (`(1 - q) t_e ≤ t_k / (1 - F)`) and finish before the deadline once the
//! expected entry delay is added (`t_n + (1 - q) t_e ≤ t_s`). Minimising
//! `Φ₁ = q t_e π̄ + (1 - q) t_e E[π | π ≤ p]` under those constraints has a
//! closed form:
//!
//! * `t_s ≥ t_e`: bid `F⁻¹(1 - t_k / t_e)` with no on-demand share.
//! * `t_e / 2 < t_s < t_e`: bid the larger root of `ψ₁ = t_k π̄` and `ψ₂ = 0`
//!   on `[F⁻¹(1/2), π̄]`, then take the smallest `q` the deadline allows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::job::{JobSpec, Strategy};
use crate::numeric::{bisect_root, RootBracket};
use crate::price_model::PriceModel;

// relative slack when checking constraints on solver output
const FEAS_TOL: f64 = 1e-9;

/// Expected length of one uninterrupted run, `t_k / (1 - F(p))`.
///
/// Infinite at `F = 1`: a bid at the ceiling is never outbid.
pub fn expected_uninterrupted_run(model: &PriceModel, job: &JobSpec, p: f64) -> Result<f64> {
    let sf = model.sf(p)?;
    Ok(if sf <= 0.0 {
        f64::INFINITY
    } else {
        job.t_k / sf
    })
}

/// Expected wait before the first winning slot, `t_k (1/F - 1)`.
pub fn expected_entry_time(model: &PriceModel, job: &JobSpec, p: f64) -> Result<f64> {
    let f = model.cdf(p)?;
    if f <= 0.0 {
        return Err(Error::NeverEnters(p));
    }
    Ok(job.t_k * (1.0 / f - 1.0))
}

/// `Φ₁(q, p) = q t_e π̄ + (1 - q) t_e E[π | π ≤ p]`.
pub fn objective_p1(model: &PriceModel, job: &JobSpec, x: &Strategy) -> Result<f64> {
    x.check_bounds(model)?;
    let on_demand = x.q * job.t_e * model.pi_max();
    if x.q >= 1.0 {
        return Ok(on_demand);
    }
    Ok(on_demand + (1.0 - x.q) * job.t_e * model.conditional_mean(x.p)?)
}

/// Whether `x` satisfies every one-time constraint: the box, `q t_e ≤ t_s`,
/// the run-length bound and entry-plus-run within the deadline.
pub fn feasible_p1(model: &PriceModel, job: &JobSpec, x: &Strategy) -> bool {
    if x.check_bounds(model).is_err() {
        return false;
    }
    let tol = FEAS_TOL * job.t_s;
    if x.q * job.t_e > job.t_s + tol {
        return false;
    }
    let spot = (1.0 - x.q) * job.t_e;
    if spot <= 0.0 {
        return true;
    }
    let f = model.cdf_at(x.p);
    if f <= 0.0 {
        return false;
    }
    let sf = model.sf_at(x.p);
    let run_ok = sf <= 0.0 || spot <= job.t_k / sf * (1.0 + FEAS_TOL);
    let entry = job.t_k * (1.0 / f - 1.0);
    run_ok && entry + spot <= job.t_s + tol
}

/// `ψ₁(p) = 2 t_k I/F + p (t_s + t_k) F - p t_k - (t_s + t_k) I`, where
/// `I = ∫ x f dx` up to `p`.
///
/// `ψ₁(p) = t_k π̄` is the stationarity condition of `Φ₁` once `q` is
/// eliminated through the deadline constraint.
pub fn psi1(model: &PriceModel, job: &JobSpec, p: f64) -> Result<f64> {
    let f = model.cdf(p)?;
    if f <= 0.0 {
        return Err(Error::UndefinedConditional(p));
    }
    let i = model.partial_mean_at(p);
    let (ts, tk) = (job.t_s, job.t_k);
    Ok(2.0 * tk * i / f + p * (ts + tk) * f - p * tk - (ts + tk) * i)
}

/// `ψ₂(p) = (t_s + t_k) F - (t_s + t_k) F² - t_k`.
pub fn psi2(model: &PriceModel, job: &JobSpec, p: f64) -> Result<f64> {
    let f = model.cdf(p)?;
    let sf = model.sf_at(p);
    Ok((job.t_s + job.t_k) * f * sf - job.t_k)
}

/// `Φ₁` with `q` eliminated by making the deadline constraint tight.
///
/// Its derivative in `p` has the sign of `ψ₁(p) - t_k π̄`.
pub fn reduced_objective(model: &PriceModel, job: &JobSpec, p: f64) -> Result<f64> {
    let t_n = expected_entry_time(model, job, p)?;
    let cm = model.conditional_mean(p)?;
    Ok((job.t_e - job.t_s + t_n) * model.pi_max() + (job.t_s - t_n) * cm)
}

/// Which closed form produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EgRegime {
    /// `t_e / 2 < t_s < t_e`
    TightDeadline,
    /// `t_s ≥ t_e`
    LooseDeadline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgSolution {
    pub strategy: Strategy,
    pub regime: EgRegime,
    pub objective: f64,
    /// roots of `ψ₁ - t_k π̄` and `ψ₂` (tight regime only)
    pub psi1_root: Option<f64>,
    pub psi2_root: Option<f64>,
    /// the closed-form `q` had to be clamped into `[0, 1]`
    pub clamped: bool,
}

/// Optimal one-time portfolio without penalties.
pub fn solve_otr_eg(model: &PriceModel, job: &JobSpec) -> Result<EgSolution> {
    job.require_splittable()?;
    if job.t_s >= job.t_e {
        return solve_loose(model, job);
    }
    let lo = model.quantile_at(0.5);
    let hi = model.pi_max();
    let bracket = RootBracket::with_default_tol(lo, hi)?;
    let target = job.t_k * hi;

    let g = |p: f64| psi1(model, job, p).map(|v| v - target).unwrap_or(f64::NAN);
    let p1 = if g(lo) >= 0.0 {
        // already past the stationary point at the median
        lo
    } else {
        match bisect_root(g, bracket) {
            Ok(p) => p,
            Err(Error::NoRoot { .. }) => lo,
            Err(e) => return Err(e),
        }
    };

    let h = |p: f64| psi2(model, job, p).unwrap_or(f64::NAN);
    let p2 = if h(lo) <= 0.0 {
        lo
    } else {
        bisect_root(h, bracket)?
    };

    let p = p1.max(p2);
    let f = model.cdf_at(p);
    let raw_q = 1.0 - (job.t_s - job.t_k * (1.0 / f - 1.0)) / job.t_e;
    let q = raw_q.clamp(0.0, 1.0);
    let clamped = q != raw_q;
    if clamped {
        log::warn!("closed-form q = {raw_q} clamped into [0, 1]");
    }
    let strategy = Strategy { q, p };
    if !feasible_p1(model, job, &strategy) {
        return Err(Error::Infeasible(format!(
            "no one-time portfolio meets the deadline t_s = {} (candidate q = {q}, p = {p})",
            job.t_s
        )));
    }
    Ok(EgSolution {
        objective: objective_p1(model, job, &strategy)?,
        strategy,
        regime: EgRegime::TightDeadline,
        psi1_root: Some(p1),
        psi2_root: Some(p2),
        clamped,
    })
}

fn solve_loose(model: &PriceModel, job: &JobSpec) -> Result<EgSolution> {
    if job.t_k >= job.t_e {
        return Err(Error::Precondition(format!(
            "slot length t_k = {} must be below t_e = {}",
            job.t_k, job.t_e
        )));
    }
    let p = model.quantile_at(1.0 - job.t_k / job.t_e);
    let strategy = Strategy { q: 0.0, p };
    if !feasible_p1(model, job, &strategy) {
        log::warn!(
            "bid {p} leaves expected entry plus run above t_s = {}; slack is below one slot",
            job.t_s
        );
    }
    Ok(EgSolution {
        objective: objective_p1(model, job, &strategy)?,
        strategy,
        regime: EgRegime::LooseDeadline,
        psi1_root: None,
        psi2_root: None,
        clamped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;
    use crate::price_model::{BoundedParetoModel, PriceBounds, TruncatedExponentialModel};

    fn pareto() -> PriceModel {
        BoundedParetoModel::new(PriceBounds::new(0.0321, 0.35).unwrap(), 3.0, 0.983)
            .unwrap()
            .into()
    }

    fn job(ts: f64) -> JobSpec {
        JobSpec::new(3600.0, ts, 300.0, 10.0).unwrap()
    }

    #[test]
    fn run_and_entry_substitution() {
        let m = pareto();
        let j = job(2000.0);
        let med = m.quantile(0.5).unwrap();
        assert!((expected_uninterrupted_run(&m, &j, med).unwrap() - 600.0).abs() < 1e-6);
        assert!((expected_entry_time(&m, &j, med).unwrap() - 300.0).abs() < 1e-6);
        assert_eq!(
            expected_uninterrupted_run(&m, &j, 0.35).unwrap(),
            f64::INFINITY
        );
        assert_eq!(expected_entry_time(&m, &j, 0.35).unwrap(), 0.0);
        assert!(matches!(
            expected_entry_time(&m, &j, 0.0321),
            Err(Error::NeverEnters(_))
        ));
    }

    #[test]
    fn objective_edge_cases() {
        let m = pareto();
        let j = job(2000.0);
        let all_od = objective_p1(&m, &j, &Strategy::new(1.0, 0.0321)).unwrap();
        assert!((all_od - 3600.0 * 0.35).abs() < 1e-12);
        let all_spot = objective_p1(&m, &j, &Strategy::new(0.0, 0.35)).unwrap();
        assert!((all_spot - 3600.0 * m.conditional_mean(0.35).unwrap()).abs() < 1e-9);
        let x = Strategy::new(0.3, 0.2);
        let i = integrate(|v| v * m.pdf_at(v), 0.0321, 0.2, 1e-12);
        let f = integrate(|v| m.pdf_at(v), 0.0321, 0.2, 1e-12);
        let oracle = 0.3 * 3600.0 * 0.35 + 0.7 * 3600.0 * i / f;
        assert!((objective_p1(&m, &j, &x).unwrap() - oracle).abs() < 1e-8);
    }

    #[test]
    fn feasibility_examples() {
        let m = pareto();
        assert!(feasible_p1(&m, &job(4000.0), &Strategy::new(1.0, 0.1)));
        assert!(!feasible_p1(&m, &job(2000.0), &Strategy::new(0.0, 0.0321)));
    }

    #[test]
    fn psi2_substitutions() {
        let m = pareto();
        let j = job(2000.0);
        assert!((psi2(&m, &j, 0.35).unwrap() + 300.0).abs() < 1e-12);
        let med = m.quantile(0.5).unwrap();
        assert!((psi2(&m, &j, med).unwrap() - (2300.0 / 4.0 - 300.0)).abs() < 1e-6);
    }

    #[test]
    fn loose_deadline_uses_quantile() {
        let m = pareto();
        let s = solve_otr_eg(&m, &job(4000.0)).unwrap();
        assert_eq!(s.regime, EgRegime::LooseDeadline);
        assert_eq!(s.strategy.q, 0.0);
        assert!((m.cdf(s.strategy.p).unwrap() - 11.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn tight_deadline_claims() {
        let m = pareto();
        for ts in [1900.0, 2000.0, 2700.0, 3300.0, 3550.0] {
            let s = solve_otr_eg(&m, &job(ts)).unwrap();
            assert!(s.strategy.q <= 0.5, "ts={ts}");
            assert!(m.cdf(s.strategy.p).unwrap() >= 0.5, "ts={ts}");
            assert!(feasible_p1(&m, &job(ts), &s.strategy));
            assert!(!s.clamped);
        }
    }

    #[test]
    fn half_bound_on_q_breaks_just_above_half_deadline() {
        // the ψ₂ root pins F(1 - F) = t_k / (t_s + t_k), so at t_s = 1850 the
        // entry delay exceeds the 50 s of slack above t_e / 2
        let m = pareto();
        let s = solve_otr_eg(&m, &job(1850.0)).unwrap();
        let f = m.cdf(s.strategy.p).unwrap();
        assert!((f * (1.0 - f) - 300.0 / 2150.0).abs() < 1e-9);
        assert!(s.strategy.q > 0.5);
        assert!(f >= 0.5);
    }

    #[test]
    fn table_values_for_r3_fit() {
        let m: PriceModel = TruncatedExponentialModel::new(
            PriceBounds::new(0.0173, 0.166).unwrap(),
            44350.0,
            -285.7,
        )
        .unwrap()
        .into();
        let s = solve_otr_eg(&m, &job(2000.0)).unwrap();
        assert!(
            (s.strategy.p / 0.04258 - 1.0).abs() < 0.05,
            "{}",
            s.strategy.p
        );
        assert!(
            (s.strategy.q / 0.444505 - 1.0).abs() < 0.05,
            "{}",
            s.strategy.q
        );
    }

    #[test]
    fn rejects_impossible_deadline() {
        assert!(matches!(
            solve_otr_eg(&pareto(), &job(1700.0)),
            Err(Error::Infeasible(_))
        ));
    }
}
