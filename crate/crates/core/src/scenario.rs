//! Built-in parameter sets, so experiments run without any price history.
//!
//! * `pareto_nominal`: bounded-Pareto prices on `[0.0321, 0.35]` with
//!   `α = 3`, `θ = 0.983`; `t_e = 3600`, `t_k = 300`, `t_r = 10`.
//! * `pareto_calibrated`: the same bounds with `α = 7`. Its CDF `1 - u⁹`
//!   reproduces the published deadline-sweep curves, which the nominal
//!   shape does not.
//! * `r3large_*`, `r4_*`, `d2_*`: exponential fits for three EC2 instance
//!   types, `t_e = 3600`, `t_k = 300`, deadline 2000 s or 4000 s.
//!
//! Every scenario carries penalties `c_I = π̄/3` and `c_s = π̄/10`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::job::JobSpec;
use crate::otr_p::PenaltyParams;
use crate::price_model::{BoundedParetoModel, PriceBounds, PriceModel, TruncatedExponentialModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub model: PriceModel,
    pub job: JobSpec,
    pub penalty: PenaltyParams,
}

/// Names accepted by [`builtin`].
pub const NAMES: [&str; 8] = [
    "pareto_nominal",
    "pareto_calibrated",
    "r3large_2000",
    "r4_2000",
    "d2_2000",
    "r3large_4000",
    "r4_4000",
    "d2_4000",
];

pub const PARETO_MIN: f64 = 0.0321;
pub const PARETO_MAX: f64 = 0.35;
pub const PARETO_THETA: f64 = 0.983;
pub const NOMINAL_ALPHA: f64 = 3.0;
pub const CALIBRATED_ALPHA: f64 = 7.0;

pub fn pareto_model(alpha: f64) -> PriceModel {
    let bounds = PriceBounds::new(PARETO_MIN, PARETO_MAX).expect("static bounds");
    BoundedParetoModel::new(bounds, alpha, PARETO_THETA)
        .expect("static shape")
        .into()
}

pub fn nominal_pareto() -> PriceModel {
    pareto_model(NOMINAL_ALPHA)
}

pub fn calibrated_pareto() -> PriceModel {
    pareto_model(CALIBRATED_ALPHA)
}

/// Job used with the Pareto models, for a given deadline.
pub fn pareto_job(t_s: f64) -> JobSpec {
    JobSpec {
        t_e: 3600.0,
        t_s,
        t_k: 300.0,
        t_r: 10.0,
    }
}

/// `c_I = π̄/3`, `c_s = π̄/10`.
pub fn default_penalty(pi_max: f64) -> PenaltyParams {
    PenaltyParams {
        c_i: pi_max / 3.0,
        c_s: pi_max / 10.0,
    }
}

/// Exponential fit `(π̲, π̄, a, b)` for an instance type.
#[allow(clippy::approx_constant)]
pub fn instance_fit(instance: &str) -> Option<(f64, f64, f64, f64)> {
    match instance {
        "r3large" => Some((0.0173, 0.166, 44350.0, -285.7)),
        "r4" => Some((0.4343, 4.256, 8126.0, -14.39)),
        "d2" => Some((0.138, 1.38, 1571.0, -28.84)),
        _ => None,
    }
}

pub fn instance_model(instance: &str) -> Option<PriceModel> {
    let (lo, hi, a, b) = instance_fit(instance)?;
    let bounds = PriceBounds::new(lo, hi).ok()?;
    Some(TruncatedExponentialModel::new(bounds, a, b).ok()?.into())
}

pub fn builtin(name: &str) -> Result<Scenario> {
    let (model, job) = match name {
        "pareto_nominal" => (nominal_pareto(), pareto_job(2000.0)),
        "pareto_calibrated" => (calibrated_pareto(), pareto_job(2000.0)),
        _ => {
            let (instance, deadline) = name.rsplit_once('_').ok_or_else(|| unknown(name))?;
            let t_s: f64 = match deadline {
                "2000" => 2000.0,
                "4000" => 4000.0,
                _ => return Err(unknown(name)),
            };
            let model = instance_model(instance).ok_or_else(|| unknown(name))?;
            (
                model,
                JobSpec {
                    t_e: 3600.0,
                    t_s,
                    t_k: 300.0,
                    t_r: 10.0,
                },
            )
        }
    };
    let penalty = default_penalty(model.pi_max());
    Ok(Scenario {
        name: name.to_string(),
        model,
        job,
        penalty,
    })
}

fn unknown(name: &str) -> Error {
    Error::invalid(format!(
        "unknown scenario '{name}'; known: {}",
        NAMES.join(", ")
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_names_resolve() {
        for n in NAMES {
            let s = builtin(n).unwrap();
            assert_eq!(s.name, n);
            s.job.validate().unwrap();
            assert!(s.penalty.c_s <= s.penalty.c_i);
        }
        assert!(builtin("m5_2000").is_err());
        assert!(builtin("r4_3000").is_err());
    }

    #[test]
    fn calibrated_cdf_is_ninth_power() {
        let m = calibrated_pareto();
        let p = 0.2;
        let u: f64 = (0.35 - p) / (0.35 - 0.0321);
        assert!((m.cdf(p).unwrap() - (1.0 - u.powi(9))).abs() < 1e-14);
    }
}
