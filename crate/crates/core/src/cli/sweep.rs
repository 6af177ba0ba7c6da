use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::job::JobSpec;
use crate::otr_p::PenaltyParams;

/// Quantity varied by `--sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParam {
    #[serde(rename = "t_s")]
    Deadline,
    #[serde(rename = "t_r")]
    Recovery,
    #[serde(rename = "c_I")]
    IncompletePenalty,
    #[serde(rename = "c_s")]
    LatePenalty,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Deadline => "t_s",
            SweepParam::Recovery => "t_r",
            SweepParam::IncompletePenalty => "c_I",
            SweepParam::LatePenalty => "c_s",
        }
    }

    /// Applies one sweep value to a job and penalty pair.
    pub fn apply(self, value: f64, job: &mut JobSpec, pen: &mut PenaltyParams) {
        match self {
            SweepParam::Deadline => job.t_s = value,
            SweepParam::Recovery => job.t_r = value,
            SweepParam::IncompletePenalty => pen.c_i = value,
            SweepParam::LatePenalty => pen.c_s = value,
        }
    }
}

/// `PARAM:FROM:TO:STEP`, inclusive of `TO` when it lies on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.from + self.step * i as f64).collect()
    }
}

impl FromStr for SweepSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [name, from, to, step] = parts[..] else {
            return Err(Error::invalid(format!(
                "sweep '{s}' is not PARAM:FROM:TO:STEP"
            )));
        };
        let param = match name {
            "t_s" | "ts" => SweepParam::Deadline,
            "t_r" | "tr" => SweepParam::Recovery,
            "c_I" | "c_i" | "ci" => SweepParam::IncompletePenalty,
            "c_s" | "cs" => SweepParam::LatePenalty,
            _ => {
                return Err(Error::invalid(format!(
                    "cannot sweep '{name}'; use t_s, t_r, c_I or c_s"
                )))
            }
        };
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::invalid(format!("sweep bound '{v}' is not a number")))
        };
        let (from, to, step) = (num(from)?, num(to)?, num(step)?);
        if !(step > 0.0) || to < from {
            return Err(Error::invalid(format!(
                "sweep needs FROM <= TO and STEP > 0, got {from}:{to}:{step}"
            )));
        }
        if (to - from) / step > 1e6 {
            return Err(Error::invalid("sweep has more than a million points"));
        }
        Ok(SweepSpec {
            param,
            from,
            to,
            step,
        })
    }
}
