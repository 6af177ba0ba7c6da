use serde::{Deserialize, Serialize};

use super::TraceOutcome;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std_err: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len();
        if n == 0 {
            return Stat {
                mean: f64::NAN,
                std_err: f64::NAN,
            };
        }
        if values.iter().all(|v| *v == values[0]) {
            return Stat {
                mean: values[0],
                std_err: 0.0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Stat { mean, std_err: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Stat {
            mean,
            std_err: (var / n as f64).sqrt(),
        }
    }
}

/// Averages over simulated traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub runs: usize,
    pub spot_cost: Stat,
    pub ondemand_cost: Stat,
    pub penalty_cost: Stat,
    pub total_cost: Stat,
    pub completion_time: Stat,
    pub completed_seconds: Stat,
    pub late_seconds: Stat,
    /// mean over the runs that were admitted at least once
    pub entry_delay: Option<Stat>,
    pub fraction_late: f64,
    pub fraction_incomplete: f64,
    pub fraction_interrupted: f64,
    pub fraction_admitted: f64,
    /// a single run: standard errors are reported as zero
    pub degenerate_sample: bool,
}

impl AggregateStats {
    /// `spot_work` is the spot share in seconds, used to decide completeness.
    pub fn from_traces(traces: &[TraceOutcome], spot_work: f64) -> AggregateStats {
        let n = traces.len();
        let col = |f: fn(&TraceOutcome) -> f64| Stat::of(&traces.iter().map(f).collect::<Vec<_>>());
        let frac = |pred: &dyn Fn(&TraceOutcome) -> bool| {
            traces.iter().filter(|t| pred(t)).count() as f64 / n.max(1) as f64
        };
        let delays: Vec<f64> = traces.iter().filter_map(|t| t.entry_delay).collect();
        AggregateStats {
            runs: n,
            spot_cost: col(|t| t.spot_cost),
            ondemand_cost: col(|t| t.ondemand_cost),
            penalty_cost: col(|t| t.penalty_cost),
            total_cost: col(|t| t.total_cost()),
            completion_time: col(|t| t.completion_time),
            completed_seconds: col(|t| t.completed_seconds),
            late_seconds: col(|t| t.late_seconds),
            entry_delay: if delays.is_empty() {
                None
            } else {
                Some(Stat::of(&delays))
            },
            fraction_late: frac(&|t| t.late_seconds > 0.0),
            fraction_incomplete: frac(&|t| {
                t.completed_seconds < spot_work - 1e-9 * spot_work.max(1.0)
            }),
            fraction_interrupted: frac(&|t| t.interrupted),
            fraction_admitted: delays.len() as f64 / n.max(1) as f64,
            degenerate_sample: n == 1,
        }
    }
}
