use serde::{Deserialize, Serialize};

use super::PricePoint;
use crate::error::{Error, Result};
use crate::price_model::EmpiricalModel;

const MAX_BINS: usize = 10_000;

/// How each price observation is weighted in the histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// every event counts once
    #[default]
    Count,
    /// each event weighs as long as the price stayed in force
    Duration,
}

impl std::str::FromStr for Weighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "count" => Ok(Weighting::Count),
            "duration" => Ok(Weighting::Duration),
            _ => Err(Error::invalid(format!("unknown weighting '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DensityOptions {
    /// lower bound; defaults to the smallest observed price
    pub pi_min: Option<f64>,
    /// upper bound, normally the on-demand price; defaults to the largest
    /// observed price
    pub pi_max: Option<f64>,
    /// bin count; defaults to the Freedman–Diaconis rule
    pub bins: Option<usize>,
    pub weighting: Weighting,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + frac * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

/// Freedman–Diaconis bin count `⌈(hi - lo) / (2 IQR n^{-1/3})⌉` for sorted
/// data, with a single bin below four observations.
pub fn freedman_diaconis_bins(sorted: &[f64], lo: f64, hi: f64) -> usize {
    let n = sorted.len();
    if n < 4 {
        return 1;
    }
    let iqr = percentile(sorted, 0.75) - percentile(sorted, 0.25);
    if !(iqr > 0.0) {
        // Sturges when the middle half is a single value
        return ((n as f64).log2().ceil() as usize + 1).min(MAX_BINS);
    }
    let width = 2.0 * iqr / (n as f64).cbrt();
    (((hi - lo) / width).ceil() as usize).clamp(1, MAX_BINS)
}

/// Histogram of raw prices with optional weights.
pub fn histogram(
    prices: &[f64],
    weights: Option<&[f64]>,
    opts: &DensityOptions,
) -> Result<EmpiricalModel> {
    if prices.is_empty() {
        return Err(Error::EmptyData("no prices".into()));
    }
    if let Some(w) = weights {
        if w.len() != prices.len() {
            return Err(Error::invalid("weights and prices differ in length"));
        }
    }
    let mut sorted = prices.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (obs_lo, obs_hi) = (sorted[0], sorted[sorted.len() - 1]);
    if obs_lo == obs_hi {
        return Err(Error::DegenerateData(format!(
            "all {} prices equal {obs_lo}",
            prices.len()
        )));
    }
    let lo = opts.pi_min.unwrap_or(obs_lo);
    let hi = opts.pi_max.unwrap_or(obs_hi);
    if !(lo < hi) {
        return Err(Error::invalid(format!(
            "histogram bounds need lo < hi, got [{lo}, {hi}]"
        )));
    }
    let bins = match opts.bins {
        Some(0) => return Err(Error::invalid("bin count must be positive")),
        Some(b) => b,
        None => freedman_diaconis_bins(&sorted, lo, hi),
    };
    let width = (hi - lo) / bins as f64;
    let mut mass = vec![0.0; bins];
    let mut dropped = 0usize;
    for (i, &p) in prices.iter().enumerate() {
        if p < lo || p > hi {
            dropped += 1;
            continue;
        }
        let k = (((p - lo) / width) as usize).min(bins - 1);
        mass[k] += weights.map_or(1.0, |w| w[i]);
    }
    if dropped > 0 {
        log::warn!("{dropped} prices outside [{lo}, {hi}] left out of the histogram");
    }
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::EmptyData(
            "no prices inside the histogram bounds".into(),
        ));
    }
    let mut edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    edges[bins] = hi;
    let densities = mass
        .iter()
        .zip(edges.windows(2))
        .map(|(m, e)| m / (total * (e[1] - e[0])))
        .collect();
    EmpiricalModel::new(edges, densities)
}

/// Histogram density of a price history.
pub fn empirical_density(points: &[PricePoint], opts: &DensityOptions) -> Result<EmpiricalModel> {
    if points.len() < 2 {
        return Err(Error::EmptyData(format!(
            "need at least 2 prices, got {}",
            points.len()
        )));
    }
    match opts.weighting {
        Weighting::Count => {
            let prices: Vec<f64> = points.iter().map(|p| p.price).collect();
            histogram(&prices, None, opts)
        }
        Weighting::Duration => {
            let mut sorted = points.to_vec();
            sorted.sort_by_key(|p| p.timestamp);
            let mut durations: Vec<f64> = sorted
                .windows(2)
                .map(|w| (w[1].timestamp - w[0].timestamp) as f64)
                .collect();
            // the last price has no end; give it the median holding time
            let mut tmp = durations.clone();
            tmp.sort_by(f64::total_cmp);
            durations.push(percentile(&tmp, 0.5));
            if durations.iter().all(|d| *d <= 0.0) {
                return Err(Error::DegenerateData("all timestamps are equal".into()));
            }
            let prices: Vec<f64> = sorted.iter().map(|p| p.price).collect();
            histogram(&prices, Some(&durations), opts)
        }
    }
}
