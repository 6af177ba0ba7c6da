use serde::{Deserialize, Serialize};

use super::PriceBounds;
use crate::error::{Error, Result};

/// Histogram density with a piecewise-linear CDF.
///
/// Densities are rescaled at construction so they integrate to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EmpiricalParams", into = "EmpiricalParams")]
pub struct EmpiricalModel {
    bounds: PriceBounds,
    edges: Vec<f64>,
    densities: Vec<f64>,
    // cumulative mass and partial mean at each edge
    cum: Vec<f64>,
    cum_mean: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct EmpiricalParams {
    pi_min: f64,
    pi_max: f64,
    bin_edges: Vec<f64>,
    bin_densities: Vec<f64>,
}

impl TryFrom<EmpiricalParams> for EmpiricalModel {
    type Error = Error;
    fn try_from(s: EmpiricalParams) -> Result<Self> {
        let m = EmpiricalModel::new(s.bin_edges, s.bin_densities)?;
        let b = m.bounds;
        if (b.pi_min - s.pi_min).abs() > 1e-12 || (b.pi_max - s.pi_max).abs() > 1e-12 {
            return Err(Error::invalid(
                "pi_min/pi_max must equal the first and last bin edges",
            ));
        }
        Ok(m)
    }
}

impl From<EmpiricalModel> for EmpiricalParams {
    fn from(m: EmpiricalModel) -> Self {
        EmpiricalParams {
            pi_min: m.bounds.pi_min,
            pi_max: m.bounds.pi_max,
            bin_edges: m.edges,
            bin_densities: m.densities,
        }
    }
}

impl EmpiricalModel {
    pub fn new(edges: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || densities.len() + 1 != edges.len() {
            return Err(Error::invalid(format!(
                "need n+1 edges for n densities, got {} edges and {} densities",
                edges.len(),
                densities.len()
            )));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("bin edges must be strictly increasing"));
        }
        if densities.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::invalid(
                "bin densities must be finite and nonnegative",
            ));
        }
        let bounds = PriceBounds::new(edges[0], edges[edges.len() - 1])?;
        let mass: f64 = densities
            .iter()
            .zip(edges.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum();
        if !(mass > 0.0) {
            return Err(Error::invalid("histogram has zero total mass"));
        }
        let densities: Vec<f64> = if (mass - 1.0).abs() > 1e-12 {
            densities.iter().map(|d| d / mass).collect()
        } else {
            densities
        };
        let mut cum = Vec::with_capacity(edges.len());
        let mut cum_mean = Vec::with_capacity(edges.len());
        let (mut c, mut cm) = (0.0, 0.0);
        cum.push(0.0);
        cum_mean.push(0.0);
        for (d, w) in densities.iter().zip(edges.windows(2)) {
            c += d * (w[1] - w[0]);
            cm += d * (w[1] * w[1] - w[0] * w[0]) / 2.0;
            cum.push(c);
            cum_mean.push(cm);
        }
        // pin the top edge to exactly one
        let last = cum.len() - 1;
        cum[last] = 1.0;
        let model = EmpiricalModel {
            bounds,
            edges,
            densities,
            cum,
            cum_mean,
        };
        if !super::PriceModel::Empirical(model.clone()).pdf_nonincreasing() {
            log::info!("empirical density is not monotonically nonincreasing");
        }
        Ok(model)
    }

    pub fn bounds(&self) -> PriceBounds {
        self.bounds
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn bin_densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn bin_count(&self) -> usize {
        self.densities.len()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    fn bin_of(&self, p: f64) -> usize {
        let i = self.edges.partition_point(|&e| e <= p);
        i.saturating_sub(1).min(self.densities.len() - 1)
    }

    pub(super) fn cdf(&self, p: f64) -> f64 {
        let i = self.bin_of(p);
        (self.cum[i] + self.densities[i] * (p - self.edges[i])).clamp(0.0, 1.0)
    }

    pub(super) fn sf(&self, p: f64) -> f64 {
        let i = self.bin_of(p);
        let rest = self.densities[i] * (self.edges[i + 1] - p);
        (rest + (1.0 - self.cum[i + 1])).clamp(0.0, 1.0)
    }

    pub(super) fn pdf(&self, p: f64) -> f64 {
        self.densities[self.bin_of(p)]
    }

    pub(super) fn partial_mean(&self, p: f64) -> f64 {
        let i = self.bin_of(p);
        let e = self.edges[i];
        self.cum_mean[i] + self.densities[i] * (p * p - e * e) / 2.0
    }

    pub(super) fn conditional_mean(&self, p: f64) -> f64 {
        let f = self.cdf(p);
        let i = self.bin_of(p);
        if self.cum[i] == 0.0 {
            // all mass below p sits in one bin, so its mean is the midpoint
            return 0.5 * (self.edges[i] + p);
        }
        self.partial_mean(p) / f
    }

    pub(super) fn quantile(&self, u: f64) -> f64 {
        let i = self
            .cum
            .partition_point(|&c| c < u)
            .clamp(1, self.edges.len() - 1)
            - 1;
        let d = self.densities[i];
        if d <= 0.0 {
            return self.edges[i + 1];
        }
        (self.edges[i] + (u - self.cum[i]) / d).clamp(self.edges[i], self.edges[i + 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalises_and_interpolates() {
        let m = EmpiricalModel::new(vec![0.0, 1.0, 2.0], vec![3.0, 1.0]).unwrap();
        assert_eq!(m.bin_densities(), &[0.75, 0.25]);
        assert!((m.cdf(0.5) - 0.375).abs() < 1e-15);
        assert!((m.cdf(1.5) - 0.875).abs() < 1e-15);
        assert!((m.sf(1.5) - 0.125).abs() < 1e-15);
        assert!((m.quantile(0.875) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn zero_density_bins_keep_quantile_continuous() {
        let m = EmpiricalModel::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.0, 1.0]).unwrap();
        assert!((m.cdf(1.7) - 0.5).abs() < 1e-15);
        let q = m.quantile(0.5);
        assert!((m.cdf(q) - 0.5).abs() < 1e-15);
        assert!((m.quantile(0.75) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_malformed_histograms() {
        assert!(EmpiricalModel::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(EmpiricalModel::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(EmpiricalModel::new(vec![0.0, 1.0], vec![-1.0]).is_err());
        assert!(EmpiricalModel::new(vec![0.0, 1.0], vec![0.0]).is_err());
    }
}
