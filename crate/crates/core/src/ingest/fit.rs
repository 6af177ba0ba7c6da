use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::golden_section;
use crate::price_model::{
    BoundedParetoModel, EmpiricalModel, PriceModel, TruncatedExponentialModel,
};

const MAX_GN_ITER: usize = 50;

/// Outcome of fitting a parametric family to a histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub kind: String,
    pub params: BTreeMap<String, f64>,
    pub rss: f64,
    pub r2: f64,
    pub bins: usize,
    pub model: PriceModel,
    pub flags: Vec<String>,
}

impl FitReport {
    /// CSV of `bin_center,empirical_density,fitted_density`.
    pub fn write_plot_data<W: Write>(&self, empirical: &EmpiricalModel, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_center", "empirical_density", "fitted_density"])
            .map_err(|e| Error::Format(e.to_string()))?;
        for (c, d) in empirical
            .bin_centers()
            .iter()
            .zip(empirical.bin_densities())
        {
            let fitted = self.model.pdf_at(*c);
            w.write_record([c.to_string(), d.to_string(), fitted.to_string()])
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<plot-data>".into(),
            msg: e.to_string(),
        })
    }
}

fn positive_bins(emp: &EmpiricalModel) -> Result<usize> {
    let n = emp.bin_densities().iter().filter(|d| **d > 0.0).count();
    if n < 3 {
        return Err(Error::Precondition(format!(
            "need at least 3 bins with positive density, got {n}"
        )));
    }
    Ok(n)
}

fn goodness(y: &[f64], fitted: &[f64]) -> (f64, f64) {
    let rss: f64 = y.iter().zip(fitted).map(|(a, b)| (a - b).powi(2)).sum();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = if tss > 0.0 {
        1.0 - rss / tss
    } else if rss == 0.0 {
        1.0
    } else {
        0.0
    };
    (rss, r2)
}

/// Least-squares fit of `a·exp(b x)` to the bin-centre densities.
///
/// Starts from a log-linear regression over the positive bins and refines
/// `(ln a, b)` by damped Gauss–Newton on the raw densities.
pub fn fit_exponential(emp: &EmpiricalModel) -> Result<FitReport> {
    positive_bins(emp)?;
    let x = emp.bin_centers();
    let y = emp.bin_densities().to_vec();

    let pos: Vec<(f64, f64)> = x
        .iter()
        .zip(&y)
        .filter(|(_, v)| **v > 0.0)
        .map(|(a, b)| (*a, b.ln()))
        .collect();
    let n = pos.len() as f64;
    let mx = pos.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pos.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pos.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pos.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let mut b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let mut la = my - b * mx;

    let rss_of = |la: f64, b: f64| -> f64 {
        x.iter()
            .zip(&y)
            .map(|(xi, yi)| (yi - (la + b * xi).exp()).powi(2))
            .sum()
    };
    let mut rss = rss_of(la, b);
    for _ in 0..MAX_GN_ITER {
        let (mut j11, mut j12, mut j22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (xi, yi) in x.iter().zip(&y) {
            let g = (la + b * xi).exp();
            let r = yi - g;
            let (d1, d2) = (g, xi * g);
            j11 += d1 * d1;
            j12 += d1 * d2;
            j22 += d2 * d2;
            g1 += d1 * r;
            g2 += d2 * r;
        }
        let det = j11 * j22 - j12 * j12;
        if !(det.abs() > 0.0) || !det.is_finite() {
            break;
        }
        let step_a = (j22 * g1 - j12 * g2) / det;
        let step_b = (j11 * g2 - j12 * g1) / det;
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let cand = rss_of(la + t * step_a, b + t * step_b);
            if cand < rss {
                la += t * step_a;
                b += t * step_b;
                let gain = rss - cand;
                rss = cand;
                improved = gain > 1e-14 * rss.max(1e-300);
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }

    let a = la.exp();
    let fitted: Vec<f64> = x.iter().map(|xi| a * (b * xi).exp()).collect();
    let (rss, r2) = goodness(&y, &fitted);
    let mut flags = Vec::new();
    if b >= 0.0 {
        flags.push("non_decaying".to_string());
    }
    let model = TruncatedExponentialModel::new(emp.bounds(), a, b)?;
    Ok(FitReport {
        kind: "exponential".into(),
        params: BTreeMap::from([("a".to_string(), a), ("b".to_string(), b)]),
        rss,
        r2,
        bins: emp.bin_count(),
        model: model.into(),
        flags,
    })
}

// average density of the normalised bounded Pareto over each bin
fn pareto_bin_means(emp: &EmpiricalModel, alpha: f64) -> Vec<f64> {
    let b = emp.bounds();
    let kappa = alpha + 2.0;
    let sf = |x: f64| ((b.pi_max - x) / b.width()).clamp(0.0, 1.0).powf(kappa);
    emp.bin_edges()
        .windows(2)
        .map(|e| (sf(e[0]) - sf(e[1])) / (e[1] - e[0]))
        .collect()
}

/// Fits the shape `α` of the bounded Pareto density to a histogram.
///
/// The model's average density over each bin is matched to the bin height,
/// first by golden-section search over `ln α`, then by Gauss–Newton. Once
/// normalised, the density does not depend on `θ`; a fixed `θ` is stored
/// as given, otherwise the value that makes the unnormalised density
/// integrate to one is reported.
pub fn fit_bounded_pareto(emp: &EmpiricalModel, theta_fixed: Option<f64>) -> Result<FitReport> {
    positive_bins(emp)?;
    let y = emp.bin_densities().to_vec();
    let rss_of = |alpha: f64| -> f64 {
        pareto_bin_means(emp, alpha)
            .iter()
            .zip(&y)
            .map(|(m, v)| (v - m).powi(2))
            .sum()
    };
    let (lo, hi) = (1e-3f64.ln(), 500f64.ln());
    let mut alpha = golden_section(|la| rss_of(la.exp()), lo, hi, 1e-10).exp();
    let mut rss = rss_of(alpha);
    for _ in 0..MAX_GN_ITER {
        let h = 1e-6 * alpha;
        let m0 = pareto_bin_means(emp, alpha);
        let m1 = pareto_bin_means(emp, alpha + h);
        let (mut jj, mut jr) = (0.0, 0.0);
        for ((a, b), v) in m0.iter().zip(&m1).zip(&y) {
            let d = (b - a) / h;
            jj += d * d;
            jr += d * (v - a);
        }
        if !(jj > 0.0) {
            break;
        }
        let step = jr / jj;
        let cand_alpha = (alpha + step).max(1e-6);
        let cand = rss_of(cand_alpha);
        if !(cand < rss) {
            break;
        }
        let gain = rss - cand;
        alpha = cand_alpha;
        rss = cand;
        if gain <= 1e-14 * rss.max(1e-300) {
            break;
        }
    }

    let width = emp.bounds().width();
    let mut flags = Vec::new();
    let theta = match theta_fixed {
        Some(t) => {
            flags.push("theta_fixed".to_string());
            t
        }
        None => {
            flags.push("theta_from_normalization".to_string());
            alpha * width * width / (alpha + 2.0)
        }
    };
    let model = BoundedParetoModel::new(emp.bounds(), alpha, theta)?;
    let fitted = pareto_bin_means(emp, alpha);
    let (rss, r2) = goodness(&y, &fitted);
    Ok(FitReport {
        kind: "bounded_pareto".into(),
        params: BTreeMap::from([("alpha".to_string(), alpha), ("theta".to_string(), theta)]),
        rss,
        r2,
        bins: emp.bin_count(),
        model: model.into(),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{histogram, DensityOptions};
    use crate::price_model::PriceBounds;

    #[test]
    fn exact_pareto_histogram_refits_exactly() {
        let b = PriceBounds::new(0.0321, 0.35).unwrap();
        let edges: Vec<f64> = (0..=40)
            .map(|i| b.pi_min + b.width() * i as f64 / 40.0)
            .collect();
        let emp0 = EmpiricalModel::new(edges.clone(), vec![1.0; 40]).unwrap();
        let dens = pareto_bin_means(&emp0, 3.0);
        let emp = EmpiricalModel::new(edges, dens).unwrap();
        let r = fit_bounded_pareto(&emp, Some(0.983)).unwrap();
        assert!(r.rss < 1e-12, "{}", r.rss);
        assert!((r.params["alpha"] - 3.0).abs() < 1e-6);
        assert!(r.r2 > 0.999_999);
    }

    #[test]
    fn flat_density_is_flagged() {
        let edges: Vec<f64> = (0..=10).map(|i| 1.0 + i as f64 * 0.1).collect();
        let emp = EmpiricalModel::new(edges, vec![1.0; 10]).unwrap();
        let r = fit_exponential(&emp).unwrap();
        assert!(r.params["b"].abs() < 1e-8);
        assert_eq!(r.flags, vec!["non_decaying".to_string()]);
    }

    #[test]
    fn too_few_positive_bins() {
        let emp = EmpiricalModel::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(fit_exponential(&emp), Err(Error::Precondition(_))));
        assert!(matches!(
            fit_bounded_pareto(&emp, None),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn pareto_alpha_is_positive_for_decaying_data() {
        let prices: Vec<f64> = (0..200).map(|i| 1.0 + (i as f64 / 200.0).powi(3)).collect();
        let emp = histogram(
            &prices,
            None,
            &DensityOptions {
                bins: Some(10),
                ..Default::default()
            },
        )
        .unwrap();
        let r = fit_bounded_pareto(&emp, None).unwrap();
        assert!(r.params["alpha"] > 0.0);
    }
}
