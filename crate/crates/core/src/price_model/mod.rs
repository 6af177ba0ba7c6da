//! Spot-price distributions on a bounded support `[pi_min, pi_max]`.
//!
//! Prices are assumed i.i.d. across slots. Every model exposes the same
//! quantities the strategy solvers need: CDF `F`, survival `1 - F`, density,
//! the partial mean `∫ x f(x) dx` up to a bid, the conditional mean
//! `E[π | π ≤ p]`, the quantile and seeded inverse-CDF sampling.
//!
//! The checked methods (`cdf`, `pdf`, ...) reject prices outside the support.
//! The `*_at` variants clamp instead and are what the hot solver loops call.

mod empirical;
mod exponential;
mod pareto;

pub use empirical::EmpiricalModel;
pub use exponential::TruncatedExponentialModel;
pub use pareto::BoundedParetoModel;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Support of a price distribution, in $/hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceBounds {
    pub pi_min: f64,
    pub pi_max: f64,
}

impl PriceBounds {
    pub fn new(pi_min: f64, pi_max: f64) -> Result<Self> {
        if !(pi_min.is_finite() && pi_max.is_finite()) || pi_min < 0.0 || pi_min >= pi_max {
            return Err(Error::invalid(format!(
                "price bounds need 0 <= pi_min < pi_max, got [{pi_min}, {pi_max}]"
            )));
        }
        Ok(PriceBounds { pi_min, pi_max })
    }

    pub fn width(&self) -> f64 {
        self.pi_max - self.pi_min
    }

    pub fn contains(&self, p: f64) -> bool {
        p >= self.pi_min && p <= self.pi_max
    }

    pub fn clamp(&self, p: f64) -> f64 {
        p.clamp(self.pi_min, self.pi_max)
    }

    /// Accepts prices within a rounding hair of the support and snaps them in.
    pub(crate) fn check(&self, p: f64) -> Result<f64> {
        let slack = 1e-12 * self.width().max(self.pi_max);
        if p.is_nan() || p < self.pi_min - slack || p > self.pi_max + slack {
            return Err(Error::OutOfRange {
                price: p,
                lo: self.pi_min,
                hi: self.pi_max,
            });
        }
        Ok(self.clamp(p))
    }
}

/// A spot-price distribution behind one interface.
///
/// Serialized as a JSON object tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriceModel {
    BoundedPareto(BoundedParetoModel),
    Exponential(TruncatedExponentialModel),
    Empirical(EmpiricalModel),
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $body:expr) => {
        match $self {
            PriceModel::BoundedPareto($m) => $body,
            PriceModel::Exponential($m) => $body,
            PriceModel::Empirical($m) => $body,
        }
    };
}

impl PriceModel {
    pub fn kind(&self) -> &'static str {
        match self {
            PriceModel::BoundedPareto(_) => "bounded_pareto",
            PriceModel::Exponential(_) => "exponential",
            PriceModel::Empirical(_) => "empirical",
        }
    }

    pub fn bounds(&self) -> PriceBounds {
        dispatch!(self, m => m.bounds())
    }

    pub fn pi_min(&self) -> f64 {
        self.bounds().pi_min
    }

    pub fn pi_max(&self) -> f64 {
        self.bounds().pi_max
    }

    pub fn cdf(&self, p: f64) -> Result<f64> {
        let p = self.bounds().check(p)?;
        Ok(self.cdf_at(p))
    }

    /// `1 - F(p)`, computed without cancellation near the upper bound.
    pub fn sf(&self, p: f64) -> Result<f64> {
        let p = self.bounds().check(p)?;
        Ok(self.sf_at(p))
    }

    pub fn pdf(&self, p: f64) -> Result<f64> {
        let p = self.bounds().check(p)?;
        Ok(self.pdf_at(p))
    }

    /// `∫_{pi_min}^{p} x f(x) dx`.
    pub fn partial_mean(&self, p: f64) -> Result<f64> {
        let p = self.bounds().check(p)?;
        Ok(self.partial_mean_at(p))
    }

    /// `E[π | π ≤ p]`; undefined where `F(p) = 0`.
    pub fn conditional_mean(&self, p: f64) -> Result<f64> {
        let p = self.bounds().check(p)?;
        self.conditional_mean_at(p)
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::invalid(format!(
                "quantile level must lie in [0, 1], got {u}"
            )));
        }
        Ok(self.quantile_at(u))
    }

    /// Unconditional mean price.
    pub fn mean(&self) -> f64 {
        self.partial_mean_at(self.pi_max())
    }

    /// `n` i.i.d. draws by inverse-CDF transform of a ChaCha8 stream.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| self.quantile_at(rng.random::<f64>()))
            .collect()
    }

    pub fn cdf_at(&self, p: f64) -> f64 {
        let p = self.bounds().clamp(p);
        dispatch!(self, m => m.cdf(p))
    }

    pub fn sf_at(&self, p: f64) -> f64 {
        let p = self.bounds().clamp(p);
        dispatch!(self, m => m.sf(p))
    }

    pub fn pdf_at(&self, p: f64) -> f64 {
        let p = self.bounds().clamp(p);
        dispatch!(self, m => m.pdf(p))
    }

    pub fn partial_mean_at(&self, p: f64) -> f64 {
        let p = self.bounds().clamp(p);
        dispatch!(self, m => m.partial_mean(p))
    }

    pub fn conditional_mean_at(&self, p: f64) -> Result<f64> {
        let p = self.bounds().clamp(p);
        if self.cdf_at(p) <= 0.0 {
            return Err(Error::UndefinedConditional(p));
        }
        Ok(dispatch!(self, m => m.conditional_mean(p)))
    }

    pub fn quantile_at(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u == 0.0 {
            return self.pi_min();
        }
        if u == 1.0 {
            return self.pi_max();
        }
        dispatch!(self, m => m.quantile(u))
    }

    /// Whether the density is nonincreasing on a 1000-point grid.
    pub fn pdf_nonincreasing(&self) -> bool {
        let b = self.bounds();
        let n = 1000;
        let mut prev = f64::INFINITY;
        for i in 0..n {
            let p = b.pi_min + b.width() * i as f64 / (n - 1) as f64;
            let d = self.pdf_at(p);
            if d > prev * (1.0 + 1e-12) + 1e-300 {
                return false;
            }
            prev = d;
        }
        true
    }
}

impl From<BoundedParetoModel> for PriceModel {
    fn from(m: BoundedParetoModel) -> Self {
        PriceModel::BoundedPareto(m)
    }
}

impl From<TruncatedExponentialModel> for PriceModel {
    fn from(m: TruncatedExponentialModel) -> Self {
        PriceModel::Exponential(m)
    }
}

impl From<EmpiricalModel> for PriceModel {
    fn from(m: EmpiricalModel) -> Self {
        PriceModel::Empirical(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;

    fn models() -> Vec<PriceModel> {
        vec![
            BoundedParetoModel::new(PriceBounds::new(0.0321, 0.35).unwrap(), 3.0, 0.983)
                .unwrap()
                .into(),
            TruncatedExponentialModel::new(
                PriceBounds::new(0.0173, 0.166).unwrap(),
                44350.0,
                -285.7,
            )
            .unwrap()
            .into(),
            EmpiricalModel::new(vec![0.1, 0.2, 0.3, 0.5], vec![4.0, 3.0, 1.0])
                .unwrap()
                .into(),
        ]
    }

    #[test]
    fn bounds_validation() {
        assert!(PriceBounds::new(0.2, 0.1).is_err());
        assert!(PriceBounds::new(-0.1, 0.1).is_err());
        assert!(PriceBounds::new(0.0, 0.1).is_ok());
    }

    #[test]
    fn cdf_endpoints_and_range_errors() {
        for m in models() {
            let b = m.bounds();
            assert_eq!(m.cdf(b.pi_min).unwrap(), 0.0, "{}", m.kind());
            assert!(
                (m.cdf(b.pi_max).unwrap() - 1.0).abs() < 1e-15,
                "{}",
                m.kind()
            );
            assert!(matches!(
                m.cdf(b.pi_max + 1.0),
                Err(Error::OutOfRange { .. })
            ));
            assert!(matches!(
                m.cdf(b.pi_min - 1.0),
                Err(Error::OutOfRange { .. })
            ));
        }
    }

    #[test]
    fn quantile_round_trip() {
        for m in models() {
            assert_eq!(m.quantile(0.0).unwrap(), m.pi_min());
            assert_eq!(m.quantile(1.0).unwrap(), m.pi_max());
            for k in 1..10 {
                let u = k as f64 / 10.0;
                let p = m.quantile(u).unwrap();
                assert!((m.cdf(p).unwrap() - u).abs() < 1e-9, "{} u={u}", m.kind());
            }
            assert!(m.quantile(1.5).is_err());
        }
    }

    #[test]
    fn conditional_mean_limits_and_bounds() {
        for m in models() {
            let b = m.bounds();
            assert!(matches!(
                m.conditional_mean(b.pi_min),
                Err(Error::UndefinedConditional(_))
            ));
            let near = m.conditional_mean(b.pi_min + 1e-9 * b.width()).unwrap();
            assert!((near - b.pi_min).abs() < 1e-6, "{}", m.kind());
            let mut prev = 0.0;
            for i in 1..=200 {
                let p = b.pi_min + b.width() * i as f64 / 200.0;
                let cm = m.conditional_mean(p).unwrap();
                assert!(cm <= p + 1e-12);
                assert!(cm >= prev - 1e-12, "{} not monotone at {p}", m.kind());
                prev = cm;
            }
        }
    }

    #[test]
    fn partial_mean_matches_quadrature() {
        for m in models() {
            let b = m.bounds();
            for frac in [0.1, 0.37, 0.8, 1.0] {
                let p = b.pi_min + frac * b.width();
                let exact = integrate(|x| x * m.pdf_at(x), b.pi_min, p, 1e-12);
                let got = m.partial_mean(p).unwrap();
                assert!(
                    (got - exact).abs() <= 1e-10 * exact.abs().max(1e-12),
                    "{} {got} {exact}",
                    m.kind()
                );
            }
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let m = &models()[0];
        assert!(m.sample(0, 7).is_empty());
        assert_eq!(m.sample(100, 7), m.sample(100, 7));
        assert_ne!(m.sample(100, 7), m.sample(100, 8));
    }

    #[test]
    fn json_round_trip() {
        for m in models() {
            let s = serde_json::to_string(&m).unwrap();
            assert!(s.contains(&format!("\"kind\":\"{}\"", m.kind())));
            let back: PriceModel = serde_json::from_str(&s).unwrap();
            assert_eq!(back, m);
        }
        let bad = r#"{"kind":"bounded_pareto","pi_min":0.3,"pi_max":0.1,"alpha":3,"theta":1}"#;
        assert!(serde_json::from_str::<PriceModel>(bad).is_err());
    }
}
