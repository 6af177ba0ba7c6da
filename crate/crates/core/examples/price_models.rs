//! The two parametric spot-price models: CDF, quantiles, conditional mean
//! payment and sampling.
//!
//! ```text
//! cargo run --example price_models
//! ```

use spotfolio::scenario;

fn main() -> spotfolio::Result<()> {
    let models = [
        ("bounded Pareto, alpha=3", scenario::nominal_pareto()),
        (
            "d2.2xlarge exponential fit",
            scenario::instance_model("d2").expect("built-in instance"),
        ),
    ];
    for (label, m) in &models {
        println!(
            "{label}: [{}, {}] $/hour, mean {:.4}",
            m.pi_min(),
            m.pi_max(),
            m.mean()
        );
        println!("  {:>8} {:>8} {:>12}", "F", "bid", "E[pi|pi<=p]");
        for level in [0.5, 0.8, 0.9, 0.95, 0.99] {
            let p = m.quantile(level)?;
            println!("  {level:>8.2} {p:>8.4} {:>12.4}", m.conditional_mean(p)?);
        }
        let sample = m.sample(100_000, 7);
        let below = sample
            .iter()
            .filter(|&&x| x <= m.quantile(0.8).unwrap())
            .count();
        println!(
            "  share of 100000 draws below the 0.8 quantile: {:.4}",
            below as f64 / sample.len() as f64
        );
    }
    Ok(())
}
