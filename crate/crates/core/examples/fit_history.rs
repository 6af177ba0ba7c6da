//! From a spot-price history to a fitted model and a portfolio.
//!
//! Without an argument a synthetic history is generated; otherwise the file
//! is read as `timestamp,price` CSV.
//!
//! ```text
//! cargo run --example fit_history -- prices.csv
//! ```

use std::io::Cursor;

use spotfolio::ingest::{
    empirical_density, fit_bounded_pareto, fit_exponential, parse_history, DensityOptions,
    HistoryFormat,
};
use spotfolio::{scenario, solve_otr_eg, JobSpec};

fn synthetic_history() -> String {
    let truth = scenario::instance_model("d2").expect("built-in instance");
    let mut csv = String::from("timestamp,price\n");
    for (i, p) in truth.sample(20_000, 11).iter().enumerate() {
        csv.push_str(&format!("{},{p:.4}\n", 1_500_000_000 + 300 * i as i64));
    }
    csv
}

fn main() -> spotfolio::Result<()> {
    let raw = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).map_err(|e| spotfolio::Error::Io {
            path,
            msg: e.to_string(),
        })?,
        None => synthetic_history(),
    };
    let points = parse_history(Cursor::new(raw), HistoryFormat::TwoColumn)?;
    let opts = DensityOptions {
        pi_max: Some(1.38),
        ..DensityOptions::default()
    };
    let empirical = empirical_density(&points, &opts)?;
    println!("{} prices in {} bins", points.len(), empirical.bin_count());

    let exp = fit_exponential(&empirical)?;
    let par = fit_bounded_pareto(&empirical, None)?;
    for fit in [&exp, &par] {
        println!(
            "{:<15} {:?} r2={:.4} flags={:?}",
            fit.kind, fit.params, fit.r2, fit.flags
        );
    }

    let job = JobSpec::new(3600.0, 2000.0, 300.0, 10.0)?;
    let s = solve_otr_eg(&exp.model, &job)?;
    println!(
        "otr_eg on the exponential fit: q={:.4} p={:.4}",
        s.strategy.q, s.strategy.p
    );
    Ok(())
}
