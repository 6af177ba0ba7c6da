//! One-time requests that finish on time in expectation, across deadlines.
//!
//! Tight deadlines (`t_s < t_e`) buy a share of the job on demand; loose
//! ones go fully spot and bid just high enough to avoid interruption.
//!
//! ```text
//! cargo run --example solve_otr_eg
//! ```

use spotfolio::{scenario, solve_otr_eg, SECONDS_PER_HOUR};

fn main() -> spotfolio::Result<()> {
    let model = scenario::nominal_pareto();
    println!(
        "{:>6} {:>8} {:>8} {:>8} {:>10} regime",
        "t_s", "q", "p", "F(p)", "cost $"
    );
    for t_s in [
        1850.0, 2000.0, 2400.0, 2800.0, 3200.0, 3550.0, 4000.0, 6000.0,
    ] {
        let job = scenario::pareto_job(t_s);
        let s = solve_otr_eg(&model, &job)?;
        println!(
            "{t_s:>6} {:>8.4} {:>8.4} {:>8.4} {:>10.4} {:?}",
            s.strategy.q,
            s.strategy.p,
            model.cdf(s.strategy.p)?,
            s.objective / SECONDS_PER_HOUR,
            s.regime
        );
    }
    Ok(())
}
