//! Bids of the three mechanisms as the deadline grows, as CSV.
//!
//! ```text
//! cargo run --release --example deadline_sweep > sweep.csv
//! ```

use rayon::prelude::*;
use spotfolio::{sca_solve, scenario, solve_otr_eg, solve_pr, ScaConfig};

fn main() -> spotfolio::Result<()> {
    let model = scenario::calibrated_pareto();
    let pen = scenario::default_penalty(model.pi_max());
    let cfg = ScaConfig {
        multi_start: true,
        ..ScaConfig::default()
    };
    let rows = (0..=123)
        .into_par_iter()
        .map(|i| {
            let job = scenario::pareto_job(1850.0 + 50.0 * i as f64);
            let eg = solve_otr_eg(&model, &job)?;
            let p = sca_solve(&model, &job, &pen, &cfg)?;
            let pr = solve_pr(&model, &job)?;
            Ok((job.t_s, eg.strategy, p.strategy, pr.strategy))
        })
        .collect::<spotfolio::Result<Vec<_>>>()?;
    println!("t_s,otr_eg_q,otr_eg_p,otr_p_q,otr_p_p,pr_q,pr_p");
    for (t_s, eg, p, pr) in rows {
        println!(
            "{t_s},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            eg.q, eg.p, p.q, p.p, pr.q, pr.p
        );
    }
    Ok(())
}
