//! Persistent requests: the tight-deadline bid sits at the on-demand price,
//! longer deadlines trade completion time for a lower bid.
//!
//! ```text
//! cargo run --example solve_pr
//! ```

use spotfolio::pr::{completion_time, recovery_limit, solve_pr_with, PrOptions, PrVariant};
use spotfolio::{scenario, solve_otr_eg, solve_pr};

fn main() -> spotfolio::Result<()> {
    let model = scenario::nominal_pareto();
    println!(
        "{:>6} {:>8} {:>8} {:>10} {:>10} {:>10}",
        "t_s", "q", "p", "T", "PR cost", "OTR cost"
    );
    for t_s in [2000.0, 3000.0, 4000.0, 5000.0, 6000.0, 8000.0] {
        let job = scenario::pareto_job(t_s);
        let pr = solve_pr(&model, &job)?;
        let eg = solve_otr_eg(&model, &job)?;
        println!(
            "{t_s:>6} {:>8.4} {:>8.4} {:>10.1} {:>10.2} {:>10.2}",
            pr.strategy.q, pr.strategy.p, pr.total_time, pr.cost, eg.objective
        );
    }

    let job = scenario::pareto_job(5000.0);
    let pr = solve_pr(&model, &job)?;
    println!(
        "\nat t_s=5000 the bid tolerates recovery times up to {:.1} s (t_r = {})",
        recovery_limit(&model, &job, pr.strategy.p)?,
        job.t_r
    );
    let draft = solve_pr_with(
        &model,
        &job,
        PrOptions {
            variant: PrVariant::Draft,
        },
    )?;
    println!(
        "draft accounting bids {:.4}; its T under the final accounting is {:.1} s",
        draft.strategy.p,
        completion_time(&model, &job, &draft.strategy)?
    );
    Ok(())
}
