//! Monte Carlo runs of a portfolio next to the analytic expectations.
//!
//! ```text
//! cargo run --release --example simulate
//! ```

use spotfolio::otr_p::expected_completed;
use spotfolio::pr::completion_time;
use spotfolio::sim::{evaluate, RequestKind, SimConfig};
use spotfolio::{sca_solve, scenario, ScaConfig, Strategy};

fn main() -> spotfolio::Result<()> {
    let model = scenario::nominal_pareto();
    let job = scenario::pareto_job(36_000.0);
    let x = Strategy::new(0.0, model.quantile(0.9)?);

    let one_time = evaluate(
        &model,
        &job,
        &x,
        &SimConfig::new(50_000, 1, RequestKind::OneTime),
    )?;
    println!(
        "one-time at F=0.9: completed {:.1} s (analytic {:.1}), interrupted in {:.1}% of runs",
        one_time.completed_seconds.mean,
        expected_completed(&model, &job, &x)?,
        100.0 * one_time.fraction_interrupted
    );
    let persistent = evaluate(
        &model,
        &job,
        &x,
        &SimConfig::new(50_000, 1, RequestKind::Persistent),
    )?;
    println!(
        "persistent at F=0.9: finishes after {:.1} ± {:.1} s (analytic {:.1})",
        persistent.completion_time.mean,
        persistent.completion_time.std_err,
        completion_time(&model, &job, &x)?
    );

    let job = scenario::pareto_job(2100.0);
    let pen = scenario::default_penalty(model.pi_max());
    let r = sca_solve(
        &model,
        &job,
        &pen,
        &ScaConfig {
            multi_start: true,
            ..ScaConfig::default()
        },
    )?;
    let cfg = SimConfig::new(10_000, 1, RequestKind::OneTime).with_penalty(pen);
    let s = evaluate(&model, &job, &r.strategy, &cfg)?;
    println!(
        "penalised one-time at t_s=2100: cost {:.1} ± {:.1} (model {:.1}), late in {:.2}% of runs",
        s.total_cost.mean,
        s.total_cost.std_err,
        r.objective,
        100.0 * s.fraction_late
    );
    Ok(())
}
