//! One-time requests with penalties for unfinished and late work, solved by
//! successive convex approximation. Writes the iterate trace to stdout.
//!
//! ```text
//! cargo run --example sca_penalty -- 2700
//! ```

use spotfolio::otr_p::penalty_terms;
use spotfolio::{sca_solve, scenario, ScaConfig};

fn main() -> spotfolio::Result<()> {
    let t_s: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(2700.0);
    let model = scenario::calibrated_pareto();
    let job = scenario::pareto_job(t_s);
    let pen = scenario::default_penalty(model.pi_max());

    let single = sca_solve(&model, &job, &pen, &ScaConfig::default())?;
    let multi = sca_solve(
        &model,
        &job,
        &pen,
        &ScaConfig {
            multi_start: true,
            ..ScaConfig::default()
        },
    )?;
    for (label, r) in [("single start", &single), ("multi-start", &multi)] {
        println!(
            "{label:>12}: q={:.4} p={:.4} U={:.3} after {} iterations (converged: {}, started at p={:.4})",
            r.strategy.q, r.strategy.p, r.objective, r.iterations, r.converged, r.start.p
        );
    }
    let terms = penalty_terms(&model, &job, &multi.strategy)?;
    println!(
        "expected incomplete {:.1} s, late {:.1} s\n",
        terms.incomplete, terms.late
    );

    single.write_trace_csv(std::io::stdout().lock())
}
