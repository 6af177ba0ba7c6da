//! All mechanisms against the all-on-demand and all-spot baselines on the
//! built-in EC2 instance fits.
//!
//! ```text
//! cargo run --release --example compare_scenarios
//! ```

use spotfolio::sim::{baseline_strategies, evaluate, evaluate_baseline, RequestKind, SimConfig};
use spotfolio::{sca_solve, scenario, solve_otr_eg, solve_pr, ScaConfig, SECONDS_PER_HOUR};

fn main() -> spotfolio::Result<()> {
    for name in ["r3large_2000", "r4_2000", "d2_2000"] {
        let s = scenario::builtin(name)?;
        let one_time = SimConfig::new(2000, 1, RequestKind::OneTime).with_penalty(s.penalty);
        let persistent = SimConfig {
            request_kind: RequestKind::Persistent,
            ..one_time
        };
        let (b1, b2) = baseline_strategies(&s.model, &s.job)?;

        let mut rows = vec![
            (
                "baseline I",
                b1.strategy,
                evaluate_baseline(&s.model, &s.job, &b1, &one_time)?,
            ),
            (
                "baseline II",
                b2.strategy,
                evaluate_baseline(&s.model, &s.job, &b2, &one_time)?,
            ),
        ];
        let eg = solve_otr_eg(&s.model, &s.job)?.strategy;
        rows.push(("otr_eg", eg, evaluate(&s.model, &s.job, &eg, &one_time)?));
        let cfg = ScaConfig {
            multi_start: true,
            ..ScaConfig::default()
        };
        let otr_p = sca_solve(&s.model, &s.job, &s.penalty, &cfg)?.strategy;
        rows.push((
            "otr_p",
            otr_p,
            evaluate(&s.model, &s.job, &otr_p, &one_time)?,
        ));
        let pr = solve_pr(&s.model, &s.job)?.strategy;
        rows.push(("pr", pr, evaluate(&s.model, &s.job, &pr, &persistent)?));

        let base = rows[0].2.total_cost.mean;
        println!("{name}");
        for (label, x, stats) in rows {
            println!(
                "  {label:<12} q={:.3} p={:<9.5} ${:<8.4} saving {:>5.1}%  late {:.1}%",
                x.q,
                x.p,
                stats.total_cost.mean / SECONDS_PER_HOUR,
                100.0 * (1.0 - stats.total_cost.mean / base),
                100.0 * stats.fraction_late
            );
        }
    }
    Ok(())
}
