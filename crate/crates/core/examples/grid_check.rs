//! Checks a closed-form solution against the brute-force grid oracle and a
//! finite-difference gradient.
//!
//! ```text
//! cargo run --release --example grid_check
//! ```

use spotfolio::numeric::{fd_gradient, grid_oracle, GridBounds, GridSpec};
use spotfolio::otr_eg::{feasible_p1, objective_p1};
use spotfolio::otr_p::{grad_u, objective_p2};
use spotfolio::{scenario, solve_otr_eg, Strategy};

fn main() -> spotfolio::Result<()> {
    let model = scenario::nominal_pareto();
    let job = scenario::pareto_job(2000.0);
    let (q_lo, q_hi) = job.q_interval()?;
    let bounds = GridBounds {
        p_lo: model.pi_min(),
        p_hi: model.pi_max(),
        q_lo,
        q_hi,
    };
    let grid = GridSpec::square(400)?;

    let closed = solve_otr_eg(&model, &job)?;
    let best = grid_oracle(
        |p, q| objective_p1(&model, &job, &Strategy::new(q, p)).unwrap_or(f64::NAN),
        |p, q| feasible_p1(&model, &job, &Strategy::new(q, p)),
        grid,
        bounds,
    )?;
    println!(
        "closed form: q={:.5} p={:.5} cost={:.3}",
        closed.strategy.q, closed.strategy.p, closed.objective
    );
    println!(
        "grid oracle: q={:.5} p={:.5} cost={:.3}",
        best.q, best.p, best.value
    );
    println!(
        "cell size:   q={:.5} p={:.5}",
        bounds.q_cell(&grid),
        bounds.p_cell(&grid)
    );

    let pen = scenario::default_penalty(model.pi_max());
    let x = Strategy::new(0.3, 0.2);
    let u = |p: f64, q: f64| objective_p2(&model, &job, &pen, &Strategy::new(q, p)).unwrap();
    println!("grad U analytic {:?}", grad_u(&model, &job, &pen, &x)?);
    println!("grad U central  {:?}", fd_gradient(u, (x.p, x.q), 1e-6));
    Ok(())
}
