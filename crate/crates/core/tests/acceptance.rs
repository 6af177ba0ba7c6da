//! Acceptance checks. Each criterion prints one `PASS` or `FAIL` line;
//! indented `info:` lines carry supporting numbers. The process exits
//! non-zero if any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spotfolio::ingest::{fit_bounded_pareto, fit_exponential, histogram, DensityOptions};
use spotfolio::numeric::{grid_oracle, GridBounds, GridSpec};
use spotfolio::otr_eg::{
    expected_entry_time, expected_uninterrupted_run, feasible_p1, objective_p1,
};
use spotfolio::otr_p::{expected_completed, grad_u, objective_p2};
use spotfolio::pr::{completion_time, objective_p3};
use spotfolio::scenario::{self, calibrated_pareto, nominal_pareto, pareto_job};
use spotfolio::sim::{
    baseline_strategies, evaluate, evaluate_baseline, run_traces, RequestKind, SimConfig,
};
use spotfolio::{
    sca_solve, solve_otr_eg, solve_pr, BoundedParetoModel, JobSpec, PenaltyParams, PriceBounds,
    PriceModel, ScaConfig, Strategy, TruncatedExponentialModel,
};

// criterion 1
const ORACLE_STEPS: usize = 400;
const ORACLE_CELLS: f64 = 1.0;
const ORACLE_OBJ_REL: f64 = 1e-3;
const ORACLE_DEADLINES: [f64; 6] = [1850.0, 2000.0, 2700.0, 3300.0, 4000.0, 6000.0];
const ORACLE_BUDGET_SECS: f64 = 30.0;
const REFINED_STEPS: usize = 2000;
// criterion 2
const PIN_Q_TOL: f64 = 1e-9;
// criterion 4
const Q_GAP_BOUND: f64 = 300.0 / 3600.0;
// criterion 5
const REFERENCE_REL: f64 = 0.02;
const REFERENCE_DEADLINES: [f64; 4] = [2000.0, 3000.0, 4000.0, 6000.0];
const REFERENCE_OTRP_2700: f64 = 0.2791;
// criterion 6
const SCA_INSTANCES: usize = 50;
const SCA_EPS: f64 = 1e-5;
const SCA_CONVERGED_SHARE: f64 = 0.9;
const SCA_GRAD_REL: f64 = 1e-4;
const SCA_GRAD_SAMPLES: usize = 10;
// criterion 7
const SIM_TRACES: usize = 100_000;
const SIM_LEVELS: [f64; 3] = [0.6, 0.8, 0.95];
const RUN_REL: f64 = 0.02;
const ENTRY_REL: f64 = 0.02;
const COMPLETED_REL: f64 = 0.05;
const PERSISTENT_REL: f64 = 0.03;
const SIM_BUDGET_SECS: f64 = 120.0;
// criterion 8
const LATE_SHARE: f64 = 0.005;
const LATE_RUNS: usize = 1000;
// criterion 9
const COST_RATIO: f64 = 0.55;
const TABLE_REL: f64 = 0.05;
// criterion 10
const FIT_SAMPLES: usize = 100_000;
const FIT_REL: f64 = 0.05;

const SEED: u64 = 0x0A11_CE55;

/// Deadlines from 1850 to 3550 in steps of 50.
fn tight_sweep() -> Vec<f64> {
    (0..35).map(|i| 1850.0 + 50.0 * i as f64).collect()
}

type Check = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
    info: Vec<String>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn reference_bids() -> Vec<(f64, f64, f64, f64)> {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/data/deadline_sweep_bids.csv"
    );
    let mut r = csv::Reader::from_path(path).expect("reference data");
    r.deserialize()
        .map(|row| row.expect("reference row"))
        .collect()
}

fn reference_bid(t_s: f64, col: usize) -> f64 {
    let row = reference_bids()
        .into_iter()
        .find(|r| r.0 == t_s)
        .expect("deadline in reference data");
    [row.1, row.2, row.3][col]
}

fn sca_multi() -> ScaConfig {
    ScaConfig {
        multi_start: true,
        ..ScaConfig::default()
    }
}

fn pr_feasible(model: &PriceModel, job: &JobSpec, p: f64, q: f64) -> bool {
    let x = Strategy::new(q, p);
    q * job.t_e <= job.t_s * (1.0 + 1e-12)
        && completion_time(model, job, &x).is_ok_and(|t| t <= job.t_s * (1.0 + 1e-12))
}

struct OracleRow {
    t_s: f64,
    name: &'static str,
    closed: (f64, f64, f64),
    grid: (f64, f64, f64),
}

fn oracle_rows(steps: usize) -> Vec<OracleRow> {
    let model = nominal_pareto();
    let grid = GridSpec::square(steps).unwrap();
    let mut rows = Vec::new();
    for t_s in ORACLE_DEADLINES {
        let job = pareto_job(t_s);
        let (q_lo, q_hi) = job.q_interval().unwrap();
        let bounds = GridBounds {
            p_lo: model.pi_min(),
            p_hi: model.pi_max(),
            q_lo,
            q_hi,
        };
        let eg = solve_otr_eg(&model, &job).unwrap();
        let g = grid_oracle(
            |p, q| objective_p1(&model, &job, &Strategy::new(q, p)).unwrap_or(f64::NAN),
            |p, q| feasible_p1(&model, &job, &Strategy::new(q, p)),
            grid,
            bounds,
        )
        .unwrap();
        rows.push(OracleRow {
            t_s,
            name: "otr_eg",
            closed: (eg.strategy.p, eg.strategy.q, eg.objective),
            grid: (g.p, g.q, g.value),
        });
        let pr = solve_pr(&model, &job).unwrap();
        let g = grid_oracle(
            |p, q| objective_p3(&model, &job, &Strategy::new(q, p)).unwrap_or(f64::NAN),
            |p, q| pr_feasible(&model, &job, p, q),
            grid,
            bounds,
        )
        .unwrap();
        rows.push(OracleRow {
            t_s,
            name: "pr",
            closed: (pr.strategy.p, pr.strategy.q, pr.cost),
            grid: (g.p, g.q, g.value),
        });
    }
    rows
}

/// Distance in 400-grid cells and signed relative objective gap (negative
/// when the closed form is cheaper than the grid point).
fn oracle_distance(r: &OracleRow) -> (f64, f64) {
    let model = nominal_pareto();
    let (q_lo, q_hi) = pareto_job(r.t_s).q_interval().unwrap();
    let grid = GridSpec::square(ORACLE_STEPS).unwrap();
    let bounds = GridBounds {
        p_lo: model.pi_min(),
        p_hi: model.pi_max(),
        q_lo,
        q_hi,
    };
    let cells = ((r.closed.0 - r.grid.0).abs() / bounds.p_cell(&grid))
        .max((r.closed.1 - r.grid.1).abs() / bounds.q_cell(&grid));
    (cells, (r.closed.2 - r.grid.2) / r.grid.2)
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let rows = oracle_rows(ORACLE_STEPS);
    let secs = start.elapsed().as_secs_f64();
    let mut info = Vec::new();
    let (mut worst_cells, mut worst_gap, mut dominated) = (0.0f64, 0.0f64, 0);
    for r in &rows {
        let (cells, gap) = oracle_distance(r);
        worst_cells = worst_cells.max(cells);
        worst_gap = worst_gap.max(gap.abs());
        if gap <= 1e-9 {
            dominated += 1;
        }
        info.push(format!(
            "t_s={} {}: closed (p={:.5}, q={:.5}, obj={:.4}) grid (p={:.5}, q={:.5}, obj={:.4}) \
             distance {cells:.2} cells, objective gap {gap:+.2e}",
            r.t_s, r.name, r.closed.0, r.closed.1, r.closed.2, r.grid.0, r.grid.1, r.grid.2
        ));
    }
    info.push(format!(
        "closed form at or below the best feasible grid value in {dominated} of {} cases",
        rows.len()
    ));
    let (mut fine_cells, mut fine_gap) = (0.0f64, 0.0f64);
    for r in oracle_rows(REFINED_STEPS) {
        let (cells, gap) = oracle_distance(&r);
        fine_cells = fine_cells.max(cells);
        fine_gap = fine_gap.max(gap.abs());
    }
    info.push(format!(
        "{REFINED_STEPS}x{REFINED_STEPS} grid: worst distance {fine_cells:.2} cells of the 400 grid, worst objective gap {fine_gap:.2e}"
    ));
    Verdict {
        pass: worst_cells <= ORACLE_CELLS && worst_gap <= ORACLE_OBJ_REL && secs < ORACLE_BUDGET_SECS,
        detail: format!(
            "worst distance {worst_cells:.2} cells (<= {ORACLE_CELLS}), worst objective gap {worst_gap:.2e} \
             (<= {ORACLE_OBJ_REL}), {secs:.1}s (< {ORACLE_BUDGET_SECS}s)"
        ),
        info,
    }
}

fn criterion_2() -> Verdict {
    let model = nominal_pareto();
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for t_s in tight_sweep() {
        let job = pareto_job(t_s);
        let s = solve_pr(&model, &job).unwrap();
        let dq = (s.strategy.q - (1.0 - t_s / job.t_e)).abs();
        worst = worst.max(dq);
        if s.strategy.p != model.pi_max() || dq > PIN_Q_TOL {
            bad.push(format!("t_s={t_s}: p={} q={}", s.strategy.p, s.strategy.q));
        }
    }
    Verdict {
        pass: bad.is_empty(),
        detail: format!(
            "{} deadlines, p = pi_max at all, max |q - (1 - t_s/t_e)| = {worst:.1e}",
            tight_sweep().len()
        ),
        info: bad,
    }
}

fn claim_violations(model: &PriceModel) -> (Vec<String>, f64, f64) {
    let mut bad = Vec::new();
    let (mut max_q, mut min_f) = (f64::NEG_INFINITY, f64::INFINITY);
    for t_s in tight_sweep() {
        let job = pareto_job(t_s);
        let eg = solve_otr_eg(model, &job).unwrap();
        let pr = solve_pr(model, &job).unwrap();
        let f_eg = model.cdf_at(eg.strategy.p);
        let f_pr = model.cdf_at(pr.strategy.p);
        max_q = max_q.max(eg.strategy.q);
        min_f = min_f.min(f_eg).min(f_pr);
        if eg.strategy.q > 0.5 || f_eg < 0.5 || f_pr < 0.5 {
            bad.push(format!(
                "t_s={t_s}: otr_eg q={:.6} F={:.6}; pr F={:.6}",
                eg.strategy.q, f_eg, f_pr
            ));
        }
    }
    (bad, max_q, min_f)
}

fn criterion_3() -> Verdict {
    let (bad, max_q, min_f) = claim_violations(&nominal_pareto());
    let (cal_bad, cal_q, cal_f) = claim_violations(&calibrated_pareto());
    let mut info: Vec<String> = bad
        .iter()
        .map(|b| format!("alpha=3 violation {b}"))
        .collect();
    info.push(format!(
        "alpha=7 (reference-calibrated) model: {} violations, max q {cal_q:.6}, min F {cal_f:.6}",
        cal_bad.len()
    ));
    Verdict {
        pass: bad.is_empty(),
        detail: format!(
            "alpha=3 model: {} violations, max otr_eg q {max_q:.6} (<= 0.5), min F {min_f:.6} (>= 0.5)",
            bad.len()
        ),
        info,
    }
}

fn max_q_gap(model: &PriceModel) -> (f64, f64) {
    tight_sweep()
        .into_iter()
        .map(|t_s| {
            let job = pareto_job(t_s);
            let eg = solve_otr_eg(model, &job).unwrap().strategy.q;
            let pr = solve_pr(model, &job).unwrap().strategy.q;
            ((eg - pr).abs(), t_s)
        })
        .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
}

fn criterion_4() -> Verdict {
    let (gap, at) = max_q_gap(&nominal_pareto());
    let (cal_gap, cal_at) = max_q_gap(&calibrated_pareto());
    Verdict {
        pass: gap <= Q_GAP_BOUND,
        detail: format!(
            "alpha=3: max |q_otr_eg - q_pr| = {gap:.6} at t_s={at} (<= {Q_GAP_BOUND:.6})"
        ),
        info: vec![format!("alpha=7: max gap {cal_gap:.6} at t_s={cal_at}")],
    }
}

fn reference_errors(model: &PriceModel) -> (f64, Vec<String>) {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for t_s in REFERENCE_DEADLINES {
        let job = pareto_job(t_s);
        let eg = solve_otr_eg(model, &job).unwrap().strategy.p;
        let pr = solve_pr(model, &job).unwrap().strategy.p;
        let (fe, fp) = (reference_bid(t_s, 0), reference_bid(t_s, 2));
        worst = worst.max(rel(eg, fe)).max(rel(pr, fp));
        lines.push(format!(
            "t_s={t_s}: otr_eg {eg:.6} vs {fe:.6}, pr {pr:.6} vs {fp:.6}"
        ));
    }
    let job = pareto_job(2700.0);
    let pen = scenario::default_penalty(model.pi_max());
    let otrp = sca_solve(model, &job, &pen, &sca_multi()).unwrap();
    worst = worst.max(rel(otrp.strategy.p, REFERENCE_OTRP_2700));
    lines.push(format!(
        "t_s=2700: otr_p {:.6} vs {REFERENCE_OTRP_2700} (q {:.6}, converged {})",
        otrp.strategy.p, otrp.strategy.q, otrp.converged
    ));
    (worst, lines)
}

fn criterion_5() -> Verdict {
    let (worst, lines) = reference_errors(&calibrated_pareto());
    let (nom_worst, _) = reference_errors(&nominal_pareto());
    let mut info: Vec<String> = lines.into_iter().map(|l| format!("alpha=7 {l}")).collect();
    info.push(format!(
        "alpha=3 model for comparison: worst relative error {nom_worst:.3}"
    ));
    Verdict {
        pass: worst <= REFERENCE_REL,
        detail: format!("alpha=7 (the CDF behind the reference curves): worst relative error {worst:.4} (<= {REFERENCE_REL})"),
        info,
    }
}

fn random_instance(rng: &mut ChaCha8Rng) -> (PriceModel, JobSpec, PenaltyParams) {
    let model: PriceModel = if rng.random_bool(0.5) {
        let alpha = rng.random_range(1.0..8.0);
        BoundedParetoModel::new(PriceBounds::new(0.0321, 0.35).unwrap(), alpha, 0.983)
            .unwrap()
            .into()
    } else {
        let inst = ["r3large", "r4", "d2"][rng.random_range(0..3)];
        scenario::instance_model(inst).unwrap()
    };
    let t_s = rng.random_range(1850.0..6000.0);
    let job = JobSpec::new(3600.0, t_s, 300.0, 10.0).unwrap();
    let c_i = rng.random_range(0.05..1.0) * model.pi_max();
    let c_s = rng.random_range(0.0..1.0) * c_i;
    (model, job, PenaltyParams::new(c_i, c_s).unwrap())
}

fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut converged = 0;
    let mut monotone_breaks = Vec::new();
    let mut iterates = Vec::new();
    for i in 0..SCA_INSTANCES {
        let (model, job, pen) = random_instance(&mut rng);
        let r = sca_solve(&model, &job, &pen, &ScaConfig::default()).unwrap();
        if r.converged {
            converged += 1;
        }
        let mut prev = r.initial_objective;
        for it in &r.trace {
            if it.u > prev + SCA_EPS {
                monotone_breaks.push(format!(
                    "instance {i} iterate {}: {} -> {}",
                    it.nu, prev, it.u
                ));
            }
            prev = it.u;
            iterates.push((i, model.clone(), job, pen, it.p, it.q));
        }
    }

    let mut grad_worst: f64 = 0.0;
    let mut checked = 0;
    let mut info = Vec::new();
    while checked < SCA_GRAD_SAMPLES {
        let (i, model, job, pen, p, q) = &iterates[rng.random_range(0..iterates.len())];
        let hp = 1e-6 * model.bounds().width();
        let hq = 1e-6;
        let (q_lo, q_hi) = job.q_interval().unwrap();
        if *p - hp < model.pi_min() || *p + hp > model.pi_max() || *q - hq < q_lo || *q + hq > q_hi
        {
            continue;
        }
        let u = |p: f64, q: f64| objective_p2(model, job, pen, &Strategy::new(q, p)).unwrap();
        let fd = (
            (u(p + hp, *q) - u(p - hp, *q)) / (2.0 * hp),
            (u(*p, q + hq) - u(*p, q - hq)) / (2.0 * hq),
        );
        let g = grad_u(model, job, pen, &Strategy::new(*q, *p)).unwrap();
        let scale = g.0.abs().max(g.1.abs());
        let err = (g.0 - fd.0).abs().max((g.1 - fd.1).abs()) / scale;
        grad_worst = grad_worst.max(err);
        info.push(format!(
            "instance {i} at (p={p:.5}, q={q:.5}): analytic ({:.6e}, {:.6e}) central ({:.6e}, {:.6e}) rel {err:.1e}",
            g.0, g.1, fd.0, fd.1
        ));
        checked += 1;
    }
    let share = converged as f64 / SCA_INSTANCES as f64;
    info.extend(monotone_breaks.iter().cloned());
    Verdict {
        pass: monotone_breaks.is_empty() && share >= SCA_CONVERGED_SHARE && grad_worst <= SCA_GRAD_REL,
        detail: format!(
            "{SCA_INSTANCES} instances: {} monotonicity breaks (eps {SCA_EPS}), converged {:.0}% (>= {:.0}%), \
             worst gradient rel error {grad_worst:.1e} (<= {SCA_GRAD_REL})",
            monotone_breaks.len(),
            100.0 * share,
            100.0 * SCA_CONVERGED_SHARE
        ),
        info,
    }
}

fn criterion_7() -> Verdict {
    let start = Instant::now();
    let model = nominal_pareto();
    let mut worst = [0.0f64; 4];
    let mut info = Vec::new();
    for (k, level) in SIM_LEVELS.into_iter().enumerate() {
        let p = model.quantile(level).unwrap();
        let f = model.cdf_at(p);
        let seed = SEED + k as u64;

        // a job too long to finish: completed work is one uninterrupted run
        let endless = JobSpec::new(1e9, 1e9, 300.0, 0.0).unwrap();
        let x0 = Strategy::new(0.0, p);
        let traces = run_traces(
            &model,
            &endless,
            &x0,
            &SimConfig::new(SIM_TRACES, seed, RequestKind::OneTime),
        )
        .unwrap();
        let run = traces.iter().map(|t| t.completed_seconds).sum::<f64>() / SIM_TRACES as f64;
        let delays: Vec<f64> = traces.iter().filter_map(|t| t.entry_delay).collect();
        let entry = delays.iter().sum::<f64>() / delays.len() as f64;
        let run_ref = expected_uninterrupted_run(&model, &endless, p).unwrap();
        let entry_ref = expected_entry_time(&model, &endless, p).unwrap();

        // K = 12 slots; a deadline far enough out that admission is certain
        let job = JobSpec::new(3600.0, 36_000.0, 300.0, 10.0).unwrap();
        let one_time = evaluate(
            &model,
            &job,
            &x0,
            &SimConfig::new(SIM_TRACES, seed ^ 1, RequestKind::OneTime),
        )
        .unwrap();
        let ec_ref = expected_completed(&model, &job, &x0).unwrap();
        let persistent = evaluate(
            &model,
            &job,
            &x0,
            &SimConfig::new(SIM_TRACES, seed ^ 2, RequestKind::Persistent),
        )
        .unwrap();
        let t_ref = completion_time(&model, &job, &x0).unwrap();

        let errs = [
            rel(run, run_ref),
            rel(entry, entry_ref),
            rel(one_time.completed_seconds.mean, ec_ref),
            rel(persistent.completion_time.mean, t_ref),
        ];
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
        info.push(format!(
            "F={f:.2}: run {run:.1} vs {run_ref:.1}, entry {entry:.2} vs {entry_ref:.2}, \
             completed {:.1} vs {ec_ref:.1}, persistent T {:.1} vs {t_ref:.1}",
            one_time.completed_seconds.mean, persistent.completion_time.mean
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    let limits = [RUN_REL, ENTRY_REL, COMPLETED_REL, PERSISTENT_REL];
    let pass = worst.iter().zip(limits).all(|(w, l)| *w <= l) && secs < SIM_BUDGET_SECS;
    Verdict {
        pass,
        detail: format!(
            "{SIM_TRACES} traces per check: run {:.4} (<= {RUN_REL}), entry {:.4} (<= {ENTRY_REL}), \
             completed {:.4} (<= {COMPLETED_REL}), persistent T {:.4} (<= {PERSISTENT_REL}), {secs:.1}s",
            worst[0], worst[1], worst[2], worst[3]
        ),
        info,
    }
}

fn late_shares(model: &PriceModel) -> Vec<(f64, f64)> {
    (0..=39)
        .map(|i| {
            let t_s = 1850.0 + 50.0 * i as f64;
            let job = pareto_job(t_s);
            let pen = scenario::default_penalty(model.pi_max());
            let x = sca_solve(model, &job, &pen, &sca_multi()).unwrap().strategy;
            let cfg = SimConfig::new(LATE_RUNS, SEED, RequestKind::OneTime).with_penalty(pen);
            (t_s, evaluate(model, &job, &x, &cfg).unwrap().fraction_late)
        })
        .collect()
}

fn criterion_8() -> Verdict {
    let worst = |v: &[(f64, f64)]| {
        v.iter()
            .copied()
            .fold(v[0], |a, b| if b.1 > a.1 { b } else { a })
    };
    let cal = late_shares(&calibrated_pareto());
    let nom = late_shares(&nominal_pareto());
    let (at, share) = worst(&cal);
    let (nom_at, nom_share) = worst(&nom);
    Verdict {
        pass: share <= LATE_SHARE,
        detail: format!(
            "alpha=7 (reference-calibrated), {} deadlines in [1850, 3800], {LATE_RUNS} runs each: \
             max late share {share:.4} at t_s={at} (<= {LATE_SHARE})",
            cal.len()
        ),
        info: vec![format!(
            "alpha=3 model for comparison: max late share {nom_share:.4} at t_s={nom_at}, {} of {} deadlines above {LATE_SHARE}",
            nom.iter().filter(|v| v.1 > LATE_SHARE).count(),
            nom.len()
        )],
    }
}

/// Reference bids `(otr_eg, otr_p, pr, baseline2)` at `t_s = 2000` and `4000`.
fn table_bids(instance: &str, t_s: f64) -> [f64; 4] {
    match (instance, t_s as u32) {
        ("r3large", 2000) => [0.04258, 0.08813, 0.166, 0.02357],
        ("r4", 2000) => [1.0666, 1.8375, 4.256, 0.5588],
        ("d2", 2000) => [0.3538, 0.83833, 1.38, 0.2],
        ("r3large", 4000) => [0.026, 0.090299, 0.025463, 0.026],
        ("r4", 4000) => [0.606983, 1.8808, 0.596374, 0.606983],
        ("d2", 4000) => [0.3538, 0.83833, 0.218868, 0.3538],
        _ => unreachable!(),
    }
}

fn criterion_9() -> Verdict {
    let mut worst_ratio: f64 = 0.0;
    let mut info = Vec::new();
    for inst in ["r3large", "r4", "d2"] {
        let s = scenario::builtin(&format!("{inst}_2000")).unwrap();
        let cfg = SimConfig::new(1000, SEED, RequestKind::OneTime).with_penalty(s.penalty);
        let otrp = sca_solve(&s.model, &s.job, &s.penalty, &sca_multi()).unwrap();
        let cost = evaluate(&s.model, &s.job, &otrp.strategy, &cfg)
            .unwrap()
            .total_cost
            .mean;
        let (b1, _) = baseline_strategies(&s.model, &s.job).unwrap();
        let base = evaluate_baseline(&s.model, &s.job, &b1, &cfg)
            .unwrap()
            .total_cost
            .mean;
        let ratio = cost / base;
        worst_ratio = worst_ratio.max(ratio);
        info.push(format!(
            "{inst}_2000: otr_p {cost:.2} vs baseline I {base:.2}, ratio {ratio:.4}"
        ));

        let (lo, hi, a, b) = scenario::instance_fit(inst).unwrap();
        let raw_mass = a / b * ((b * hi).exp() - (b * lo).exp());
        for t_s in [2000.0, 4000.0] {
            let job = JobSpec { t_s, ..s.job };
            let ours = [
                solve_otr_eg(&s.model, &job).map(|e| e.strategy.p),
                sca_solve(&s.model, &job, &s.penalty, &sca_multi()).map(|r| r.strategy.p),
                solve_pr(&s.model, &job).map(|r| r.strategy.p),
                baseline_strategies(&s.model, &job).map(|(_, b2)| b2.strategy.p),
            ];
            let published = table_bids(inst, t_s);
            for (j, ((name, ours), theirs)) in ["otr_eg", "otr_p", "pr", "baseline2"]
                .iter()
                .zip(ours)
                .zip(published)
                .enumerate()
            {
                let ours = ours.unwrap();
                let e = rel(ours, theirs);
                let tag = if e <= TABLE_REL {
                    "match"
                } else if t_s == 4000.0 && theirs == table_bids(inst, 2000.0)[j] {
                    "deviates; reference value repeats the t_s=2000 entry"
                } else {
                    "deviates"
                };
                let mut line = format!(
                    "{inst} t_s={t_s} {name}: {ours:.6} vs reference {theirs} ({tag}, rel {e:.3}; \
                     raw fit mass over bounds {raw_mass:.4})"
                );
                if *name == "otr_p" && e > TABLE_REL {
                    let r = sca_solve(&s.model, &job, &s.penalty, &sca_multi()).unwrap();
                    let at_reference = objective_p2(
                        &s.model,
                        &job,
                        &s.penalty,
                        &Strategy::new(r.strategy.q, theirs),
                    )
                    .unwrap();
                    line.push_str(&format!(
                        "; U at reference bid with our q is {:+.2e} relative",
                        (at_reference - r.objective) / r.objective
                    ));
                }
                info.push(line);
            }
        }
    }
    Verdict {
        pass: worst_ratio <= COST_RATIO,
        detail: format!("worst otr_p / baseline I cost ratio {worst_ratio:.4} (<= {COST_RATIO})"),
        info,
    }
}

fn criterion_10() -> Verdict {
    let mut info = Vec::new();
    let mut worst: f64 = 0.0;
    for (label, lo, hi) in [
        ("d2 bounds", 0.138, 1.38),
        ("r3.large bounds", 0.0173, 0.166),
    ] {
        let bounds = PriceBounds::new(lo, hi).unwrap();
        let m: PriceModel = TruncatedExponentialModel::new(bounds, 1.0, -28.84)
            .unwrap()
            .into();
        let sample = m.sample(FIT_SAMPLES, SEED);
        let opts = DensityOptions {
            pi_min: Some(lo),
            pi_max: Some(hi),
            ..Default::default()
        };
        let emp = histogram(&sample, None, &opts).unwrap();
        let fit = fit_exponential(&emp).unwrap();
        let b = fit.params["b"];
        worst = worst.max(rel(b, -28.84));
        info.push(format!(
            "exponential on {label}: b = {b:.3} from {} bins, r2 {:.4}",
            fit.bins, fit.r2
        ));
    }
    let bounds = PriceBounds::new(0.0321, 0.35).unwrap();
    let m: PriceModel = BoundedParetoModel::new(bounds, 3.0, 0.983).unwrap().into();
    let sample = m.sample(FIT_SAMPLES, SEED);
    let opts = DensityOptions {
        pi_min: Some(0.0321),
        pi_max: Some(0.35),
        ..Default::default()
    };
    let emp = histogram(&sample, None, &opts).unwrap();
    let fit = fit_bounded_pareto(&emp, Some(0.983)).unwrap();
    let alpha = fit.params["alpha"];
    worst = worst.max(rel(alpha, 3.0));
    info.push(format!(
        "bounded Pareto: alpha = {alpha:.4} from {} bins, r2 {:.4}",
        fit.bins, fit.r2
    ));
    Verdict {
        pass: worst <= FIT_REL,
        detail: format!(
            "{FIT_SAMPLES} samples per model, worst relative error {worst:.4} (<= {FIT_REL})"
        ),
        info,
    }
}

fn main() {
    let criteria: [Check; 10] = [
        ("closed forms vs 400x400 grid oracle", criterion_1),
        ("persistent bid pinned at the ceiling", criterion_2),
        (
            "on-demand share at most half, bids above the median",
            criterion_3,
        ),
        ("on-demand share gap bounded by t_k/t_e", criterion_4),
        ("deadline-sweep bid curves", criterion_5),
        ("SCA descent, convergence and gradient", criterion_6),
        ("simulator vs closed-form expectations", criterion_7),
        ("penalised one-time requests rarely late", criterion_8),
        ("cost saving on EC2 instance fits", criterion_9),
        ("fit recovery", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} criterion {} ({name}): {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
        for line in v.info {
            println!("    info: {line}");
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
