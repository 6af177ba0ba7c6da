use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::args::{
    CompareArgs, Family, FitArgs, HistoryFormatArg, JobArgs, Mechanism, ModelArgs, OutputFormat,
    ScaArgs, SimArgs, SimulateArgs, SolveArgs, WeightingArg,
};
use super::sweep::SweepSpec;
use crate::error::{Error, Result};
use crate::ingest::{
    empirical_density, fit_bounded_pareto, fit_exponential, parse_history_path, DensityOptions,
    FitReport, HistoryFormat, Weighting,
};
use crate::job::{JobSpec, Strategy};
use crate::otr_eg::solve_otr_eg;
use crate::otr_p::{sca_solve, PenaltyParams, ScaConfig, ScaResult};
use crate::pr::{recovery_limit, solve_pr};
use crate::price_model::{BoundedParetoModel, PriceBounds, PriceModel, TruncatedExponentialModel};
use crate::scenario::{self, Scenario};
use crate::sim::{
    baseline_strategies, run_split_traces, write_traces_csv, AggregateStats, RequestKind,
    SimConfig, Stat,
};
use crate::SECONDS_PER_HOUR;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_err(path, e))
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(out).map_err(|e| io_err(Path::new("<stdout>"), e))
}

fn emit_csv<T: Serialize>(out: &mut dyn Write, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| io_err(Path::new("<stdout>"), e))
}

fn history_format(f: HistoryFormatArg) -> HistoryFormat {
    match f {
        HistoryFormatArg::TwoColumn => HistoryFormat::TwoColumn,
        HistoryFormatArg::AwsDescribe => HistoryFormat::AwsDescribe,
    }
}

fn weighting(w: WeightingArg) -> Weighting {
    match w {
        WeightingArg::Count => Weighting::Count,
        WeightingArg::Duration => Weighting::Duration,
    }
}

fn fit_history(
    path: &Path,
    format: HistoryFormatArg,
    opts: &DensityOptions,
    family: Family,
    theta: Option<f64>,
) -> Result<(FitReport, crate::price_model::EmpiricalModel)> {
    let points = parse_history_path(path, history_format(format))?;
    let emp = empirical_density(&points, opts)?;
    let report = match family {
        Family::Exponential => fit_exponential(&emp)?,
        Family::Pareto => fit_bounded_pareto(&emp, theta)?,
    };
    Ok((report, emp))
}

pub(super) fn fit(a: &FitArgs, out: &mut dyn Write) -> Result<()> {
    let opts = DensityOptions {
        pi_min: a.pi_min,
        pi_max: a.pi_max,
        bins: a.bins,
        weighting: weighting(a.weighting),
    };
    let (report, emp) = fit_history(&a.history, a.history_format, &opts, a.family, a.theta)?;
    if let Some(path) = &a.plot_data {
        report.write_plot_data(&emp, create(path)?)?;
    }
    if let Some(path) = &a.out {
        let mut f = create(path)?;
        serde_json::to_writer_pretty(&mut f, &report.model).map_err(|e| io_err(path, e))?;
        f.flush().map_err(|e| io_err(path, e))?;
    }
    emit_json(out, &report)
}

/// Model and (if named) scenario selected by the model flags.
fn resolve_model(a: &ModelArgs) -> Result<(PriceModel, Option<Scenario>)> {
    let scenario = a.scenario.as_deref().map(scenario::builtin).transpose()?;
    if let Some(path) = &a.model {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let model: PriceModel = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        return Ok((model, scenario));
    }
    if let Some(path) = &a.history {
        let opts = DensityOptions {
            pi_min: a.pi_min,
            pi_max: a.pi_max,
            bins: a.bins,
            weighting: weighting(a.weighting),
        };
        let family = a.family.unwrap_or(Family::Exponential);
        let (report, _) = fit_history(path, a.history_format, &opts, family, a.theta)?;
        return Ok((report.model, scenario));
    }
    if let Some(family) = a.family {
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| Error::invalid(format!("--family needs --{flag}")))
        };
        let bounds = PriceBounds::new(need(a.pi_min, "pi-min")?, need(a.pi_max, "pi-max")?)?;
        let model: PriceModel = match family {
            Family::Pareto => {
                let alpha = need(a.alpha, "alpha")?;
                let w = bounds.width();
                let theta = a.theta.unwrap_or(alpha * w * w / (alpha + 2.0));
                BoundedParetoModel::new(bounds, alpha, theta)?.into()
            }
            Family::Exponential => {
                TruncatedExponentialModel::new(bounds, need(a.a, "a")?, need(a.b, "b")?)?.into()
            }
        };
        return Ok((model, scenario));
    }
    match scenario {
        Some(s) => Ok((s.model.clone(), Some(s))),
        None => {
            let s = scenario::builtin("pareto_nominal")?;
            Ok((s.model.clone(), Some(s)))
        }
    }
}

fn build_job(a: &JobArgs, base: Option<&Scenario>) -> Result<JobSpec> {
    let b = base.map_or_else(|| scenario::pareto_job(2000.0), |s| s.job);
    JobSpec::new(
        a.te.unwrap_or(b.t_e),
        a.ts.unwrap_or(b.t_s),
        a.tk.unwrap_or(b.t_k),
        a.tr.unwrap_or(b.t_r),
    )
}

fn build_penalty(
    a: &JobArgs,
    base: Option<&Scenario>,
    model: &PriceModel,
) -> Result<PenaltyParams> {
    let d = base.map_or_else(|| scenario::default_penalty(model.pi_max()), |s| s.penalty);
    PenaltyParams::new(a.ci.unwrap_or(d.c_i), a.cs.unwrap_or(d.c_s))
}

fn sca_config(a: &ScaArgs) -> ScaConfig {
    ScaConfig {
        multi_start: a.multi_start,
        max_iter: a.max_iter,
        ..ScaConfig::default()
    }
}

/// One solved mechanism.
#[derive(Debug, Clone, Serialize)]
struct SolveRecord {
    mechanism: &'static str,
    p: f64,
    q: f64,
    f_p: f64,
    /// analytic expected cost, $/hour x s
    objective: Option<f64>,
    cost_usd: Option<f64>,
    diagnostics: Map<String, Value>,
    #[serde(skip)]
    sca: Option<ScaResult>,
    #[serde(skip)]
    instances: u32,
}

impl SolveRecord {
    fn new(mech: Mechanism, model: &PriceModel, x: Strategy, objective: Option<f64>) -> Self {
        SolveRecord {
            mechanism: mech.name(),
            p: x.p,
            q: x.q,
            f_p: model.cdf_at(x.p),
            objective,
            cost_usd: objective.map(|o| o / SECONDS_PER_HOUR),
            diagnostics: Map::new(),
            sca: None,
            instances: 1,
        }
    }

    fn strategy(&self) -> Strategy {
        Strategy {
            q: self.q,
            p: self.p,
        }
    }

    fn converged(&self) -> Option<bool> {
        self.sca.as_ref().map(|r| r.converged)
    }
}

fn solve_one(
    mech: Mechanism,
    model: &PriceModel,
    job: &JobSpec,
    pen: &PenaltyParams,
    sca: &ScaConfig,
) -> Result<SolveRecord> {
    Ok(match mech {
        Mechanism::OtrEg => {
            let s = solve_otr_eg(model, job)?;
            let mut r = SolveRecord::new(mech, model, s.strategy, Some(s.objective));
            r.diagnostics.insert("regime".into(), json!(s.regime));
            r.diagnostics.insert("psi1_root".into(), json!(s.psi1_root));
            r.diagnostics.insert("psi2_root".into(), json!(s.psi2_root));
            r.diagnostics.insert("clamped".into(), json!(s.clamped));
            r
        }
        Mechanism::OtrP => {
            let s = sca_solve(model, job, pen, sca)?;
            let mut r = SolveRecord::new(mech, model, s.strategy, Some(s.objective));
            r.diagnostics.insert("converged".into(), json!(s.converged));
            r.diagnostics
                .insert("iterations".into(), json!(s.iterations));
            r.diagnostics
                .insert("initial_objective".into(), json!(s.initial_objective));
            r.diagnostics.insert("start".into(), json!(s.start));
            r.diagnostics.insert("c_I".into(), json!(pen.c_i));
            r.diagnostics.insert("c_s".into(), json!(pen.c_s));
            r.sca = Some(s);
            r
        }
        Mechanism::Pr => {
            let s = solve_pr(model, job)?;
            let mut r = SolveRecord::new(mech, model, s.strategy, Some(s.cost));
            r.diagnostics
                .insert("total_time".into(), json!(s.total_time));
            r.diagnostics.insert(
                "recovery_limit".into(),
                json!(recovery_limit(model, job, s.strategy.p)?),
            );
            r
        }
        Mechanism::Baseline1 | Mechanism::Baseline2 => {
            let (b1, b2) = baseline_strategies(model, job)?;
            let plan = if mech == Mechanism::Baseline1 { b1 } else { b2 };
            let objective = (mech == Mechanism::Baseline1).then(|| job.t_e * model.pi_max());
            let mut r = SolveRecord::new(mech, model, plan.strategy, objective);
            r.diagnostics
                .insert("instances".into(), json!(plan.instances));
            r.diagnostics.insert(
                "portion_per_instance".into(),
                json!(plan.portion_per_instance),
            );
            r.instances = plan.instances;
            r
        }
        Mechanism::All => unreachable!("expanded before dispatch"),
    })
}

/// Flat row for sweeps and CSV output.
#[derive(Debug, Serialize)]
struct SolveRow {
    param: Option<&'static str>,
    value: Option<f64>,
    mechanism: &'static str,
    p: Option<f64>,
    q: Option<f64>,
    f_p: Option<f64>,
    objective: Option<f64>,
    cost_usd: Option<f64>,
    converged: Option<bool>,
    error: Option<String>,
}

impl SolveRow {
    fn from(point: Option<(&'static str, f64)>, mech: Mechanism, r: &Result<SolveRecord>) -> Self {
        let (param, value) = point.map_or((None, None), |(n, v)| (Some(n), Some(v)));
        match r {
            Ok(r) => SolveRow {
                param,
                value,
                mechanism: r.mechanism,
                p: Some(r.p),
                q: Some(r.q),
                f_p: Some(r.f_p),
                objective: r.objective,
                cost_usd: r.cost_usd,
                converged: r.converged(),
                error: None,
            },
            Err(e) => SolveRow {
                param,
                value,
                mechanism: mech.name(),
                p: None,
                q: None,
                f_p: None,
                objective: None,
                cost_usd: None,
                converged: None,
                error: Some(e.to_string()),
            },
        }
    }
}

struct Setup {
    model: PriceModel,
    job: JobSpec,
    pen: PenaltyParams,
    mechanisms: Vec<Mechanism>,
}

fn setup(model: &ModelArgs, job: &JobArgs, mechanisms: &[Mechanism]) -> Result<Setup> {
    let (model, scenario) = resolve_model(model)?;
    let pen = build_penalty(job, scenario.as_ref(), &model)?;
    let job = build_job(job, scenario.as_ref())?;
    Ok(Setup {
        model,
        job,
        pen,
        mechanisms: Mechanism::expand(mechanisms),
    })
}

/// Sweep points in order, each with its own job and penalties.
fn sweep_points(
    spec: &SweepSpec,
    job: &JobSpec,
    pen: &PenaltyParams,
) -> Vec<(f64, JobSpec, PenaltyParams)> {
    spec.values()
        .into_iter()
        .map(|v| {
            let (mut j, mut p) = (*job, *pen);
            spec.param.apply(v, &mut j, &mut p);
            (v, j, p)
        })
        .collect()
}

fn check_point(job: &JobSpec, pen: &PenaltyParams) -> Result<()> {
    job.validate()?;
    PenaltyParams::new(pen.c_i, pen.c_s).map(|_| ())
}

pub(super) fn solve(a: &SolveArgs, out: &mut dyn Write) -> Result<()> {
    let st = setup(&a.model, &a.job, &a.mechanism)?;
    let sca = sca_config(&a.sca);
    sca.validate()?;

    if let Some(spec) = &a.sweep {
        let (model, sca) = (&st.model, &sca);
        let rows: Vec<SolveRow> = sweep_points(spec, &st.job, &st.pen)
            .par_iter()
            .flat_map_iter(|(v, j, p)| {
                st.mechanisms.iter().map(move |m| {
                    let r = check_point(j, p).and_then(|_| solve_one(*m, model, j, p, sca));
                    SolveRow::from(Some((spec.param.name(), *v)), *m, &r)
                })
            })
            .collect();
        return match a.format.unwrap_or(OutputFormat::Csv) {
            OutputFormat::Csv => emit_csv(out, &rows),
            OutputFormat::Json => emit_json(out, &rows),
        };
    }

    let records: Vec<SolveRecord> = st
        .mechanisms
        .iter()
        .map(|m| solve_one(*m, &st.model, &st.job, &st.pen, &sca))
        .collect::<Result<_>>()?;
    if let Some(path) = &a.sca.sca_trace {
        if let Some(r) = records.iter().find_map(|r| r.sca.as_ref()) {
            r.write_trace_csv(create(path)?)?;
        }
    }
    match a.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json if records.len() == 1 => emit_json(out, &records[0])?,
        OutputFormat::Json => emit_json(out, &records)?,
        OutputFormat::Csv => {
            let rows: Vec<SolveRow> = records
                .iter()
                .map(|r| SolveRow::from(None, Mechanism::All, &Ok(r.clone())))
                .collect();
            emit_csv(out, &rows)?
        }
    }
    not_converged(&records)
}

fn not_converged(records: &[SolveRecord]) -> Result<()> {
    match records.iter().find(|r| r.converged() == Some(false)) {
        Some(r) => Err(Error::Numerical(format!(
            "SCA for {} stopped at max_iter without converging",
            r.mechanism
        ))),
        None => Ok(()),
    }
}

fn request_kind(mech: Mechanism) -> RequestKind {
    if mech == Mechanism::Pr {
        RequestKind::Persistent
    } else {
        RequestKind::OneTime
    }
}

#[derive(Debug, Serialize)]
struct SimRecord {
    mechanism: &'static str,
    p: f64,
    q: f64,
    request_kind: RequestKind,
    instances: u32,
    runs: usize,
    seed: u64,
    penalty: PenaltyParams,
    stats: AggregateStats,
    cost_usd: Stat,
    #[serde(skip)]
    converged: Option<bool>,
}

#[allow(clippy::too_many_arguments)]
fn simulate_one(
    mech: Mechanism,
    model: &PriceModel,
    job: &JobSpec,
    pen: &PenaltyParams,
    sim: &SimArgs,
    sca: &ScaConfig,
    explicit: Option<Strategy>,
    keep_traces: bool,
) -> Result<(SimRecord, Vec<crate::sim::TraceOutcome>)> {
    let solved = match explicit {
        Some(x) => {
            x.check_bounds(model)?;
            let mut r = SolveRecord::new(mech, model, x, None);
            if matches!(mech, Mechanism::Baseline1 | Mechanism::Baseline2) {
                r.instances = solve_one(mech, model, job, pen, sca)?.instances;
            }
            r
        }
        None => solve_one(mech, model, job, pen, sca)?,
    };
    let x = solved.strategy();
    let cfg = SimConfig::new(sim.runs, sim.seed, request_kind(mech)).with_penalty(*pen);
    let traces = run_split_traces(model, job, &x, solved.instances, &cfg)?;
    let stats = AggregateStats::from_traces(&traces, (1.0 - x.q) * job.t_e);
    let cost_usd = Stat {
        mean: stats.total_cost.mean / SECONDS_PER_HOUR,
        std_err: stats.total_cost.std_err / SECONDS_PER_HOUR,
    };
    let record = SimRecord {
        mechanism: mech.name(),
        p: x.p,
        q: x.q,
        request_kind: cfg.request_kind,
        instances: solved.instances,
        runs: sim.runs,
        seed: sim.seed,
        penalty: *pen,
        stats,
        cost_usd,
        converged: solved.converged(),
    };
    Ok((record, if keep_traces { traces } else { Vec::new() }))
}

#[derive(Debug, Serialize)]
struct SimRow {
    param: Option<&'static str>,
    value: Option<f64>,
    mechanism: &'static str,
    p: Option<f64>,
    q: Option<f64>,
    total_cost: Option<f64>,
    total_cost_se: Option<f64>,
    cost_usd: Option<f64>,
    completion_time: Option<f64>,
    fraction_late: Option<f64>,
    fraction_incomplete: Option<f64>,
    fraction_interrupted: Option<f64>,
    error: Option<String>,
}

impl SimRow {
    fn from(point: Option<(&'static str, f64)>, mech: Mechanism, r: &Result<SimRecord>) -> Self {
        let (param, value) = point.map_or((None, None), |(n, v)| (Some(n), Some(v)));
        match r {
            Ok(r) => SimRow {
                param,
                value,
                mechanism: r.mechanism,
                p: Some(r.p),
                q: Some(r.q),
                total_cost: Some(r.stats.total_cost.mean),
                total_cost_se: Some(r.stats.total_cost.std_err),
                cost_usd: Some(r.cost_usd.mean),
                completion_time: Some(r.stats.completion_time.mean),
                fraction_late: Some(r.stats.fraction_late),
                fraction_incomplete: Some(r.stats.fraction_incomplete),
                fraction_interrupted: Some(r.stats.fraction_interrupted),
                error: None,
            },
            Err(e) => SimRow {
                param,
                value,
                mechanism: mech.name(),
                p: None,
                q: None,
                total_cost: None,
                total_cost_se: None,
                cost_usd: None,
                completion_time: None,
                fraction_late: None,
                fraction_incomplete: None,
                fraction_interrupted: None,
                error: Some(e.to_string()),
            },
        }
    }
}

pub(super) fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let st = setup(&a.model, &a.job, &a.mechanism)?;
    let sca = sca_config(&a.sca);
    sca.validate()?;
    SimConfig::new(a.sim.runs, a.sim.seed, RequestKind::OneTime).validate()?;
    let explicit = a.p.zip(a.q).map(|(p, q)| Strategy { q, p });

    if let Some(spec) = &a.sweep {
        if a.trace_csv.is_some() {
            return Err(Error::invalid(
                "--trace-csv cannot be combined with --sweep",
            ));
        }
        let mut rows = Vec::new();
        for (v, j, p) in sweep_points(spec, &st.job, &st.pen) {
            for m in &st.mechanisms {
                let r = check_point(&j, &p)
                    .and_then(|_| {
                        simulate_one(*m, &st.model, &j, &p, &a.sim, &sca, explicit, false)
                    })
                    .map(|(r, _)| r);
                rows.push(SimRow::from(Some((spec.param.name(), v)), *m, &r));
            }
        }
        return match a.format.unwrap_or(OutputFormat::Csv) {
            OutputFormat::Csv => emit_csv(out, &rows),
            OutputFormat::Json => emit_json(out, &rows),
        };
    }

    if a.trace_csv.is_some() && st.mechanisms.len() != 1 {
        return Err(Error::invalid("--trace-csv needs exactly one mechanism"));
    }
    let mut records = Vec::new();
    for m in &st.mechanisms {
        let (r, traces) = simulate_one(
            *m,
            &st.model,
            &st.job,
            &st.pen,
            &a.sim,
            &sca,
            explicit,
            a.trace_csv.is_some(),
        )?;
        if let Some(path) = &a.trace_csv {
            write_traces_csv(create(path)?, &traces)?;
        }
        records.push(r);
    }
    match a.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json if records.len() == 1 => emit_json(out, &records[0])?,
        OutputFormat::Json => emit_json(out, &records)?,
        OutputFormat::Csv => {
            let rows: Vec<SimRow> = records
                .into_iter()
                .map(|r| SimRow::from(None, Mechanism::All, &Ok(r)))
                .collect();
            return emit_csv(out, &rows);
        }
    }
    match records.iter().find(|r| r.converged == Some(false)) {
        Some(r) => Err(Error::Numerical(format!(
            "SCA for {} stopped at max_iter without converging",
            r.mechanism
        ))),
        None => Ok(()),
    }
}

/// One line of the comparison table.
#[derive(Debug, Serialize)]
struct CompareRow {
    scenario: String,
    mechanism: &'static str,
    p: Option<f64>,
    q: Option<f64>,
    mean_cost: Option<f64>,
    std_err: Option<f64>,
    cost_usd: Option<f64>,
    completed_fraction: Option<f64>,
    completion_time: Option<f64>,
    fraction_late: Option<f64>,
    saving_vs_baseline1: Option<f64>,
    error: Option<String>,
}

pub(super) fn compare(a: &CompareArgs, out: &mut dyn Write) -> Result<()> {
    let names: Vec<String> = if a.scenarios.is_empty() {
        ["r3large_2000", "r4_2000", "d2_2000"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        a.scenarios.clone()
    };
    let sca = sca_config(&a.sca);
    sca.validate()?;
    SimConfig::new(a.sim.runs, a.sim.seed, RequestKind::OneTime).validate()?;
    let mut rows = Vec::new();
    for name in &names {
        let s = scenario::builtin(name)?;
        let job = build_job(&a.job, Some(&s))?;
        let pen = build_penalty(&a.job, Some(&s), &s.model)?;
        let mut reference = None;
        for m in Mechanism::EVERY {
            let r =
                simulate_one(m, &s.model, &job, &pen, &a.sim, &sca, None, false).map(|(r, _)| r);
            let row = match r {
                Ok(r) => {
                    let cost = r.stats.total_cost.mean;
                    if m == Mechanism::Baseline1 {
                        reference = Some(cost);
                    }
                    CompareRow {
                        scenario: name.clone(),
                        mechanism: r.mechanism,
                        p: Some(r.p),
                        q: Some(r.q),
                        mean_cost: Some(cost),
                        std_err: Some(r.stats.total_cost.std_err),
                        cost_usd: Some(cost / SECONDS_PER_HOUR),
                        completed_fraction: Some(
                            (r.q * job.t_e + r.stats.completed_seconds.mean) / job.t_e,
                        ),
                        completion_time: Some(r.stats.completion_time.mean),
                        fraction_late: Some(r.stats.fraction_late),
                        saving_vs_baseline1: reference.map(|b| 1.0 - cost / b),
                        error: None,
                    }
                }
                Err(e) => CompareRow {
                    scenario: name.clone(),
                    mechanism: m.name(),
                    p: None,
                    q: None,
                    mean_cost: None,
                    std_err: None,
                    cost_usd: None,
                    completed_fraction: None,
                    completion_time: None,
                    fraction_late: None,
                    saving_vs_baseline1: None,
                    error: Some(e.to_string()),
                },
            };
            rows.push(row);
        }
    }
    match a.format {
        OutputFormat::Csv => emit_csv(out, &rows),
        OutputFormat::Json => emit_json(
            out,
            &json!({ "runs": a.sim.runs, "seed": a.sim.seed, "rows": rows }),
        ),
    }
}
