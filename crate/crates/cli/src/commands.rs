//! The four subcommands.

use std::path::Path;

use cltbound::bounds::{
    slepian_bound, stein_bound, BoundForm, BoundReport, BoundStats,
};
use cltbound::identities::{identity_suite, Mutation};
use cltbound::mc::mc_estimates;
use cltbound::quadforms::{self, clt_sweep, log_log_slope};
use cltbound::runs::{bernoulli_runs_suite, runs_bound, RunsSpec};
use cltbound::table::JointTable;
use cltbound::verify::{discrepancy, DiscrepancyResult, EvalMode};
use cltbound::Error as LibError;

use crate::config::{
    build_identity_corpus, build_problem, build_target, build_test_function, RunConfig,
    StatisticKind,
};
use crate::report::{fmt_f64, fmt_opt, Csv};
use crate::svg::log_log_plot;
use crate::{CliError, CommonArgs, Mode};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILURE: u8 = 1;
pub const EXIT_HYPOTHESIS_VIOLATION: u8 = 3;

pub fn cmd_check_identities(
    config: &RunConfig,
    args: &CommonArgs,
    mutation: Mutation,
) -> Result<u8, CliError> {
    config.check_command("check-identities")?;
    let corpus = build_identity_corpus(config);
    if corpus.is_empty() {
        eprintln!("warning: identity corpus is empty; nothing to check");
    }
    let rows = identity_suite(&corpus, &config.alphas(), mutation)?;
    let mut csv = Csv::new(
        &["check_name", "instance_id", "max_violation", "tolerance", "pass"],
        args.reproducible,
    );
    let mut failures = 0usize;
    for r in &rows {
        if !r.pass {
            failures += 1;
        }
        csv.row(&[
            r.check.clone(),
            r.instance.clone(),
            fmt_f64(r.max_violation),
            fmt_f64(r.tolerance),
            r.pass.to_string(),
        ]);
    }
    csv.write(args.out.as_deref())?;
    Ok(if failures > 0 { EXIT_CHECK_FAILURE } else { EXIT_OK })
}

/// One output row of the bound command: either a priced report or a
/// hypothesis-violation marker.
enum BoundOutcome {
    Report(BoundReport),
    Refused {
        method: &'static str,
        form: String,
        alpha: f64,
        status: String,
    },
}

pub fn cmd_bound(config: &RunConfig, args: &CommonArgs) -> Result<u8, CliError> {
    config.check_command("bound")?;
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let mode = resolve_mode(config, args)?;
    let problem = build_problem(config, seed)?;
    let target = build_target(config, &problem)?;
    let g = build_test_function(config)?;
    if g.dim() != problem.stat.dim() {
        return Err(CliError::Config(format!(
            "test function dimension {} does not match statistic dimension {}",
            g.dim(),
            problem.stat.dim()
        )));
    }

    let mut outcomes: Vec<BoundOutcome> = Vec::new();
    for &alpha in &config.alphas() {
        let stats = match mode {
            Mode::Exact => {
                let table = JointTable::build(&problem.model, &problem.stat)?;
                BoundStats::exact(&table, alpha)?
            }
            Mode::Mc => {
                let mc = config.mc_config(seed)?;
                mc_estimates(&problem.model, &problem.stat, alpha, &mc)?.bound_stats()
            }
        };
        for form in [BoundForm::Aggregate, BoundForm::Split] {
            outcomes.push(BoundOutcome::Report(slepian_bound(
                &stats,
                &target,
                &g.constants,
                alpha,
                form,
            )?));
            match stein_bound(&stats, &target, &g.constants, alpha, form) {
                Ok(report) => outcomes.push(BoundOutcome::Report(report)),
                Err(LibError::NotPositiveDefinite(_)) => outcomes.push(BoundOutcome::Refused {
                    method: "stein",
                    form: form.as_str().to_string(),
                    alpha,
                    status: "C-not-PD".to_string(),
                }),
                Err(LibError::MissingConstant(name)) => outcomes.push(BoundOutcome::Refused {
                    method: "stein",
                    form: form.as_str().to_string(),
                    alpha,
                    status: format!("missing-{name}"),
                }),
                Err(e) => return Err(e.into()),
            }
        }
    }
    match &problem.kind {
        StatisticKind::Runs(spec) => {
            outcomes.push(BoundOutcome::Report(runs_bound(spec, &g.constants)?));
        }
        StatisticKind::QuadForm(spec) => {
            outcomes.push(BoundOutcome::Report(quadforms::qf_bound(
                spec,
                &target,
                &g.constants,
            )?));
        }
        StatisticKind::Generic => {}
    }

    let disc = match mode {
        Mode::Exact => discrepancy(&problem.model, &problem.stat, &g, &target, &EvalMode::Exact)?,
        Mode::Mc => {
            let mc = config.mc_config(seed)?;
            discrepancy(&problem.model, &problem.stat, &g, &target, &EvalMode::Mc(mc))?
        }
    };

    write_bound_output(&outcomes, &disc, args)?;
    let violations = outcomes
        .iter()
        .any(|o| matches!(o, BoundOutcome::Refused { .. }));
    Ok(if violations && args.strict {
        EXIT_HYPOTHESIS_VIOLATION
    } else {
        EXIT_OK
    })
}

fn write_bound_output(
    outcomes: &[BoundOutcome],
    disc: &DiscrepancyResult,
    args: &CommonArgs,
) -> Result<(), CliError> {
    let json_out = args
        .out
        .as_deref()
        .is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
    if json_out {
        return write_bound_json(outcomes, disc, args.out.as_deref().unwrap());
    }
    let columns = [
        "method",
        "form",
        "alpha",
        "term_name",
        "term_value",
        "constant_name",
        "constant_value",
        "total",
        "lhs",
        "slack",
        "pass",
        "status",
    ];
    let mut csv = Csv::new(&columns, args.reproducible);
    for outcome in outcomes {
        match outcome {
            BoundOutcome::Report(r) => {
                let pass = disc.lhs <= r.total + disc.lhs_error + 1e-9;
                let shared = |term: (&str, Option<f64>), constant: (&str, Option<f64>)| {
                    vec![
                        r.method.as_str().to_string(),
                        r.form.as_str().to_string(),
                        fmt_f64(r.alpha),
                        term.0.to_string(),
                        fmt_opt(term.1),
                        constant.0.to_string(),
                        fmt_opt(constant.1),
                        fmt_f64(r.total),
                        fmt_f64(disc.lhs),
                        fmt_f64(r.total - disc.lhs),
                        pass.to_string(),
                        "ok".to_string(),
                    ]
                };
                for t in &r.terms {
                    csv.row(&shared((&t.name, Some(t.value)), ("", None)));
                }
                for c in &r.constants {
                    csv.row(&shared(("", None), (&c.name, Some(c.value))));
                }
            }
            BoundOutcome::Refused {
                method,
                form,
                alpha,
                status,
            } => {
                csv.row(&[
                    method.to_string(),
                    form.clone(),
                    fmt_f64(*alpha),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    status.clone(),
                ]);
            }
        }
    }
    csv.write(args.out.as_deref())
}

fn write_bound_json(
    outcomes: &[BoundOutcome],
    disc: &DiscrepancyResult,
    path: &Path,
) -> Result<(), CliError> {
    let entries: Vec<serde_json::Value> = outcomes
        .iter()
        .map(|o| match o {
            BoundOutcome::Report(r) => {
                let pass = disc.lhs <= r.total + disc.lhs_error + 1e-9;
                serde_json::json!({
                    "status": "ok",
                    "report": r,
                    "lhs": disc.lhs,
                    "lhs_error": disc.lhs_error,
                    "slack": r.total - disc.lhs,
                    "pass": pass,
                })
            }
            BoundOutcome::Refused {
                method,
                form,
                alpha,
                status,
            } => serde_json::json!({
                "status": status,
                "method": method,
                "form": form,
                "alpha": alpha,
            }),
        })
        .collect();
    let text = serde_json::to_string_pretty(&entries)
        .map_err(|e| CliError::Config(format!("json serialization failed: {e}")))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn resolve_mode(config: &RunConfig, args: &CommonArgs) -> Result<Mode, CliError> {
    if let Some(m) = args.mode {
        return Ok(m);
    }
    match config.mode.as_deref() {
        None | Some("exact") => Ok(Mode::Exact),
        Some("mc") => Ok(Mode::Mc),
        Some(other) => Err(CliError::Config(format!("unknown mode \"{other}\""))),
    }
}

pub fn cmd_sweep(config: &RunConfig, args: &CommonArgs) -> Result<u8, CliError> {
    config.check_command("sweep")?;
    let sweep_cfg = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
    let g = build_test_function(config)?;
    let constants = g.constants;
    let n_grid = &sweep_cfg.n_grid;
    if n_grid.is_empty() {
        return Err(CliError::Config("sweep n_grid is empty".into()));
    }

    let mut points: Vec<(f64, f64)> = Vec::new();
    let csv = match sweep_cfg.family.as_str() {
        "bernoulli-runs" => {
            let p = sweep_cfg.p.unwrap_or(0.5);
            let d = sweep_cfg.d.unwrap_or(1);
            if g.dim() != d {
                return Err(CliError::Config(format!(
                    "test function dimension {} does not match runs dimension {d}",
                    g.dim()
                )));
            }
            let mut csv = Csv::new(
                &["n", "variance_term", "third_moment_term", "total", "lhs", "slope_running"],
                args.reproducible,
            );
            let mut totals = Vec::new();
            for &n in n_grid {
                let spec = RunsSpec::bernoulli(n, d, p).map_err(CliError::from)?;
                let report = runs_bound(&spec, &constants)?;
                totals.push((n as f64, report.total));
                points.push((n as f64, report.total));
                let lhs = exact_runs_lhs(&spec, &g)?;
                let slope = running_slope(&totals);
                csv.row(&[
                    n.to_string(),
                    fmt_f64(report.term("variance_term").unwrap_or(0.0)),
                    fmt_f64(report.term("third_moment_term").unwrap_or(0.0)),
                    fmt_f64(report.total),
                    fmt_opt(lhs),
                    slope.map(fmt_f64).unwrap_or_default(),
                ]);
            }
            csv
        }
        family @ ("qf-tridiagonal" | "qf-concentrated-row") => {
            if g.dim() != 1 {
                return Err(CliError::Config(
                    "quadratic-form sweeps are one-dimensional".into(),
                ));
            }
            let ctor: &dyn Fn(usize) -> Result<quadforms::QuadFormSpec, LibError> =
                if family == "qf-tridiagonal" {
                    &quadforms::tridiagonal_spec
                } else {
                    &quadforms::concentrated_row_spec
                };
            let target = cltbound::bounds::GaussianTarget::identity(1);
            let sweep = clt_sweep(ctor, &target, &constants, n_grid)?;
            let mut csv = Csv::new(
                &[
                    "n",
                    "covariance_mismatch",
                    "mixed_trace_variance",
                    "row_sum_variance",
                    "third_moment_term",
                    "total",
                    "max_pairwise_dev",
                    "max_trace_condition",
                    "max_row_condition",
                    "max_dejong",
                    "lhs",
                    "slope_running",
                ],
                args.reproducible,
            );
            let mut totals = Vec::new();
            for row in &sweep.rows {
                totals.push((row.n as f64, row.total));
                points.push((row.n as f64, row.total));
                let lhs = if row.n <= 10 {
                    let spec = ctor(row.n)?;
                    let r = discrepancy(
                        &spec.model()?,
                        &spec.statistic(),
                        &g,
                        &target,
                        &EvalMode::Exact,
                    )?;
                    Some(r.lhs)
                } else {
                    None
                };
                let slope = running_slope(&totals);
                csv.row(&[
                    row.n.to_string(),
                    fmt_f64(row.covariance_mismatch),
                    fmt_f64(row.mixed_trace_variance),
                    fmt_f64(row.row_sum_variance),
                    fmt_f64(row.third_moment_term),
                    fmt_f64(row.total),
                    fmt_f64(row.max_pairwise_dev),
                    fmt_f64(row.max_trace_condition),
                    fmt_f64(row.max_row_condition),
                    fmt_f64(row.max_dejong),
                    fmt_opt(lhs),
                    slope.map(fmt_f64).unwrap_or_default(),
                ]);
            }
            if !sweep.row_condition_vanishing || !sweep.trace_condition_vanishing {
                eprintln!(
                    "warning: convergence conditions do not vanish along this family \
                     (trace vanishing: {}, row vanishing: {})",
                    sweep.trace_condition_vanishing, sweep.row_condition_vanishing
                );
            }
            csv
        }
        other => return Err(CliError::Config(format!("unknown sweep family \"{other}\""))),
    };
    csv.write(args.out.as_deref())?;

    if let Some(svg_path) = &args.svg {
        let slope = if points.len() >= 2 {
            let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
            Some(log_log_slope(&xs, &ys))
        } else {
            None
        };
        let svg = log_log_plot(&points, slope, &format!("{} sweep", sweep_cfg.family));
        std::fs::write(svg_path, svg)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", svg_path.display())))?;
    }
    Ok(EXIT_OK)
}

/// Exact discrepancy for a runs spec against its own covariance, when
/// the base is small enough to enumerate.
fn exact_runs_lhs(
    spec: &RunsSpec,
    g: &cltbound::verify::SmoothTestFunction,
) -> Result<Option<f64>, CliError> {
    let coords = spec.n() + spec.window_lengths().last().unwrap() - 1;
    if coords > 12 {
        return Ok(None);
    }
    let model = spec.model()?;
    let table = JointTable::build(&model, &spec.statistic())?;
    let (_, cov) = table.moments();
    let target = cltbound::bounds::GaussianTarget::new(cov)?;
    let r = discrepancy(&model, &spec.statistic(), g, &target, &EvalMode::Exact)?;
    Ok(Some(r.lhs))
}

fn running_slope(totals: &[(f64, f64)]) -> Option<f64> {
    if totals.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = totals.iter().map(|t| t.0).collect();
    let ys: Vec<f64> = totals.iter().map(|t| t.1).collect();
    Some(log_log_slope(&xs, &ys))
}

pub fn cmd_compare_runs(config: &RunConfig, args: &CommonArgs) -> Result<u8, CliError> {
    config.check_command("compare-runs")?;
    let g = build_test_function(config)?;
    let cmp_cfg = config.compare_runs.as_ref();
    let p_values = cmp_cfg
        .and_then(|c| c.p_values.clone())
        .unwrap_or_else(|| vec![0.3, 0.5, 0.7]);
    let d_values = cmp_cfg
        .and_then(|c| c.d_values.clone())
        .unwrap_or_else(|| vec![1, 2, 3]);
    let n_values = cmp_cfg
        .and_then(|c| c.n_values.clone())
        .unwrap_or_else(|| vec![10, 100, 1000]);

    let mut csv = Csv::new(
        &[
            "p",
            "d",
            "n",
            "variance_term",
            "third_moment_term",
            "specialized_total",
            "improved_bound",
            "reinert_rollin_bound",
            "specialized_le_improved",
            "improved_le_reinert_rollin",
            "formula_vs_exact_max_dev",
        ],
        args.reproducible,
    );
    let mut ordering_failures = 0usize;
    for &p in &p_values {
        for &d in &d_values {
            for &n in &n_values {
                let cmp = bernoulli_runs_suite(n, d, p, &g.constants)?;
                if !cmp.specialized_le_improved
                    || cmp.improved_le_reinert_rollin == Some(false)
                {
                    ordering_failures += 1;
                }
                csv.row(&[
                    fmt_f64(p),
                    d.to_string(),
                    n.to_string(),
                    fmt_f64(cmp.specialized.term("variance_term").unwrap_or(0.0)),
                    fmt_f64(cmp.specialized.term("third_moment_term").unwrap_or(0.0)),
                    fmt_f64(cmp.specialized.total),
                    fmt_f64(cmp.improved_bound),
                    fmt_f64(cmp.reinert_rollin_bound),
                    cmp.specialized_le_improved.to_string(),
                    cmp.improved_le_reinert_rollin
                        .map(|b| b.to_string())
                        .unwrap_or_default(),
                    fmt_opt(cmp.formula_vs_exact),
                ]);
            }
        }
    }
    csv.write(args.out.as_deref())?;
    Ok(if ordering_failures > 0 {
        EXIT_CHECK_FAILURE
    } else {
        EXIT_OK
    })
}
