use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use stochorder::gamefile::k_max_override;
use stochorder::moments::raw_moments;
use stochorder::risk::{emit_plot_data_at, mgss_report_at, report_at, DEFAULT_QUANTILES};
use stochorder::*;

/// Moments printed per distribution.
const SHOWN_MOMENTS: usize = 5;

#[derive(Parser)]
#[command(name = "stochorder", version, about = "Order loss distributions and solve distribution-valued games")]
struct Cli {
    /// Worker threads for the parallel moment and best-response paths.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compare two distribution literals.
    Compare { a: PathBuf, b: PathBuf },
    /// Solve a zero-sum game file.
    Solve {
        game: PathBuf,
        /// Write the result JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write plot data of the outcome distribution.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Solve a multi-goal game file for a security strategy.
    Mgss {
        game: PathBuf,
        /// Goal weights, rescaled to sum to one; defaults to the file's or equal weights.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Risk figures for a saved result.
    Report {
        game: PathBuf,
        /// Result JSON written by `solve` or `mgss`.
        #[arg(long)]
        from: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_QUANTILES)]
        quantiles: Vec<f64>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// What went wrong, mapped to process exit codes.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    NotConverged,
    Incomparable(anyhow::Error),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Input(_) => 2,
            Failure::NotConverged => 3,
            Failure::Incomparable(_) => 4,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        if let Some(core) = e.downcast_ref::<Error>() {
            return match core {
                Error::IncomparablePayoffs(..) | Error::IncomparablePair(..) => Failure::Incomparable(e),
                Error::Parse { .. }
                | Error::Validation { .. }
                | Error::Io { .. }
                | Error::InvalidDistribution(_)
                | Error::ShapeMismatch(_)
                | Error::NotASimplex(_)
                | Error::NegativeRectangleMass { .. }
                | Error::UnsupportedCoupling => Failure::Input(e),
                _ => Failure::Other(e),
            };
        }
        if e.downcast_ref::<serde_json::Error>().is_some() || e.downcast_ref::<std::io::Error>().is_some() {
            return Failure::Input(e);
        }
        Failure::Other(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn relation_name(r: Relation) -> &'static str {
    match r {
        Relation::FirstPreferred => "first_preferred",
        Relation::SecondPreferred => "second_preferred",
        Relation::Equivalent => "equivalent",
        Relation::Undecided => "undecided",
    }
}

fn rule_name(d: DecidedBy) -> &'static str {
    match d {
        DecidedBy::MomentDominance(_) => "moment_dominance",
        DecidedBy::TailDensity => "tail_density",
        DecidedBy::SupportEndpoint => "support_endpoint",
        DecidedBy::RatioCriterion => "ratio_criterion",
        DecidedBy::PointMassRule => "point_mass_rule",
        DecidedBy::TruncationSequence => "truncation_sequence",
    }
}

fn emit(v: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v).map_err(anyhow::Error::from)?;
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|source| Error::Io { path: p.to_path_buf(), source })?,
        None => print!("{text}"),
    }
    Ok(())
}

fn compact(d: LossDistribution, policy: &TruncationPolicy) -> Result<LossDistribution, Failure> {
    if d.is_compact() {
        return Ok(d);
    }
    Ok(d.truncate(policy)?)
}

fn compare_cmd(a: &Path, b: &Path) -> Result<(), Failure> {
    let da = parse_distribution(a)?;
    let db = parse_distribution(b)?;
    let k_max = k_max_override()?.unwrap_or(DEFAULT_K_MAX);
    let out = compare(&da, &db, &OrderingConfig::with_k_max(k_max));
    let policy = TruncationPolicy::default();
    let ma = raw_moments(&compact(da, &policy)?, SHOWN_MOMENTS)?;
    let mb = raw_moments(&compact(db, &policy)?, SHOWN_MOMENTS)?;
    emit(
        &json!({
            "relation": relation_name(out.relation),
            "strict": out.strict,
            "decided_by": out.decided_by.map(rule_name),
            "witness_k": out.witness_k,
            "moments_a": ma,
            "moments_b": mb,
        }),
        None,
    )
}

fn solve_cmd(path: &Path, out: Option<&Path>, csv: Option<&Path>) -> Result<(), Failure> {
    let lg = parse_game(path)?;
    let g = lg
        .game()
        .ok_or_else(|| Failure::Input(anyhow!("{}: holds goals; use `mgss`", path.display())))?;
    let r = solve_zero_sum(g, &lg.solver)?;
    emit(
        &json!({
            "p_star": r.p_star.probs(),
            "q_star": r.q_star.probs(),
            "assurance_moments": r.assurance.raw_moments(SHOWN_MOMENTS),
            "iterations": r.iterations,
            "converged": r.converged,
            "polished": r.polished,
        }),
        out,
    )?;
    if let Some(c) = csv {
        emit_plot_data_at(g, r.p_star.probs(), r.q_star.probs(), c)?;
    }
    if !r.converged {
        return Err(Failure::NotConverged);
    }
    Ok(())
}

fn normalized_weights(w: &[f64]) -> anyhow::Result<Vec<f64>> {
    if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::NotASimplex("weights must be positive".into()).into());
    }
    let s: f64 = w.iter().sum();
    let mut out: Vec<f64> = w.iter().map(|x| x / s).collect();
    let head: f64 = out[..out.len() - 1].iter().sum();
    *out.last_mut().unwrap() = 1.0 - head;
    Ok(out)
}

fn mgss_cmd(path: &Path, weights: Option<&[f64]>, out: Option<&Path>) -> Result<(), Failure> {
    let lg = parse_game(path)?;
    let mg = lg
        .multi()
        .ok_or_else(|| Failure::Input(anyhow!("{}: holds a single payoff matrix; use `solve`", path.display())))?;
    let raw = match (weights, &lg.spec.weights) {
        (Some(w), _) => w.to_vec(),
        (None, Some(w)) => w.clone(),
        (None, None) => vec![1.0; mg.len()],
    };
    if raw.len() != mg.len() {
        return Err(Error::ShapeMismatch(format!("{} weights for {} goals", raw.len(), mg.len())).into());
    }
    let r = solve_mgss(mg, &lg.solver, &normalized_weights(&raw)?)?;
    let q_stars: Vec<&[f64]> = r.q_stars.iter().map(|q| q.probs()).collect();
    let moments: Vec<Vec<f64>> = r.assurance.iter().map(|a| a.raw_moments(SHOWN_MOMENTS)).collect();
    emit(
        &json!({
            "p_star": r.p_star.probs(),
            "q_stars": q_stars,
            "assurance_moments": moments,
            "iterations": r.iterations,
            "converged": r.converged,
            "axiom_report": {
                "grid_res": r.axiom_report.grid_res,
                "tol": r.axiom_report.tol,
                "assurance_holds": r.axiom_report.assurance_holds(),
                "efficiency_holds": r.axiom_report.efficiency_holds(),
                "assurance_violations": r.axiom_report.assurance_violations,
                "worst_assurance_distance": r.axiom_report.worst_assurance_distance,
                "attained": r.axiom_report.attained,
                "efficiency_violations": r.axiom_report.efficiency_violations,
            },
        }),
        out,
    )?;
    if !r.converged {
        return Err(Failure::NotConverged);
    }
    Ok(())
}

fn strategy(v: &Value, key: &str) -> anyhow::Result<Vec<f64>> {
    serde_json::from_value(v.get(key).cloned().ok_or_else(|| anyhow!("result has no `{key}`"))?)
        .with_context(|| format!("result field `{key}`"))
}

fn report_cmd(path: &Path, from: &Path, alphas: &[f64], csv: Option<&Path>) -> Result<(), Failure> {
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(Failure::Input(anyhow!("quantile levels must lie strictly between 0 and 1")));
    }
    let mut alphas = alphas.to_vec();
    alphas.sort_by(f64::total_cmp);
    let lg = parse_game(path)?;
    let text = std::fs::read_to_string(from).map_err(|source| Error::Io { path: from.to_path_buf(), source })?;
    let saved: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(anyhow!(e).context(format!("{}", from.display()))))?;
    let p = strategy(&saved, "p_star").map_err(Failure::Input)?;
    let (report, moments) = match &lg.model {
        Model::Game(g) => {
            let q = strategy(&saved, "q_star").map_err(Failure::Input)?;
            let rep = report_at(g, &p, &q, &alphas)?;
            if let Some(c) = csv {
                emit_plot_data_at(g, &p, &q, c)?;
            }
            let m = mixed_payoff(g, &p, &q)?.raw_moments(SHOWN_MOMENTS);
            (rep, json!(m))
        }
        Model::Multi(mg) => {
            if csv.is_some() {
                return Err(Failure::Input(anyhow!("plot data needs a single payoff matrix")));
            }
            let qs: Vec<Vec<f64>> = serde_json::from_value(
                saved.get("q_stars").cloned().ok_or_else(|| Failure::Input(anyhow!("result has no `q_stars`")))?,
            )
            .map_err(|e| Failure::Input(e.into()))?;
            let refs: Vec<&[f64]> = qs.iter().map(Vec::as_slice).collect();
            let rep = mgss_report_at(mg, &p, &refs, &alphas)?;
            let m = mg
                .goals()
                .iter()
                .zip(&qs)
                .map(|(g, q)| Ok(mixed_payoff(g, &p, q)?.raw_moments(SHOWN_MOMENTS)))
                .collect::<Result<Vec<_>, Error>>()?;
            (rep, json!(m))
        }
    };
    let mut v = serde_json::to_value(&report).map_err(anyhow::Error::from)?;
    v["raw_moments"] = moments;
    emit(&v, None)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Input(anyhow!("--threads must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Other(e.into()))?;
    }
    match cli.cmd {
        Cmd::Compare { a, b } => compare_cmd(&a, &b),
        Cmd::Solve { game, out, csv } => solve_cmd(&game, out.as_deref(), csv.as_deref()),
        Cmd::Mgss { game, weights, out } => mgss_cmd(&game, weights.as_deref(), out.as_deref()),
        Cmd::Report { game, from, quantiles, csv } => report_cmd(&game, &from, &quantiles, csv.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::NotConverged => eprintln!("error: solver did not converge"),
                Failure::Input(e) | Failure::Incomparable(e) | Failure::Other(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}
