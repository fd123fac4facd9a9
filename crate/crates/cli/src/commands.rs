//! Subcommand bodies. Each writes its trace CSV and manifest and returns the
//! summary printed on stdout.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fpboost::clairvoyant::run_clairvoyant;
use fpboost::eignash::eignash_iterate;
use fpboost::games::{builtin, normalize_payoffs, HedgeMode};
use fpboost::io::{format_vector_csv, read_edge_list};
use fpboost::linops::google_matrix;
use fpboost::power::{exp_power_iterate, PowerConfig, StopReason, Truncation};
use fpboost::replicator::{integrate_orbit, OrbitConfig};
use fpboost::zerosum::{solve_hedge_average, solve_stable_average, SolveOptions};
use fpboost::{Error, Strategy};

use crate::error::{CliError, CliResult, EXIT_STALL};
use crate::experiment::{run_experiment, ExperimentRow, DEFAULT_ALPHA, DEFAULT_ITERS};
use crate::inputs::{load_matrix, load_strategy, load_vector};
use crate::manifest::RunManifest;

/// Raw payoffs within this distance of antisymmetric count as zero-sum.
pub const ANTISYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "fpboost", version, about = "Boosted fixed-point iterations: power methods, Hedge averaging, replicator orbits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dominant eigenvector by the simple or exponentiated power method.
    Eig(EigArgs),
    /// Averaged Hedge on a symmetric zero-sum game.
    Zerosum(ZerosumArgs),
    /// RK4 orbit of the replicator dynamic with its time average.
    Replicator(ReplicatorArgs),
    /// Clairvoyant averaging for a general symmetric game.
    Clairvoyant(ClairvoyantArgs),
    /// Naive versus log-domain Hedge on the symmetrized Shapley game.
    ShapleyExperiment(ShapleyArgs),
    /// Dominant-eigenvector iteration toward an equilibrium.
    Eignash(EignashArgs),
}

#[derive(Debug, Args)]
pub struct StartArgs {
    /// `uniform`, `random`, a file, or an inline comma-separated vector.
    #[arg(long, default_value = "uniform")]
    pub x0: String,
    /// Seed for `--x0 random`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EigArgs {
    /// Matrix file (dense CSV or MatrixMarket), edge list with `--google`, or a built-in name.
    pub input: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Truncation order of the exponential series; 0 is the simple method.
    #[arg(long, conflicts_with = "exact")]
    pub m: Option<usize>,
    /// Apply the full exponential (adaptive series).
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub start: StartArgs,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// Known dominant eigenvector; enables the sin-angle column and rate fit.
    #[arg(long)]
    pub ref_eigvec: Option<String>,
    /// Treat the input as an edge list and build the Google matrix.
    #[arg(long)]
    pub google: bool,
    #[arg(long, default_value_t = 0.85)]
    pub damping: f64,
    #[arg(long, default_value = "eig.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ZerosumMode {
    Naive,
    StableLog,
    PureMultiplier,
}

impl ZerosumMode {
    fn name(self) -> &'static str {
        match self {
            Self::Naive => "naive",
            Self::StableLog => "stable-log",
            Self::PureMultiplier => "pure-multiplier",
        }
    }
}

#[derive(Debug, Args)]
pub struct ZerosumArgs {
    /// Payoff file or built-in name.
    pub input: String,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = ZerosumMode::StableLog)]
    pub mode: ZerosumMode,
    /// Run even if the payoffs are not antisymmetric.
    #[arg(long)]
    pub force: bool,
    /// Strategy for the `re_to_target` column (`uniform`, file or inline).
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, default_value = "zerosum.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplicatorArgs {
    pub input: String,
    /// `uniform`, `random`, a file, or an inline comma-separated vector.
    #[arg(long, default_value = "random")]
    pub x0: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Write every k-th step.
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, default_value = "replicator.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClairvoyantArgs {
    pub input: String,
    #[arg(long, default_value_t = 0.01)]
    pub alpha_bar: f64,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    #[command(flatten)]
    pub start: StartArgs,
    #[arg(long, default_value = "clairvoyant.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ShapleyArgs {
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_ITERS)]
    pub iters: usize,
    #[arg(long, default_value = "0.1,0.2,0.3,0.2,0.1,0.1")]
    pub x0: String,
    /// Prefix; writes `<out>.naive.csv` and `<out>.stable.csv`.
    #[arg(long, default_value = "shapley")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EignashArgs {
    pub input: String,
    /// Rescale payoffs to [0, 1] first.
    #[arg(long)]
    pub normalize: bool,
    #[command(flatten)]
    pub start: StartArgs,
    #[arg(long, default_value_t = 50)]
    pub iters: usize,
    #[arg(long, default_value = "eignash.csv")]
    pub out: PathBuf,
}

pub fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Eig(a) => cmd_eig(a),
        Command::Zerosum(a) => cmd_zerosum(a),
        Command::Replicator(a) => cmd_replicator(a),
        Command::Clairvoyant(a) => cmd_clairvoyant(a),
        Command::ShapleyExperiment(a) => cmd_shapley_experiment(a),
        Command::Eignash(a) => cmd_eignash(a),
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}_{i}"))
}

fn cmd_eig(a: &EigArgs) -> CliResult<String> {
    let m = if a.google {
        let (edges, n) = read_edge_list(Path::new(&a.input))?;
        google_matrix(&edges, n, a.damping)?
    } else {
        load_matrix(&a.input)?
    };
    let n = m.n();
    let x0 = load_vector(&a.start.x0, n, a.start.seed)?;
    let reference = a.ref_eigvec.as_deref().map(|s| load_vector(s, n, a.start.seed)).transpose()?;
    let truncation = if a.exact { Truncation::Exact } else { Truncation::Order(a.m.unwrap_or(0)) };
    let cfg = PowerConfig {
        alpha: a.alpha,
        truncation,
        max_iters: a.max_iters,
        tol: a.tol,
        reference,
        ..PowerConfig::default()
    };
    let out = exp_power_iterate(&m, &x0, &cfg)?;

    let mut man = RunManifest::new("eig");
    man.set("input", &a.input);
    man.set("google", a.google);
    man.set("damping", a.damping);
    man.set("alpha", a.alpha);
    man.set("truncation", match truncation {
        Truncation::Exact => "exact".to_string(),
        Truncation::Order(k) => k.to_string(),
    });
    man.set("x0", &a.start.x0);
    man.set("seed", a.start.seed);
    man.set("tol", a.tol);
    man.set("max_iters", a.max_iters);
    man.set("ref_eigvec", a.ref_eigvec.as_deref().unwrap_or(""));
    man.set("output", a.out.display());

    let header: Vec<String> = ["iter", "rayleigh", "step_change", "sin_angle"].map(String::from).to_vec();
    let t = &out.trace;
    let rows = (0..out.iterations).map(|k| {
        vec![
            (k + 1).to_string(),
            num(t.rayleigh[k]),
            num(t.step_change[k]),
            opt(t.sin_angle.get(k).copied()),
        ]
    });
    write_csv(&a.out, &header, rows)?;
    man.write_beside(&a.out)?;

    let stop = match out.stop {
        StopReason::Converged => "converged",
        StopReason::MaxIters => "max_iters",
        StopReason::Stagnated => "stagnated",
    };
    let mut summary = format!(
        "lambda1={} iterations={} stop={stop} rate={} vector={}",
        num(out.estimate.lambda1),
        out.iterations,
        out.estimate.rate.map(num).unwrap_or_else(|| "NA".into()),
        format_vector_csv(&out.vector)
    );
    if a.google {
        let s: f64 = out.vector.iter().sum();
        let pr: Vec<f64> = out.vector.iter().map(|v| v / s).collect();
        summary.push_str(&format!(" pagerank={}", format_vector_csv(&pr)));
    }
    Ok(summary)
}

fn cmd_zerosum(a: &ZerosumArgs) -> CliResult<String> {
    let game = normalize_payoffs(&load_matrix(&a.input)?)?;
    if game.antisymmetry_defect > ANTISYMMETRY_TOL && !a.force {
        return Err(Error::NotAntisymmetric(game.antisymmetry_defect).into());
    }
    let target = a.target.as_deref().map(|s| load_strategy(s, game.n(), 0)).transpose()?;
    let opts = SolveOptions { target, skip_antisymmetry_check: true };
    let run = match a.mode {
        ZerosumMode::Naive => solve_hedge_average(&game, a.epsilon, HedgeMode::Naive, &opts)?,
        ZerosumMode::StableLog => solve_hedge_average(&game, a.epsilon, HedgeMode::LogDomain, &opts)?,
        ZerosumMode::PureMultiplier => solve_stable_average(&game, a.epsilon, &opts)?,
    };

    let mut man = RunManifest::new("zerosum");
    man.set("input", &a.input);
    man.set("epsilon", a.epsilon);
    man.set("mode", a.mode.name());
    man.set("force", a.force);
    man.set("target", a.target.as_deref().unwrap_or(""));
    man.set("output", a.out.display());

    let pure = a.mode == ZerosumMode::PureMultiplier;
    let mut header: Vec<String> =
        ["iter", "approx_error_normalized", "approx_error_raw", "re_to_target"].map(String::from).to_vec();
    if pure {
        header.push("multiplier".into());
    }
    let rows = run.trace.iter().map(|r| {
        let mut row = vec![
            r.iter.to_string(),
            num(r.approx_error_normalized),
            num(r.approx_error_raw),
            opt(r.re_to_target),
        ];
        if pure {
            row.push(run.multipliers[r.iter].to_string());
        }
        row
    });
    write_csv(&a.out, &header, rows)?;
    man.write_beside(&a.out)?;

    let which = if pure { "multiplier average" } else { "iterate average" };
    let certified = run.final_error <= a.epsilon;
    if !certified && game.antisymmetry_defect <= ANTISYMMETRY_TOL {
        return Err(CliError::numerical(format!(
            "certificate failed: {which} error {} exceeds {} after {} iterations",
            num(run.final_error),
            a.epsilon,
            run.k_target
        )));
    }
    let mut summary = if certified {
        format!("error <= {} after {} iterations", a.epsilon, run.k_target)
    } else {
        format!("error {} exceeds {} after {} iterations (payoffs not antisymmetric)", num(run.final_error), a.epsilon, run.k_target)
    };
    summary.push_str(&format!(
        "; {which} approx_error={} (raw {}), alpha={}",
        num(run.final_error),
        num(game.to_raw_units(run.final_error)),
        num(run.alpha)
    ));
    if pure {
        summary.push_str(&format!(", initial multiplier={}", run.multipliers[0]));
    }
    Ok(summary)
}

fn cmd_replicator(a: &ReplicatorArgs) -> CliResult<String> {
    let c = load_matrix(&a.input)?;
    let n = c.n();
    let x0 = load_strategy(&a.x0, n, a.seed)?;
    let target = a.target.as_deref().map(|s| load_strategy(s, n, a.seed)).transpose()?;
    let cfg = OrbitConfig {
        t_end: a.t_end,
        dt: a.dt,
        record_every: a.record_every,
        target,
    };
    let orbit = integrate_orbit(&c, &x0, &cfg)?;

    let mut man = RunManifest::new("replicator");
    man.set("input", &a.input);
    man.set("x0", &a.x0);
    man.set("seed", a.seed);
    man.set("t_end", a.t_end);
    man.set("dt", a.dt);
    man.set("record_every", a.record_every);
    man.set("target", a.target.as_deref().unwrap_or(""));
    man.set("output", a.out.display());

    let mut header = vec!["t".to_string()];
    header.extend(indexed("x", n));
    header.extend(indexed("avg", n));
    header.push("re_to_target".into());
    let rows = orbit.points.iter().map(|p| {
        let mut row = vec![num(p.t)];
        row.extend(p.x.iter().copied().map(num));
        row.extend(p.avg.iter().copied().map(num));
        row.push(opt(p.re_to_target));
        row
    });
    write_csv(&a.out, &header, rows)?;
    man.write_beside(&a.out)?;

    if let Some(t) = orbit.aborted_at {
        return Err(CliError::numerical(format!("integration produced a non-finite state at t = {t}")));
    }
    let s = &orbit.summary;
    Ok(format!(
        "t_end={} steps={} average={} conserved_re_drift={} clamps={}",
        num(s.t_end),
        s.steps,
        s.average,
        s.conserved_re_drift.map(num).unwrap_or_else(|| "NA".into()),
        s.clamp_count
    ))
}

fn cmd_clairvoyant(a: &ClairvoyantArgs) -> CliResult<String> {
    let game = normalize_payoffs(&load_matrix(&a.input)?)?;
    let x0 = load_strategy(&a.start.x0, game.n(), a.start.seed)?;
    let run = run_clairvoyant(&game.normalized, &x0, a.alpha_bar, a.iters, false)?;

    let mut man = RunManifest::new("clairvoyant");
    man.set("input", &a.input);
    man.set("alpha_bar", a.alpha_bar);
    man.set("iters", a.iters);
    man.set("x0", &a.start.x0);
    man.set("seed", a.start.seed);
    man.set("output", a.out.display());

    let header: Vec<String> = ["K", "alpha_K", "A_K", "halvings", "approx_error", "bound"].map(String::from).to_vec();
    let rows = run.rows.iter().map(|r| {
        vec![
            r.k.to_string(),
            num(r.alpha),
            num(r.a_sum),
            r.halvings.to_string(),
            num(r.approx_error),
            num(r.bound),
        ]
    });
    write_csv(&a.out, &header, rows)?;
    man.write_beside(&a.out)?;

    if let Some(stall) = run.stall {
        return Err(CliError {
            code: EXIT_STALL,
            message: format!("{stall} (trace of {} accepted steps written)", run.rows.len()),
        });
    }
    let last = run.rows.last();
    Ok(format!(
        "iterations={} A_K={} approx_error={} bound={} X={}",
        run.rows.len(),
        num(run.state.a_sum),
        last.map(|r| num(r.approx_error)).unwrap_or_else(|| "NA".into()),
        last.map(|r| num(r.bound)).unwrap_or_else(|| "NA".into()),
        run.state.x
    ))
}

/// `shapley` becomes `shapley.naive.csv`.
pub fn experiment_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let with = |tag: &str| {
        let mut s = prefix.as_os_str().to_os_string();
        s.push(format!(".{tag}.csv"));
        PathBuf::from(s)
    };
    (with("naive"), with("stable"))
}

fn cmd_shapley_experiment(a: &ShapleyArgs) -> CliResult<String> {
    let c = builtin::shapley6();
    let x0 = load_strategy(&a.x0, c.n(), 0)?;
    let e = run_experiment(&c, a.alpha, a.iters, &x0)?;
    let (naive_path, stable_path) = experiment_paths(&a.out);

    let mut header = vec!["iter".to_string(), "re_uniform_avg".to_string()];
    header.extend(indexed("x", c.n()));
    header.push("status".into());
    let to_row = |r: &ExperimentRow| {
        let mut row = vec![r.iter.to_string(), num(r.re_uniform_avg)];
        row.extend(r.x.iter().copied().map(num));
        row.push("ok".into());
        row
    };
    for (path, rows, mode, failed) in [
        (&naive_path, &e.naive, "naive", e.naive_failed_at),
        (&stable_path, &e.stable, "stable-log", None),
    ] {
        let mut out: Vec<Vec<String>> = rows.iter().map(to_row).collect();
        if let Some(k) = failed {
            let mut row = vec![k.to_string(), String::new()];
            row.extend(std::iter::repeat_n(String::new(), c.n()));
            row.push("overflow".into());
            out.push(row);
        }
        write_csv(path, &header, out)?;
        let mut man = RunManifest::new("shapley-experiment");
        man.set("game", "shapley6");
        man.set("mode", mode);
        man.set("alpha", a.alpha);
        man.set("iters", a.iters);
        man.set("x0", &a.x0);
        man.set("output", path.display());
        man.write_beside(path)?;
    }

    Ok(format!(
        "max_divergence={} first_separation={} max_re_gap={} naive_overflow={} final_re_naive={} final_re_stable={}",
        num(e.max_divergence),
        e.first_separation.map(|k| k.to_string()).unwrap_or_else(|| "none".into()),
        num(e.max_re_gap),
        e.naive_failed_at.map(|k| k.to_string()).unwrap_or_else(|| "none".into()),
        num(e.naive.last().map_or(f64::NAN, |r| r.re_uniform_avg)),
        num(e.stable.last().map_or(f64::NAN, |r| r.re_uniform_avg)),
    ))
}

fn cmd_eignash(a: &EignashArgs) -> CliResult<String> {
    let raw = load_matrix(&a.input)?;
    let c = if a.normalize { normalize_payoffs(&raw)?.normalized } else { raw };
    let x0: Strategy = load_strategy(&a.start.x0, c.n(), a.start.seed)?;
    let trace = eignash_iterate(&c, &x0, a.iters)?;

    let mut man = RunManifest::new("eignash");
    man.set("input", &a.input);
    man.set("normalize", a.normalize);
    man.set("x0", &a.start.x0);
    man.set("seed", a.start.seed);
    man.set("iters", a.iters);
    man.set("output", a.out.display());

    let header: Vec<String> = ["k", "lambda", "residual", "approx_error"].map(String::from).to_vec();
    let rows = trace
        .iter()
        .map(|r| vec![r.k.to_string(), num(r.lambda), num(r.residual), num(r.approx_error)]);
    write_csv(&a.out, &header, rows)?;
    man.write_beside(&a.out)?;

    let unconverged = trace.iter().filter(|r| !r.inner_converged).count();
    Ok(match trace.last() {
        Some(r) => format!(
            "iterations={} lambda={} residual={} approx_error={} inner_unconverged={unconverged} X={}",
            trace.len(),
            num(r.lambda),
            num(r.residual),
            num(r.approx_error),
            r.x
        ),
        None => "iterations=0".into(),
    })
}
