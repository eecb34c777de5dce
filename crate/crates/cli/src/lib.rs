//! Batch driver for `jetmorse-core`.
//!
//! [`run`] parses a command line, executes one command inside a thread pool
//! sized by `JETMORSE_THREADS` (0 or unset: one thread per core) and maps
//! failures to exit codes: 0 on success, 2 for invalid input, 3 when a
//! numerical guard trips.

pub mod output;
pub mod scenario;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use jetmorse_core::hermitian::{eta_form, fiber_trace, signature, sym_power_curvature, DEFAULT_EIGEN_TOL};
use jetmorse_core::jet::{act, normalize_jet, reparam_matrix, suggest_permutation};
use jetmorse_core::metrics::{curvature_fd_check, fiber_weight, DEFAULT_EPS0};
use jetmorse_core::morse::{
    closed_form_for, closed_form_weighted, convergence_diag, delta_scan, fiber_mc, growth_bound, verdict, McConfig,
};
use jetmorse_core::wronskian::wedge_wronskian;
use jetmorse_core::{Complex64, Jet, MetricKind, MetricSpec, MorseEstimate, QMode, Reparam};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use output::{csv_text, read_csv, with_suffix, write_json, write_text, CsvRow, PlotRow};
use scenario::{jet_file, parse_jet, parse_reparam, parse_scenario, reparam_file, Scenario};

/// Deviation above which `fd-check` fails.
pub const FD_THRESHOLD: f64 = 1e-3;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "JETMORSE_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] jetmorse_core::Error),
    #[error("{0}")]
    Threshold(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Threshold(_) => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "jetmorse", version, about = "Jet metrics and Monte Carlo Morse integrals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply a reparametrization to a jet
    Act(RunArgs),
    /// Wedge Wronskians of a jet
    Wronskian(RunArgs),
    /// Invariant normalization of a jet
    Invariants(RunArgs),
    /// Fiber trace, eta form and expected base curvature per base sample
    Curvature(RunArgs),
    /// Compare the curvature expansion with finite differences
    FdCheck(RunArgs),
    /// Induced curvature on symmetric powers
    Sympow(RunArgs),
    /// Monte Carlo Morse integral and positivity verdict
    Morse(RunArgs),
    /// Largest twist strength keeping a positive verdict
    DeltaScan(RunArgs),
    /// Batch-means convergence diagnostic
    Converge(RunArgs),
    /// Aggregate earlier CSV outputs into a table against H_k^n
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricName {
    Gg,
    Test1,
    Test2,
    Sympow,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario JSON file
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Metric family; defaults to the scenario's embedded metric
    #[arg(long, value_enum)]
    pub metric: Option<MetricName>,
    /// Jet order
    #[arg(long)]
    pub k: Option<usize>,
    /// Metric exponent, or "auto" for the smallest admissible value
    #[arg(long, default_value = "auto")]
    pub p: String,
    /// Base of the weight schedule eps_s = eps0^s
    #[arg(long, default_value_t = DEFAULT_EPS0)]
    pub eps0: f64,
    /// Highest symmetric power used by the sympow metric
    #[arg(long, default_value_t = 3)]
    pub l_max: usize,
    /// Eigenvalue index set: exact:Q or atmost:Q
    #[arg(long, default_value = "atmost:1")]
    pub q: QMode,
    /// Monte Carlo sample count
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Random seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Twist grid a:b:step
    #[arg(long)]
    pub delta_grid: Option<String>,
    /// Batch count for `converge`
    #[arg(long, default_value_t = 20)]
    pub batches: usize,
    /// Output prefix; writes PREFIX.csv and/or PREFIX.json
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Jet JSON file ({"rows": [[[re, im], ...], ...]}); random if absent
    #[arg(long)]
    pub jet: Option<PathBuf>,
    /// Reparametrization JSON file ({"alpha": [[re, im], ...]}); random if absent
    #[arg(long)]
    pub reparam: Option<PathBuf>,
    /// Fiber rank of random jets when no scenario is given
    #[arg(long)]
    pub rank: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// CSV files written by earlier runs
    #[arg(long, num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    /// Scenario for the closed-form column
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Symmetric power bound assumed for sympow rows
    #[arg(long, default_value_t = 3)]
    pub l_max: usize,
    /// Output prefix
    #[arg(long)]
    pub out: PathBuf,
}

/// Fully resolved settings of one command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub scenario_path: Option<PathBuf>,
    pub scenario: Option<Scenario>,
    pub metric: Option<MetricSpec>,
    pub samples: usize,
    pub batches: usize,
    pub seed: Option<u64>,
    pub q_mode: QMode,
    pub delta_grid: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

/// Values `a, a + step, ...` up to `b` inclusive.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums: Option<Vec<f64>> = parts.iter().map(|s| s.trim().parse().ok()).collect();
    let Some([a, b, step]) = nums.as_deref().and_then(|v| <[f64; 3]>::try_from(v).ok()) else {
        return usage(format!("--delta-grid {text:?} is not a:b:step"));
    };
    if step.is_nan() || step <= 0.0 || b < a || a < 0.0 || !b.is_finite() {
        return usage(format!("--delta-grid {text:?} needs 0 <= a <= b and step > 0"));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    if count > 100_000 {
        return usage("--delta-grid has too many points");
    }
    // rounding keeps printed grid values short
    Ok((0..=count).map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12).collect())
}

fn metric_kind(name: MetricName, l_max: usize) -> MetricKind {
    match name {
        MetricName::Gg => MetricKind::DemaillyGG,
        MetricName::Test1 => MetricKind::Test1Wronskian,
        MetricName::Test2 => MetricKind::Test2Invariant,
        MetricName::Sympow => MetricKind::SymPowWronskian { l_max },
    }
}

impl RunConfig {
    pub fn resolve(command: &'static str, a: &RunArgs) -> Result<Self> {
        let scenario = a.scenario.as_deref().map(parse_scenario).transpose()?;
        let metric = match a.metric {
            Some(name) => {
                let Some(k) = a.k else {
                    return usage("--k is required with --metric");
                };
                let kind = metric_kind(name, a.l_max);
                Some(if a.p == "auto" {
                    MetricSpec::auto(kind, k, a.eps0)?
                } else {
                    let Ok(p) = a.p.parse::<u64>() else {
                        return usage(format!("--p {:?} is neither an integer nor \"auto\"", a.p));
                    };
                    if !(a.eps0 > 0.0 && a.eps0 < 1.0) {
                        return usage(format!("--eps0 {} must lie in (0, 1)", a.eps0));
                    }
                    MetricSpec::new(kind, k, p, (1..=k as i32).map(|s| a.eps0.powi(s)).collect())?
                })
            }
            None => scenario.as_ref().and_then(|s| s.metric.clone()),
        };
        let delta_grid = a.delta_grid.as_deref().map(parse_grid).transpose()?;
        Ok(RunConfig {
            command,
            scenario_path: a.scenario.clone(),
            scenario,
            metric,
            samples: a.samples,
            batches: a.batches,
            seed: a.seed,
            q_mode: a.q,
            delta_grid,
            out: a.out.clone(),
        })
    }

    fn scenario(&self) -> Result<&Scenario> {
        match &self.scenario {
            Some(s) => Ok(s),
            None => usage(format!("{} needs --scenario", self.command)),
        }
    }

    fn metric(&self) -> Result<&MetricSpec> {
        match &self.metric {
            Some(m) => Ok(m),
            None => usage(format!("{} needs --metric and --k (or a metric in the scenario)", self.command)),
        }
    }

    fn seed(&self) -> Result<u64> {
        match self.seed {
            Some(s) => Ok(s),
            None => usage(format!("{} needs --seed", self.command)),
        }
    }

    fn out(&self) -> Result<&Path> {
        match &self.out {
            Some(o) => Ok(o),
            None => usage(format!("{} needs --out", self.command)),
        }
    }

    fn mc(&self) -> Result<McConfig> {
        Ok(McConfig::new(self.samples, self.seed()?).with_chunks(rayon::current_num_threads()))
    }
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Jet with entries uniform in the unit square, from the `--seed` stream.
pub fn random_jet(k: usize, r: usize, seed: u64) -> Result<Jet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Jet::new((0..k).map(|_| (0..r).map(|_| random_complex(&mut rng)).collect()).collect())?)
}

/// Reparametrization with `|α_1|` in `[0.5, 1.5)`; the stream is offset
/// from [`random_jet`]'s so the two are independent.
pub fn random_reparam(k: usize, seed: u64) -> Result<Reparam> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let lead = Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..std::f64::consts::TAU));
    let mut alpha = vec![lead];
    alpha.extend((1..k).map(|_| random_complex(&mut rng)));
    Ok(Reparam::new(alpha)?)
}

fn load_jet(cfg: &RunConfig, a: &RunArgs) -> Result<Jet> {
    if let Some(path) = &a.jet {
        return parse_jet(path);
    }
    let k = match (a.k, &cfg.metric) {
        (Some(k), _) => k,
        (None, Some(m)) => m.k,
        (None, None) => return usage("a random jet needs --k (or pass --jet)"),
    };
    let r = match (a.rank, &cfg.scenario) {
        (Some(r), _) => r,
        (None, Some(s)) => s.base.r(),
        (None, None) => 2,
    };
    random_jet(k, r, cfg.seed()?)
}

fn emit<T: Serialize>(cfg: &RunConfig, value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value).expect("summary serializes"));
    if let Some(out) = &cfg.out {
        write_json(&with_suffix(out, ".json"), value)?;
    }
    Ok(())
}

fn cmd_act(cfg: &RunConfig, a: &RunArgs) -> Result<()> {
    let j = load_jet(cfg, a)?;
    let phi = match &a.reparam {
        Some(path) => parse_reparam(path)?,
        None => random_reparam(j.order(), cfg.seed()?)?,
    };
    let moved = act(&phi, &j)?;
    let matrix: Vec<Vec<[f64; 2]>> = reparam_matrix(&phi, j.order())?
        .iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect();
    emit(
        cfg,
        &json!({
            "jet": jet_file(&j),
            "reparam": reparam_file(&phi),
            "matrix": matrix,
            "result": jet_file(&moved),
        }),
    )
}

fn cmd_wronskian(cfg: &RunConfig, a: &RunArgs) -> Result<()> {
    let j = load_jet(cfg, a)?;
    let ws = (1..=j.order().min(j.rank()))
        .map(|l| wedge_wronskian(&j, l))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    emit(cfg, &json!({ "jet": jet_file(&j), "wronskians": ws }))
}

fn cmd_invariants(cfg: &RunConfig, a: &RunArgs) -> Result<()> {
    let j = load_jet(cfg, a)?;
    let (perm, normalized) = match normalize_jet(&j) {
        Ok(nj) => (None, nj),
        Err(jetmorse_core::Error::DegenerateNormalization) => {
            let Some(perm) = suggest_permutation(&j) else {
                return Err(jetmorse_core::Error::DegenerateNormalization.into());
            };
            let nj = normalize_jet(&j.permute_components(&perm)?)?;
            (Some(perm), nj)
        }
        Err(e) => return Err(e.into()),
    };
    emit(
        cfg,
        &json!({
            "jet": jet_file(&j),
            "permutation": perm,
            "eta": jet_file(&normalized.eta),
            "numerators": normalized.numerators,
        }),
    )
}

fn form_json(f: &jetmorse_core::HermitianForm) -> Vec<Vec<[f64; 2]>> {
    f.rows().iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

fn cmd_curvature(cfg: &RunConfig) -> Result<()> {
    let sc = &cfg.scenario()?.base;
    let spec = cfg.metric()?;
    let w = fiber_weight(spec);
    let mut points = Vec::new();
    for (i, s) in sc.samples().iter().enumerate() {
        let trace = fiber_trace(&s.model);
        let eta = eta_form(sc, i)?;
        points.push(json!({
            "weight": s.weight,
            "fiber_trace": form_json(&trace),
            "expected_sampler": form_json(&trace.scale(w / sc.r() as f64)),
            "eta": form_json(&eta),
            "eta_eigenvalues": eta.eigenvalues(),
            "eta_signature": signature(&eta, DEFAULT_EIGEN_TOL),
        }));
    }
    emit(cfg, &json!({ "metric": spec, "fiber_weight": w, "samples": points }))
}

fn cmd_fd_check(cfg: &RunConfig, a: &RunArgs) -> Result<()> {
    let sc = &cfg.scenario()?.base;
    let spec = cfg.metric()?;
    let j = load_jet(cfg, a)?;
    let devs = sc
        .samples()
        .iter()
        .map(|s| curvature_fd_check(spec, &s.model, &j))
        .collect::<std::result::Result<Vec<f64>, _>>()?;
    let max = devs.iter().copied().fold(0.0, f64::max);
    emit(
        cfg,
        &json!({ "metric": spec, "jet": jet_file(&j), "deviations": devs, "max_deviation": max, "threshold": FD_THRESHOLD }),
    )?;
    eprintln!("max deviation: {max:e}");
    if max.is_nan() || max > FD_THRESHOLD {
        return Err(CliError::Threshold(format!("fd-check deviation {max:e} exceeds {FD_THRESHOLD:e}")));
    }
    Ok(())
}

fn cmd_sympow(cfg: &RunConfig, a: &RunArgs) -> Result<()> {
    let sc = &cfg.scenario()?.base;
    let l_max = match cfg.metric.as_ref().map(|m| m.kind) {
        Some(MetricKind::SymPowWronskian { l_max }) => l_max,
        _ => a.l_max,
    };
    let mut samples = Vec::new();
    for s in sc.samples() {
        let mut levels = Vec::new();
        for l in 1..=l_max {
            let sym = sym_power_curvature(&s.model, l)?;
            let m = &sym.curvature;
            let c: Vec<Vec<Vec<Vec<[f64; 2]>>>> = (0..m.n())
                .map(|i| {
                    (0..m.n())
                        .map(|j| {
                            (0..m.r())
                                .map(|x| (0..m.r()).map(|y| m.get(i, j, x, y)).map(|z| [z.re, z.im]).collect())
                                .collect()
                        })
                        .collect()
                })
                .collect();
            levels.push(json!({ "l": l, "frame": sym.frame, "c": c, "fiber_trace": form_json(&fiber_trace(m)) }));
        }
        samples.push(json!({ "weight": s.weight, "levels": levels }));
    }
    emit(cfg, &json!({ "l_max": l_max, "samples": samples }))
}

fn estimate_json(cfg: &RunConfig, v: &jetmorse_core::Verdict, closed: f64) -> Result<serde_json::Value> {
    let growth = match v.estimate.q_mode {
        QMode::AtMost(1) => Some(growth_bound(v)?),
        _ => None,
    };
    Ok(json!({
        "command": cfg.command,
        "metric": cfg.metric()?,
        "q_mode": v.estimate.q_mode.to_string(),
        "samples": cfg.samples,
        "seed": cfg.seed()?,
        "estimate": v.estimate,
        "prefactor": v.prefactor,
        "lower_bound": v.lower_bound,
        "positive": v.positive,
        "closed_form": closed,
        "growth_bound": growth,
    }))
}

fn cmd_morse(cfg: &RunConfig) -> Result<()> {
    let sc = &cfg.scenario()?.base;
    let spec = cfg.metric()?;
    let out = cfg.out()?;
    let v = verdict(fiber_mc(spec, sc, cfg.q_mode, &cfg.mc()?)?)?;
    let closed = closed_form_for(spec, sc, cfg.q_mode)?;
    write_text(&with_suffix(out, ".csv"), &csv_text(&[CsvRow::new(&v, sc.delta(), cfg.seed()?)]))?;
    let mut summary = estimate_json(cfg, &v, closed)?;
    summary["delta"] = json!(sc.delta());
    write_json(&with_suffix(out, ".json"), &summary)?;
    println!(
        "{} k={} {}: mean {} ± {} (closed form {}), positive: {}",
        spec.kind.short_name(),
        spec.k,
        cfg.q_mode,
        v.estimate.mean,
        v.estimate.stderr,
        closed,
        v.positive
    );
    Ok(())
}

fn cmd_delta_scan(cfg: &RunConfig) -> Result<()> {
    let sc = &cfg.scenario()?.base;
    let spec = cfg.metric()?;
    let out = cfg.out()?;
    let Some(grid) = &cfg.delta_grid else {
        return usage("delta-scan needs --delta-grid");
    };
    let seed = cfg.seed()?;
    let scan = delta_scan(spec, sc, grid, cfg.q_mode, &cfg.mc()?)?;
    let rows: Vec<CsvRow> = scan.rows.iter().map(|r| CsvRow::new(&r.verdict, r.delta, seed)).collect();
    write_text(&with_suffix(out, ".csv"), &csv_text(&rows))?;
    let w = fiber_weight(spec);
    let closed = grid
        .iter()
        .map(|&d| closed_form_weighted(&sc.with_delta(d)?, w, cfg.q_mode))
        .collect::<std::result::Result<Vec<f64>, _>>()?;
    write_json(
        &with_suffix(out, ".json"),
        &json!({
            "command": cfg.command,
            "metric": spec,
            "q_mode": cfg.q_mode.to_string(),
            "samples": cfg.samples,
            "seed": seed,
            "delta_star": scan.delta_star,
            "log_k_over_k": scan.log_k_over_k,
            "closed_form": closed,
            "rows": scan.rows,
        }),
    )?;
    match scan.delta_star {
        Some(d) => println!("delta* = {d} (ln k / k = {})", scan.log_k_over_k),
        None => println!("no positive verdict on the grid (ln k / k = {})", scan.log_k_over_k),
    }
    Ok(())
}

fn cmd_converge(cfg: &RunConfig) -> Result<()> {
    let sc = &cfg.scenario()?.base;
    let spec = cfg.metric()?;
    let out = cfg.out()?;
    let rep = convergence_diag(spec, sc, cfg.q_mode, &cfg.mc()?, cfg.batches)?;
    let est = MorseEstimate {
        q_mode: cfg.q_mode,
        mean: rep.grand_mean,
        stderr: rep.stderr,
        samples: rep.samples,
        k: spec.k,
        n: sc.n(),
        r: sc.r(),
        metric_kind: spec.kind,
    };
    let v = verdict(est)?;
    write_text(&with_suffix(out, ".csv"), &csv_text(&[CsvRow::new(&v, sc.delta(), cfg.seed()?)]))?;
    let mut summary = estimate_json(cfg, &v, closed_form_for(spec, sc, cfg.q_mode)?)?;
    summary["convergence"] = serde_json::to_value(&rep).expect("report serializes");
    write_json(&with_suffix(out, ".json"), &summary)?;
    println!(
        "{}: {} (CI half-width {}, ratio {}, {} batches)",
        spec.kind.short_name(),
        if rep.converged { "converged" } else { "not converged" },
        rep.ci_half_width,
        rep.ratio,
        rep.batches
    );
    Ok(())
}

fn kind_from_short(name: &str, l_max: usize) -> Result<MetricKind> {
    Ok(match name {
        "gg" => MetricKind::DemaillyGG,
        "test1" => MetricKind::Test1Wronskian,
        "test2" => MetricKind::Test2Invariant,
        "sympow" => MetricKind::SymPowWronskian { l_max },
        _ => return Err(CliError::Parse(format!("unknown metric_kind {name:?}"))),
    })
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    let scenario = a.scenario.as_deref().map(parse_scenario).transpose()?;
    let mut rows = Vec::new();
    for path in &a.inputs {
        rows.extend(read_csv(path)?);
    }
    rows.sort_by(|x, y| {
        (&x.metric_kind, &x.q_mode, x.n, x.r)
            .cmp(&(&y.metric_kind, &y.q_mode, y.n, y.r))
            .then(x.delta.total_cmp(&y.delta))
            .then(x.k.cmp(&y.k))
            .then(x.samples.cmp(&y.samples))
    });
    let mut plot = Vec::with_capacity(rows.len());
    for row in &rows {
        let closed = match &scenario {
            Some(sc) if sc.base.n() == row.n && sc.base.r() == row.r => {
                let kind = kind_from_short(&row.metric_kind, a.l_max)?;
                let spec = MetricSpec::auto(kind, row.k, DEFAULT_EPS0)?;
                let q: QMode = row.q_mode.parse()?;
                Some(closed_form_weighted(&sc.base.with_delta(row.delta)?, fiber_weight(&spec), q)?)
            }
            _ => None,
        };
        plot.push(PlotRow::new(row.clone(), closed));
    }
    write_text(&with_suffix(&a.out, ".csv"), &csv_text(&rows))?;
    write_text(&with_suffix(&a.out, "_plot.csv"), &output::plot_text(&plot))?;
    write_json(&with_suffix(&a.out, ".json"), &json!({ "inputs": a.inputs, "rows": plot }))?;
    println!("{} rows from {} files", rows.len(), a.inputs.len());
    Ok(())
}

/// Executes a parsed command in the current thread pool.
pub fn execute(cli: &Cli) -> Result<()> {
    let (name, args) = match &cli.command {
        Command::Report(a) => return cmd_report(a),
        Command::Act(a) => ("act", a),
        Command::Wronskian(a) => ("wronskian", a),
        Command::Invariants(a) => ("invariants", a),
        Command::Curvature(a) => ("curvature", a),
        Command::FdCheck(a) => ("fd-check", a),
        Command::Sympow(a) => ("sympow", a),
        Command::Morse(a) => ("morse", a),
        Command::DeltaScan(a) => ("delta-scan", a),
        Command::Converge(a) => ("converge", a),
    };
    let cfg = RunConfig::resolve(name, args)?;
    match &cli.command {
        Command::Act(a) => cmd_act(&cfg, a),
        Command::Wronskian(a) => cmd_wronskian(&cfg, a),
        Command::Invariants(a) => cmd_invariants(&cfg, a),
        Command::Curvature(_) => cmd_curvature(&cfg),
        Command::FdCheck(a) => cmd_fd_check(&cfg, a),
        Command::Sympow(a) => cmd_sympow(&cfg, a),
        Command::Morse(_) => cmd_morse(&cfg),
        Command::DeltaScan(_) => cmd_delta_scan(&cfg),
        Command::Converge(_) => cmd_converge(&cfg),
        Command::Report(_) => unreachable!(),
    }
}

fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a non-negative integer"))),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = thread_count().and_then(|n| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
        pool.install(|| execute(&cli))
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
