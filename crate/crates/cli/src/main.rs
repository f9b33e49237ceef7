// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use percolade_core::bounds::{
    theorem3_condition, theorem4_nondecreasing_lhs, theorem4_nonincreasing_lhs, theorem5_condition, theorem6_lhs,
    BoundsReport,
};
use percolade_core::covering::covering_density;
use percolade_core::experiments::{
    cascade_experiment, degree_failure_sweep, estimate_lambda_c, sample_graph, SufficientInputs,
    DEFAULT_LAMBDA_C_THRESHOLD,
};
use percolade_core::lattice::{estimate_crossings, k1_formula, CrossingSource};
use percolade_core::report::{sidecar, write_crossing_csv, write_estimate_csv, write_histogram_csv, SCHEMA, VERSION};
use percolade_core::{
    Boundary, DegreeFailureRule, EstimateRow, SeedMode, SweepConfig, SystemSize, ThresholdDistribution,
};

/// Random geometric graphs, degree-dependent failures and threshold cascades.
#[derive(Parser, Debug)]
#[command(name = "percolade", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted. CSV outputs also get a `.meta.json` sidecar.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Replaces the configured master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism). Never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replaces the configured grid, written `start:stop:step` (inclusive).
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<Grid>,
    /// Progress on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Args, Debug, Default)]
struct SizeFlags {
    /// Exactly this many points, in a square of area nodes / lambda.
    #[arg(long, conflicts_with = "area")]
    nodes: Option<usize>,
    /// Poisson points in a square of this area.
    #[arg(long)]
    area: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum)]
    boundary: Option<BoundaryArg>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum BoundaryArg {
    Torus,
    HardWall,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Torus => Boundary::Torus,
            BoundaryArg::HardWall => Boundary::HardWall,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample one unit-disk graph and write its points, links and components as JSON.
    Generate {
        #[arg(long)]
        lambda: Option<f64>,
        #[command(flatten)]
        size: SizeFlags,
    },
    /// Largest-component fraction over an intensity grid, with the critical-density bracket.
    Percolate {
        #[command(flatten)]
        size: SizeFlags,
    },
    /// Evaluate the analytical conditions for a failure rule or threshold distribution.
    Bounds,
    /// Rectangle crossing probabilities over a grid of lattice scales.
    Crossings {
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Threshold-cascade size distribution at one intensity.
    Cascade {
        #[command(flatten)]
        size: SizeFlags,
    },
    /// Degree-dependent failure campaign over an intensity grid.
    Sweep {
        #[command(flatten)]
        size: SizeFlags,
    },
}

/// Exit status 1: the inputs are wrong. Anything else is a runtime failure (2).
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Clone, Debug, PartialEq)]
struct Grid(Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts[..] else {
        return Err("expected START:STOP:STEP".into());
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
    if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err("need START <= STOP and STEP > 0".into());
    }
    // Index-based so that 1.2:1.7:0.05 yields exactly 11 points.
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok(Grid((0..=n).map(|i| a + i as f64 * step).collect()))
}

fn read_config<T: DeserializeOwned>(path: Option<&Path>) -> anyhow::Result<Option<T>> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| config_err(format!("config {}: {e}", path.display())))
}

fn require<T>(value: Option<T>, field: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| config_err(format!("{field}: missing (set it in --config or by flag)")))
}

/// Campaign fields shared by the grid subcommands; every field optional so
/// that flags can fill the gaps.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CampaignFile {
    grid: Option<Vec<f64>>,
    lambda: Option<f64>,
    size: Option<SystemSize>,
    trials: Option<usize>,
    master_seed: Option<u64>,
    boundary: Option<Boundary>,
    giant_threshold: Option<f64>,
    /// Critical-density bracket level (percolate).
    threshold: Option<f64>,
    /// Failure rule (sweep).
    rule: Option<DegreeFailureRule>,
    /// Threshold distribution (cascade).
    thresholds: Option<ThresholdDistribution>,
    seed_mode: Option<SeedMode>,
    /// Reference intensity and `k1` for the sufficient condition (sweep).
    lambda1: Option<f64>,
    k1: Option<f64>,
}

impl CampaignFile {
    fn apply(&mut self, common: &Common, size: &SizeFlags) {
        if let Some(g) = &common.grid {
            self.grid = Some(g.0.clone());
        }
        if let Some(s) = common.seed {
            self.master_seed = Some(s);
        }
        if let Some(n) = size.nodes {
            self.size = Some(SystemSize::Nodes(n));
        }
        if let Some(a) = size.area {
            self.size = Some(SystemSize::Area(a));
        }
        if let Some(t) = size.trials {
            self.trials = Some(t);
        }
        if let Some(b) = size.boundary {
            self.boundary = Some(b.into());
        }
    }

    fn sweep_config(&self, grid: Vec<f64>) -> anyhow::Result<SweepConfig> {
        let mut c = SweepConfig::new(
            grid,
            require(self.size, "size")?,
            require(self.trials, "trials")?,
            self.master_seed.unwrap_or(0),
        );
        if let Some(b) = self.boundary {
            c.boundary = b;
        }
        if let Some(t) = self.giant_threshold {
            c.giant_threshold = t;
        }
        c.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(c)
    }

    fn sufficient(&self) -> anyhow::Result<Option<SufficientInputs>> {
        match (self.lambda1, self.k1) {
            (Some(lambda1), Some(k1)) => Ok(Some(SufficientInputs { lambda1, k1 })),
            (None, None) => Ok(None),
            _ => Err(config_err("lambda1, k1: give both or neither")),
        }
    }
}

/// Writes the primary output (stdout if no `--out`).
fn write_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn write_json(out: Option<&Path>, value: &Value) -> anyhow::Result<()> {
    write_output(out, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

/// Single-line JSON, for documents dominated by large arrays.
fn write_json_compact(out: Option<&Path>, value: &Value) -> anyhow::Result<()> {
    write_output(out, |w| {
        serde_json::to_writer(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

/// `<out>.meta.json` next to a CSV output; skipped when writing to stdout.
fn write_sidecar<T: Serialize>(out: Option<&Path>, command: &str, config: &Value, result: &T) -> anyhow::Result<()> {
    let Some(path) = out else { return Ok(()) };
    let mut meta = path.as_os_str().to_owned();
    meta.push(".meta.json");
    write_json(Some(Path::new(&meta)), &sidecar(command, config, result)?)
}

fn generate(common: &Common, lambda: Option<f64>, size: &SizeFlags) -> anyhow::Result<()> {
    let mut file: CampaignFile = read_config(common.config.as_deref())?.unwrap_or_default();
    file.apply(common, size);
    if lambda.is_some() {
        file.lambda = lambda;
    }
    let lambda = require(file.lambda, "lambda")?;
    if !(lambda > 0.0) {
        return Err(config_err(format!("lambda: must be positive, got {lambda}")));
    }
    let size = require(file.size, "size")?;
    let boundary = file.boundary.unwrap_or_default();
    let seed = file.master_seed.unwrap_or(0);
    let config = serde_json::json!({ "lambda": lambda, "size": size, "boundary": boundary, "seed": seed });
    let g = sample_graph(lambda, size, boundary, seed).map_err(|e| config_err(e.to_string()))?;
    let comps = g.components();
    let points: Vec<[f64; 2]> = g.points().iter().map(|p| [p.x, p.y]).collect();
    let doc = serde_json::json!({
        "schema": SCHEMA,
        "version": VERSION,
        "config": config,
        "region": g.region(),
        "points": points,
        "edges": g.edges(),
        "mean_degree": g.mean_degree(),
        "components": {
            "count": comps.count(),
            "largest": comps.largest,
            "largest_fraction": comps.largest_fraction,
        },
    });
    write_json_compact(common.out.as_deref(), &doc)
}

fn percolate(common: &Common, size: &SizeFlags) -> anyhow::Result<()> {
    let mut file: CampaignFile = read_config(common.config.as_deref())?.unwrap_or_default();
    file.apply(common, size);
    let config = file.sweep_config(require(file.grid.clone(), "grid")?)?;
    let threshold = file.threshold.unwrap_or(DEFAULT_LAMBDA_C_THRESHOLD);
    let est = estimate_lambda_c(&config, threshold).map_err(|e| config_err(e.to_string()))?;
    let echo = serde_json::to_value(&config)?;
    write_output(common.out.as_deref(), |w| {
        Ok(write_estimate_csv(w, "percolation", &echo, &est.rows)?)
    })?;
    let result = serde_json::json!({
        "lambda_c": {
            "convention": "first grid interval where the mean largest-component fraction rises through the threshold",
            "threshold": est.threshold,
            "bracket": est.bracket,
        },
    });
    write_sidecar(common.out.as_deref(), "percolate", &echo, &result)
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct BoundsFile {
    lambda: f64,
    #[serde(default)]
    rule: Option<DegreeFailureRule>,
    #[serde(default)]
    thresholds: Option<ThresholdDistribution>,
    #[serde(default)]
    lambda1: Option<f64>,
    /// Either `k1` directly or the lattice scale `d` it is derived from.
    #[serde(default)]
    k1: Option<f64>,
    #[serde(default)]
    d: Option<f64>,
}

fn bounds(common: &Common) -> anyhow::Result<()> {
    let file: BoundsFile = require(read_config(common.config.as_deref())?, "--config")?;
    if !(file.lambda > 0.0) {
        return Err(config_err(format!("lambda: must be positive, got {}", file.lambda)));
    }
    if file.rule.is_none() && file.thresholds.is_none() {
        return Err(config_err("rule, thresholds: give at least one"));
    }
    let lambda_prime = covering_density(file.lambda);
    let k1 = match (file.k1, file.d) {
        (Some(_), Some(_)) => return Err(config_err("k1, d: give at most one")),
        (Some(k1), None) => Some(k1),
        (None, Some(d)) => Some(k1_formula(d, lambda_prime)),
        (None, None) => None,
    };
    let sufficient = match (file.lambda1, k1) {
        (Some(l1), Some(k1)) => Some((l1, k1)),
        (None, None) => None,
        _ => return Err(config_err("lambda1, k1: give both or neither")),
    };
    let bad = |e: percolade_core::Error| config_err(e.to_string());
    let mut reports: Vec<BoundsReport> = Vec::new();
    if let Some(rule) = &file.rule {
        if let Some((l1, k1)) = sufficient {
            reports.push(theorem3_condition(rule, file.lambda, l1, k1).map_err(bad)?);
        }
        reports.extend(theorem4_nondecreasing_lhs(rule, lambda_prime).ok());
        reports.extend(theorem4_nonincreasing_lhs(rule, lambda_prime).ok());
    }
    if let Some(dist) = &file.thresholds {
        if let Some((l1, k1)) = sufficient {
            reports.push(theorem5_condition(dist, file.lambda, l1, k1).map_err(bad)?);
        }
        reports.push(theorem6_lhs(dist, lambda_prime).map_err(bad)?);
    }
    let doc = serde_json::json!({
        "schema": SCHEMA,
        "version": VERSION,
        "config": file,
        "lambda_prime": lambda_prime,
        "reports": reports,
    });
    write_json(common.out.as_deref(), &doc)
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct CrossingsFile {
    source: CrossingSource,
    d_grid: Option<Vec<f64>>,
    trials: Option<usize>,
    #[serde(default)]
    master_seed: u64,
}

fn crossings(common: &Common, trials: Option<usize>) -> anyhow::Result<()> {
    let mut file: CrossingsFile = require(read_config(common.config.as_deref())?, "--config")?;
    if let Some(g) = &common.grid {
        file.d_grid = Some(g.0.clone());
    }
    if let Some(s) = common.seed {
        file.master_seed = s;
    }
    if trials.is_some() {
        file.trials = trials;
    }
    let grid = require(file.d_grid.clone(), "d_grid")?;
    let trials = require(file.trials, "trials")?;
    let mut rows = Vec::new();
    for (i, &d) in grid.iter().enumerate() {
        if common.verbose {
            eprintln!("crossings: d = {d}");
        }
        let seed = percolade_core::rng::derive_seed(file.master_seed, &[i as u64]);
        rows.extend(estimate_crossings(&file.source, d, trials, seed).map_err(|e| config_err(e.to_string()))?);
    }
    let echo = serde_json::to_value(&file)?;
    write_output(common.out.as_deref(), |w| Ok(write_crossing_csv(w, &echo, &rows)?))?;
    write_sidecar(common.out.as_deref(), "crossings", &echo, &rows)
}

fn cascade(common: &Common, size: &SizeFlags) -> anyhow::Result<()> {
    let mut file: CampaignFile = require(read_config(common.config.as_deref())?, "--config")?;
    file.apply(common, size);
    let lambda = require(file.lambda, "lambda")?;
    let dist = require(file.thresholds.clone(), "thresholds")?;
    let mode = file.seed_mode.unwrap_or_default();
    let config = file.sweep_config(vec![lambda])?;
    let report = cascade_experiment(lambda, &dist, &config, mode).map_err(|e| config_err(e.to_string()))?;
    let echo = serde_json::json!({ "campaign": config, "thresholds": dist, "seed_mode": mode });
    write_output(common.out.as_deref(), |w| {
        Ok(write_histogram_csv(w, &echo, &report.histogram)?)
    })?;
    write_sidecar(common.out.as_deref(), "cascade", &echo, &report)
}

fn sweep(common: &Common, size: &SizeFlags) -> anyhow::Result<()> {
    let mut file: CampaignFile = require(read_config(common.config.as_deref())?, "--config")?;
    file.apply(common, size);
    let rule = require(file.rule.clone(), "rule")?;
    let config = file.sweep_config(require(file.grid.clone(), "grid")?)?;
    let t3 = file.sufficient()?;
    let reports = degree_failure_sweep(&rule, &config, t3).map_err(|e| config_err(e.to_string()))?;
    let rows: Vec<EstimateRow> = reports.iter().map(|r| r.row.clone()).collect();
    let echo = serde_json::json!({ "campaign": config, "rule": rule, "sufficient": t3 });
    write_output(common.out.as_deref(), |w| {
        Ok(write_estimate_csv(w, "degree-failure", &echo, &rows)?)
    })?;
    write_sidecar(common.out.as_deref(), "sweep", &echo, &reports)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let c = &cli.common;
    match &cli.command {
        Command::Generate { lambda, size } => generate(c, *lambda, size),
        Command::Percolate { size } => percolate(c, size),
        Command::Bounds => bounds(c),
        Command::Crossings { trials } => crossings(c, *trials),
        Command::Cascade { size } => cascade(c, size),
        Command::Sweep { size } => sweep(c, size),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            eprintln!("error: threads: must be at least 1");
            return ExitCode::from(1);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
