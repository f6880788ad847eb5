//! `jl-sparse` command line.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, failed checks), 2 invalid
//! arguments. `JL_THREADS` caps the worker pool; output does not depend on it.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::config::{required_k, Construction, ExperimentConfig, InputFamily};
use super::output::{self, Manifest};
use super::runner::{self, CdfGrid};
use super::verify;
use crate::error::{JlError, Result};

const DEFAULT_S_GRID: [usize; 6] = [1, 2, 4, 8, 16, 32];
const DEFAULT_T_GRID: [usize; 7] = [1, 2, 5, 10, 50, 100, 1000];
const DEFAULT_K_GRID: [usize; 5] = [25, 50, 100, 200, 400];

#[derive(Debug, Parser)]
#[command(
    name = "jl-sparse",
    version,
    about = "Johnson-Lindenstrauss distortion experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distortion quantiles vs column sparsity s.
    SweepS(SweepS),
    /// Distortion quantiles vs input sparsity t.
    SweepT(SweepT),
    /// Pooled distortion CDF and |delta| tail table.
    Cdf(Cdf),
    /// Distortion quantiles vs target dimension k.
    SweepK(SweepK),
    /// Run the statistical self-checks.
    Verify(Verify),
    /// Smallest k with 2 exp(-k eps^2 / 12) <= n^-3.
    RequiredK(RequiredK),
}

#[derive(Debug, Args)]
struct Common {
    /// Input vectors per family [default: 500; 5000 with --paper-scale].
    #[arg(long)]
    n: Option<usize>,
    /// Ambient dimension [default: 1000; 10000 with --paper-scale].
    #[arg(long)]
    d: Option<usize>,
    /// Transform instances per series [default: 10; 30 with --paper-scale].
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Quantile probes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.99")]
    probes: Vec<f64>,
    /// Subset of dense,ach,sparse.
    #[arg(long, value_delimiter = ',', default_value = "dense,ach,sparse")]
    constructions: Vec<Construction>,
    /// Full-size setup: n=5000, d=10000, trials=30.
    #[arg(long)]
    paper_scale: bool,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Manifest path [default: <out>.manifest.json].
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepS {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 50)]
    k: usize,
    /// Column sparsity grid.
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<usize>>,
    #[arg(long, default_value_t = 5)]
    t: usize,
}

#[derive(Debug, Args)]
struct SweepT {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 50)]
    k: usize,
    #[arg(long, default_value_t = 16)]
    s: usize,
    /// Input sparsity grid.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
struct SweepK {
    #[command(flatten)]
    common: Common,
    /// Target dimension grid.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long, default_value_t = 16)]
    s: usize,
    #[arg(long, default_value_t = 5)]
    t: usize,
}

#[derive(Debug, Args)]
struct Cdf {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 50)]
    k: usize,
    /// One graph-construction series per value.
    #[arg(long, value_delimiter = ',', default_value = "16")]
    s: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    t: usize,
    /// Input family: sparse or dense.
    #[arg(long, default_value = "sparse")]
    input: InputFamily,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    grid_lo: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    grid_hi: f64,
    #[arg(long, default_value_t = 401)]
    grid_points: usize,
    #[arg(long, default_value_t = 1e-4)]
    tail_lo: f64,
    #[arg(long, default_value_t = 1.0)]
    tail_hi: f64,
    #[arg(long, default_value_t = 41)]
    tail_points: usize,
}

#[derive(Debug, Args)]
struct Verify {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional CSV of check outcomes.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RequiredK {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    eps: f64,
    /// Optional CSV with the result.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self, k: usize, s: usize, t: usize) -> ExperimentConfig {
        let base = if self.paper_scale {
            ExperimentConfig::paper_scale()
        } else {
            ExperimentConfig::default()
        };
        ExperimentConfig {
            n: self.n.unwrap_or(base.n),
            d: self.d.unwrap_or(base.d),
            k,
            s,
            t,
            trials: self.trials.unwrap_or(base.trials),
            epsilon: self.eps,
            master_seed: self.seed,
            constructions: self.constructions.clone(),
            probes: self.probes.clone(),
        }
    }

    fn manifest_path(&self) -> PathBuf {
        self.manifest
            .clone()
            .unwrap_or_else(|| output::manifest_path(&self.out))
    }
}

#[derive(Serialize)]
struct SweepManifestConfig<'a> {
    #[serde(flatten)]
    experiment: &'a ExperimentConfig,
    axis_name: &'a str,
    axis_values: &'a [usize],
}

#[derive(Serialize)]
struct CdfManifestConfig<'a> {
    #[serde(flatten)]
    experiment: &'a ExperimentConfig,
    input_family: InputFamily,
    s_values: &'a [usize],
    grid: &'a CdfGrid,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_manifest<C: Serialize>(path: &Path, command: &str, seed: u64, config: C) -> Result<()> {
    Manifest::new(command, seed, config).write_to(create(path)?)
}

fn sweep(
    common: &Common,
    command: &str,
    cfg: &ExperimentConfig,
    axis_name: &str,
    axis: &[usize],
    run: impl FnOnce(&ExperimentConfig, &[usize]) -> Result<runner::SweepResult>,
) -> Result<i32> {
    let result = run(cfg, axis)?;
    output::write_sweep_csv(&result, create(&common.out)?)?;
    write_manifest(
        &common.manifest_path(),
        command,
        cfg.master_seed,
        SweepManifestConfig {
            experiment: cfg,
            axis_name,
            axis_values: axis,
        },
    )?;
    eprintln!(
        "wrote {} rows to {}",
        result.rows.len(),
        common.out.display()
    );
    Ok(0)
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::SweepS(a) => {
            let axis = a.s.clone().unwrap_or_else(|| DEFAULT_S_GRID.to_vec());
            let s_default = axis.iter().copied().max().unwrap_or(1).min(a.k).max(1);
            let cfg = a.common.config(a.k, s_default, a.t);
            sweep(
                &a.common,
                "sweep-s",
                &cfg,
                "s",
                &axis,
                runner::run_sparsity_sweep,
            )
        }
        Command::SweepT(a) => {
            let axis = a.t.clone().unwrap_or_else(|| DEFAULT_T_GRID.to_vec());
            let t_default = axis.iter().copied().min().unwrap_or(1).max(1);
            let cfg = a.common.config(a.k, a.s, t_default);
            sweep(
                &a.common,
                "sweep-t",
                &cfg,
                "t",
                &axis,
                runner::run_input_sparsity_sweep,
            )
        }
        Command::SweepK(a) => {
            let axis = a.k.clone().unwrap_or_else(|| DEFAULT_K_GRID.to_vec());
            let k_default = axis.iter().copied().max().unwrap_or(a.s).max(a.s);
            let cfg = a.common.config(k_default, a.s, a.t);
            sweep(&a.common, "sweep-k", &cfg, "k", &axis, runner::run_k_sweep)
        }
        Command::Cdf(a) => {
            let grid = CdfGrid {
                lo: a.grid_lo,
                hi: a.grid_hi,
                points: a.grid_points,
                tail_lo: a.tail_lo,
                tail_hi: a.tail_hi,
                tail_points: a.tail_points,
            };
            let s0 = a.s.first().copied().unwrap_or(16);
            let cfg = a.common.config(a.k, s0, a.t);
            let report = runner::run_cdf(&cfg, &grid, a.input, &a.s)?;
            output::write_cdf_csv(&report, create(&a.common.out)?)?;
            output::write_tail_csv(&report, create(&output::tail_path(&a.common.out))?)?;
            write_manifest(
                &a.common.manifest_path(),
                "cdf",
                cfg.master_seed,
                CdfManifestConfig {
                    experiment: &cfg,
                    input_family: a.input,
                    s_values: &a.s,
                    grid: &grid,
                },
            )?;
            eprintln!(
                "wrote {} series to {}",
                report.series.len(),
                a.common.out.display()
            );
            Ok(0)
        }
        Command::Verify(a) => {
            let checks = verify::run_checks(a.seed)?;
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if let Some(out) = &a.out {
                let mut w = csv::Writer::from_writer(create(out)?);
                w.write_record(["check", "passed", "detail"])?;
                for c in &checks {
                    w.write_record([
                        c.name.as_str(),
                        if c.passed { "true" } else { "false" },
                        c.detail.as_str(),
                    ])?;
                }
                w.flush()?;
                write_manifest(
                    &output::manifest_path(out),
                    "verify",
                    a.seed,
                    serde_json::json!({ "checks": checks.len() }),
                )?;
            }
            let failed: Vec<&str> = checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.as_str())
                .collect();
            if failed.is_empty() {
                Ok(0)
            } else {
                eprintln!("{} check(s) failed:", failed.len());
                for name in failed {
                    eprintln!("  {name}");
                }
                Ok(1)
            }
        }
        Command::RequiredK(a) => {
            let k = required_k(a.n, a.eps)?;
            println!("{k}");
            if let Some(out) = &a.out {
                let mut w = csv::Writer::from_writer(create(out)?);
                w.write_record(["n", "epsilon", "k"])?;
                w.write_record([a.n.to_string(), format!("{}", a.eps), k.to_string()])?;
                w.flush()?;
                write_manifest(
                    &output::manifest_path(out),
                    "required-k",
                    0,
                    serde_json::json!({ "n": a.n, "epsilon": a.eps }),
                )?;
            }
            Ok(0)
        }
    }
}

fn thread_cap() -> std::result::Result<Option<usize>, String> {
    match std::env::var("JL_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("JL_THREADS must be a positive integer, got '{v}'")),
        },
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let threads = match thread_cap() {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    let result = match threads {
        None => run(cli.command),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli.command)),
            Err(e) => {
                eprintln!("error: cannot start thread pool: {e}");
                return 1;
            }
        },
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                JlError::InvalidArgument(_) => 2,
                _ => 1,
            }
        }
    }
}
