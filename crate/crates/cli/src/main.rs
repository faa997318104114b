//! `sstp`: run, compare and sweep spin-boson ensembles from a config file.
//!
//! Exit status: 0 on success, 1 on I/O failure, 2 on a usage or configuration
//! error, 3 when the ensemble fails numerically.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use sstp_core::config::FileConfig;
use sstp_core::engine::estimate;
use sstp_core::hopping::{SchemeConfig, SchemeKind};
use sstp_core::output::{compare_csv, gnuplot_script, meta_text, series_csv, sweep_summary_csv, value_at, SweepRow};
use sstp_core::{ConfigError, EngineError, EstimatorSeries};

#[derive(Debug, Parser)]
#[command(name = "sstp", version, about = "Sequential short-time propagation for the spin-boson model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured scheme and write `<out>.csv` and `<out>.meta`.
    Run(Common),
    /// Run the primitive and generalized schemes on the same seed.
    Compare(Common),
    /// Run the generalized scheme once per filter threshold.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated thresholds, e.g. `0.05,0.1,inf`.
        #[arg(long = "c-e", value_delimiter = ',', required = true, value_parser = parse_threshold)]
        c_e: Vec<f64>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output path stem; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if !v.is_nan() => Ok(v),
        Ok(_) => Err("threshold must not be NaN".into()),
        Err(e) => Err(format!("`{s}`: {e}")),
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Config { path: PathBuf, source: ConfigError },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config { .. } => 2,
            CliError::Engine(EngineError::Config(_)) => 2,
            CliError::Engine(EngineError::ThreadPool(_)) => 1,
            CliError::Engine(_) => 3,
        }
    }
}

fn load(common: &Common) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(&common.config).map_err(|source| CliError::Io {
        path: common.config.clone(),
        source,
    })?;
    let mut cfg = FileConfig::parse(&text).map_err(|source| CliError::Config {
        path: common.config.clone(),
        source,
    })?;
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    if let Some(threads) = common.threads {
        cfg.run.threads = threads;
    }
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = stem.as_os_str().to_owned();
    s.push(suffix);
    s.into()
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn exceedance(series: &EstimatorSeries, threshold: f64) -> String {
    series
        .first_stderr_exceedance(threshold)
        .map_or_else(|| "never".to_string(), |t| t.to_string())
}

fn cmd_run(common: &Common) -> Result<(), CliError> {
    let cfg = load(common)?;
    let series = estimate(&cfg.run)?;
    let csv = write(with_suffix(&cfg.output, ".csv"), &series_csv(&series))?;
    write(with_suffix(&cfg.output, ".meta"), &meta_text(&series, &[]))?;
    println!(
        "wrote {} ({} trajectories, {} aborted)",
        csv.display(),
        series.n_samples,
        series.meta.aborted
    );
    Ok(())
}

fn cmd_compare(common: &Common) -> Result<(), CliError> {
    let cfg = load(common)?;
    if !cfg.c_e_given {
        return Err(CliError::Config {
            path: common.config.clone(),
            source: ConfigError::Missing("c_e"),
        });
    }
    let n_max = cfg.run.scheme.n_max;
    let mut prim_cfg = cfg.run.clone();
    prim_cfg.scheme = SchemeConfig::primitive(n_max);
    let mut gen_cfg = cfg.run.clone();
    gen_cfg.scheme.kind = SchemeKind::Generalized;

    let prim = estimate(&prim_cfg)?;
    let gen = estimate(&gen_cfg)?;
    let threshold = cfg.stderr_threshold;

    let csv = write(with_suffix(&cfg.output, ".csv"), &compare_csv(&prim, &gen))?;
    let image = with_suffix(&cfg.output, ".png");
    let title = format!(
        "beta={} Omega={} xi={} c_E={}",
        cfg.run.bath.beta, cfg.run.sub.omega, cfg.run.bath.xi, cfg.run.scheme.c_e
    );
    write(
        with_suffix(&cfg.output, ".gp"),
        &gnuplot_script(&file_name(&csv), &title, &file_name(&image)),
    )?;
    for (name, series) in [("primitive", &prim), ("generalized", &gen)] {
        let extra = [
            ("stderr_threshold".to_string(), threshold.to_string()),
            ("stderr_first_exceeds_at".to_string(), exceedance(series, threshold)),
        ];
        write(
            with_suffix(&cfg.output, &format!("_{name}.meta")),
            &meta_text(series, &extra),
        )?;
        println!(
            "{name}: stderr first exceeds {threshold} at t = {}",
            exceedance(series, threshold)
        );
    }
    println!("wrote {}", csv.display());
    Ok(())
}

fn cmd_sweep(common: &Common, thresholds: &[f64]) -> Result<(), CliError> {
    let cfg = load(common)?;
    let mut thresholds = thresholds.to_vec();
    thresholds.sort_by(f64::total_cmp);

    let mut runs = Vec::with_capacity(thresholds.len());
    for &c_e in &thresholds {
        let mut run = cfg.run.clone();
        run.scheme.kind = SchemeKind::Generalized;
        run.scheme.c_e = c_e;
        let series = estimate(&run)?;
        let stem = with_suffix(&cfg.output, &format!("_ce{c_e}"));
        write(with_suffix(&stem, ".csv"), &series_csv(&series))?;
        write(with_suffix(&stem, ".meta"), &meta_text(&series, &[]))?;
        runs.push((c_e, series));
    }

    let reference = &runs[0].1;
    let rows: Vec<SweepRow> = runs
        .iter()
        .map(|(c_e, s)| SweepRow {
            c_e: *c_e,
            stderr_at: cfg
                .probe_times
                .iter()
                .map(|&t| value_at(&s.times, &s.stderr, t).unwrap_or(f64::NAN))
                .collect(),
            max_dev_short: s
                .times
                .iter()
                .zip(s.mean.iter().zip(&reference.mean))
                .filter(|(t, _)| **t <= 4.0 + 1e-9)
                .map(|(_, (m, r))| (m - r).abs())
                .fold(0.0, f64::max),
        })
        .collect();
    let summary = write(
        with_suffix(&cfg.output, "_summary.csv"),
        &sweep_summary_csv(&cfg.probe_times, &rows),
    )?;
    println!("wrote {} ({} thresholds)", summary.display(), rows.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(common) => cmd_run(common),
        Command::Compare(common) => cmd_compare(common),
        Command::Sweep { common, c_e } => cmd_sweep(common, c_e),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sstp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
