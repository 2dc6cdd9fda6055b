//! Command-line entry point: decompose CSV signals, run parameter
//! sweeps, and render reports.
//!
//! Exit status: 0 on success, 1 when a sweep completed with failed rows,
//! 2 for configuration or parse errors (with a machine-readable JSON
//! error on stderr).

use clap::{Args, Parser, Subcommand, ValueEnum};
use modekit::decompose::{ceemdan, eemd, emd, Decomposition, EnsembleConfig, Method};
use modekit::error::{Error, Result};
use modekit::experiments::{self, NamedSignal, SweepRow, SweepSpec};
use modekit::metrics;
use modekit::noise::NoisePlan;
use modekit::plot;
use modekit::sifting::{StopCriterion, StopRule};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "modekit",
    version,
    about = "Empirical mode decomposition toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose every signal in a CSV file into IMFs plus residue.
    Decompose(DecomposeArgs),
    /// Run a parameter sweep described by a JSON spec file.
    Sweep(SweepArgs),
    /// Render a plot and table from an existing sweep JSON report.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CriterionKind {
    /// At least N sifting passes, then stop once the IMF definition holds.
    FixedCheck,
    /// Exactly N sifting passes.
    Fixed,
    /// Standard-deviation criterion between consecutive passes.
    Sd,
    /// Two-threshold criterion on |m(t)/a(t)|.
    Dual,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Input CSV: line 1 `sample_rate=<float>`, then one column per signal.
    input: PathBuf,
    /// Output directory (created if missing).
    outdir: PathBuf,
    #[arg(long, value_enum, default_value = "ceemdan")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "dual")]
    criterion: CriterionKind,
    /// Sifting pass count for the fixed criteria.
    #[arg(long, default_value_t = 10)]
    n: u32,
    /// Consecutive passes the IMF check must hold (fixed-check only).
    #[arg(long, default_value_t = 1)]
    hold: u32,
    /// SD threshold (sd criterion only).
    #[arg(long, default_value_t = 0.2)]
    sd: f64,
    #[arg(long, default_value_t = 0.05)]
    theta1: f64,
    #[arg(long, default_value_t = 0.5)]
    theta2: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 5000)]
    max_iter: u32,
    /// Ensemble noise level relative to the signal's standard deviation.
    #[arg(long)]
    nstd: Option<f64>,
    /// Number of noise realizations.
    #[arg(long)]
    nr: Option<u32>,
    #[arg(long)]
    max_modes: Option<usize>,
    /// Master seed; falls back to MODEKIT_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write one SVG per signal showing the stacked modes.
    #[arg(long)]
    plot: bool,
    /// Worker threads (0 = all available).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Emd,
    Eemd,
    Ceemdan,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Emd => Method::Emd,
            MethodArg::Eemd => Method::Eemd,
            MethodArg::Ceemdan => Method::Ceemdan,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep spec file.
    spec: PathBuf,
    /// Output directory (created if missing).
    outdir: PathBuf,
    /// Master seed override; falls back to the spec file, MODEKIT_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write an SVG of ECM against the swept axis.
    #[arg(long)]
    plot: bool,
    /// Worker threads (0 = all available).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// A sweep JSON report written by `modekit sweep`.
    sweep_json: PathBuf,
    /// Output directory (created if missing).
    outdir: PathBuf,
}

/// On-disk sweep spec.
#[derive(Deserialize)]
struct SweepSpecFile {
    method: Method,
    criteria: Vec<StopCriterion>,
    #[serde(default)]
    nstd: Vec<f64>,
    #[serde(default)]
    nr: Vec<u32>,
    #[serde(default)]
    max_iter: Vec<u32>,
    signals: SignalSource,
    #[serde(default)]
    master_seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum SignalSource {
    /// The built-in ten-signal synthetic corpus.
    Corpus,
    /// CSV files in the signal format; each column becomes a signal.
    Csv(Vec<PathBuf>),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Decompose(args) => with_pool(args.threads, || cmd_decompose(&args)),
        Command::Sweep(args) => with_pool(args.threads, || cmd_sweep(&args)),
        Command::Report(args) => cmd_report(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            ExitCode::from(2)
        }
    }
}

fn with_pool<T>(threads: usize, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(f)
}

fn env_seed() -> u64 {
    std::env::var("MODEKIT_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

fn check_input(path: &Path) -> Result<()> {
    if !path.exists() {
        return Err(Error::InvalidConfig(format!(
            "input not found: {}",
            path.display()
        )));
    }
    Ok(())
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn build_criterion(args: &DecomposeArgs) -> Result<StopCriterion> {
    let rule = match args.criterion {
        CriterionKind::FixedCheck => StopRule::FixedWithImfCheck {
            n: args.n,
            hold: args.hold,
        },
        CriterionKind::Fixed => StopRule::FixedExact { n: args.n },
        CriterionKind::Sd => StopRule::StandardDeviation {
            sd_threshold: args.sd,
        },
        CriterionKind::Dual => StopRule::DualThreshold {
            theta1: args.theta1,
            theta2: args.theta2,
            alpha: args.alpha,
        },
    };
    StopCriterion::new(rule, args.max_iter)
}

fn cmd_decompose(args: &DecomposeArgs) -> Result<ExitCode> {
    let method: Method = args.method.into();
    if method == Method::Emd {
        if args.nr.is_some() {
            return Err(Error::InvalidConfig("nr is not applicable to emd".into()));
        }
        if args.nstd.is_some() {
            return Err(Error::InvalidConfig("nstd is not applicable to emd".into()));
        }
    }
    let criterion = build_criterion(args)?;
    check_input(&args.input)?;
    let signals = experiments::load_csv(&args.input)?;
    let seed = args.seed.unwrap_or_else(env_seed);

    std::fs::create_dir_all(&args.outdir)?;
    let mut reports = Vec::new();
    for (idx, signal) in signals.iter().enumerate() {
        let decomp: Decomposition = match method {
            Method::Emd => emd(signal, &criterion, args.max_modes)?,
            Method::Eemd | Method::Ceemdan => {
                let noise = NoisePlan::new(
                    seed.wrapping_add(idx as u64),
                    args.nr.unwrap_or(500),
                    args.nstd.unwrap_or(0.2),
                )?;
                let config = EnsembleConfig {
                    noise,
                    criterion: criterion.clone(),
                    max_modes: args.max_modes,
                };
                if method == Method::Eemd {
                    eemd(signal, &config)?
                } else {
                    ceemdan(signal, &config)?
                }
            }
        };

        let mut columns: Vec<&[f64]> = decomp.imfs.iter().map(Vec::as_slice).collect();
        columns.push(&decomp.residue);
        let csv = experiments::format_csv(&columns, signal.sample_rate())?;
        write_atomic(&args.outdir.join(format!("imfs_{idx}.csv")), &csv)?;

        if args.plot {
            let svg = plot::decomposition_svg(signal.samples(), &decomp);
            write_atomic(&args.outdir.join(format!("decomp_{idx}.svg")), &svg)?;
        }

        let report = metrics::report(&decomp, signal.samples(), signal.sample_rate())?;
        reports.push(serde_json::json!({
            "signal": idx,
            "method": decomp.method,
            "config": decomp.config,
            "report": report,
        }));
    }
    let json = serde_json::to_string_pretty(&reports).expect("report serialization");
    write_atomic(&args.outdir.join("report.json"), &json)?;
    Ok(ExitCode::SUCCESS)
}

fn load_spec(args: &SweepArgs) -> Result<SweepSpec> {
    check_input(&args.spec)?;
    let text = std::fs::read_to_string(&args.spec)?;
    let file: SweepSpecFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let master_seed = args.seed.or(file.master_seed).unwrap_or_else(env_seed);
    let signals = match file.signals {
        SignalSource::Corpus => experiments::default_corpus(master_seed),
        SignalSource::Csv(paths) => {
            let mut out = Vec::new();
            for path in &paths {
                check_input(path)?;
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                for (col, signal) in experiments::load_csv(path)?.into_iter().enumerate() {
                    out.push(NamedSignal {
                        id: format!("{stem}:{col}"),
                        signal,
                    });
                }
            }
            out
        }
    };
    Ok(SweepSpec {
        method: file.method,
        criteria: file.criteria,
        nstd_grid: file.nstd,
        nr_grid: file.nr,
        max_iter_grid: file.max_iter,
        signals,
        master_seed,
    })
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode> {
    let spec = load_spec(args)?;
    let rows = experiments::run_sweep(&spec)?;

    std::fs::create_dir_all(&args.outdir)?;
    write_atomic(
        &args.outdir.join("sweep.csv"),
        &experiments::rows_to_csv(&rows),
    )?;
    let json = serde_json::to_string_pretty(&rows).expect("row serialization");
    write_atomic(&args.outdir.join("sweep.json"), &json)?;
    if args.plot {
        write_atomic(&args.outdir.join("sweep.svg"), &plot::sweep_svg(&rows))?;
    }

    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!(
            "{}",
            serde_json::json!({ "warning": format!("{failed} row(s) failed") })
        );
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(args: &ReportArgs) -> Result<ExitCode> {
    check_input(&args.sweep_json)?;
    let text = std::fs::read_to_string(&args.sweep_json)?;
    let rows: Vec<SweepRow> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    std::fs::create_dir_all(&args.outdir)?;
    write_atomic(&args.outdir.join("sweep.svg"), &plot::sweep_svg(&rows))?;
    println!("method\tcriterion\tnstd\tnr\tmax_iter\tsignal\timf\titerations\ttime_s\tecm\tio");
    for r in &rows {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into());
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{}\t{}",
            r.method,
            r.criterion,
            r.nstd.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
            r.nr.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
            r.max_iter,
            r.signal_id,
            opt(r.imf_count),
            opt(r.iterations),
            r.time_s,
            opt(r.ecm),
            opt(r.io),
        );
    }
    Ok(ExitCode::SUCCESS)
}
