//! Command-line front end: run experiment sweeps to CSV/JSON/SVG artifacts,
//! verify the numerical core, and re-plot stored records.

mod csv_io;
mod plots;
mod summary;

use clap::{Args, Parser, Subcommand};
use lattice_homog_core::experiments::{
    planned_runs, run_single, verify_suite, Experiment, ExperimentConfig, ExperimentRecord,
    TrialFailure,
};
use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lattice-homog", version, about = "Long-wave homogenization experiments for random mass-spring chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment sweep and write records.csv, summary.json, and SVG plots
    Run(RunArgs),
    /// Run the named verification checks of the numerical core
    Verify(VerifyArgs),
    /// Regenerate plots from a directory of stored records
    Plot(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file (field names mirror the experiment configuration)
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Stock experiment to run when no config file is given
    #[arg(long, value_name = "NAME")]
    experiment: Option<String>,
    /// Override the base seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count (per epsilon, or per sigma for the disorder sweep)
    #[arg(long)]
    trials: Option<usize>,
    /// Override the epsilon grid, comma separated (e.g. 0.1,0.05,0.025)
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    epsilons: Option<Vec<f64>>,
    /// Override the output directory
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// Discard any previous results in the output directory instead of resuming
    #[arg(long)]
    fresh: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Seed for the randomized checks
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PlotArgs {
    /// Directory containing records.csv (and optionally summary.json)
    #[arg(long, value_name = "DIR")]
    input: PathBuf,
    /// Where to write the SVG files (defaults to the input directory)
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Plot(args) => cmd_plot(args),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, String> {
    let mut config = match (&args.config, &args.experiment) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("reading {}: {e}", path.display()))?;
            toml::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))?
        }
        (None, Some(name)) => {
            let experiment: Experiment = name.parse().map_err(|e| format!("{e}"))?;
            ExperimentConfig::for_experiment(experiment)
        }
        (None, None) => {
            return Err("pass --config <file> or --experiment <name>".into());
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(eps) = &args.epsilons {
        config.epsilons = eps.clone();
    }
    if let Some(dir) = &args.output_dir {
        config.output_dir = dir.display().to_string();
    }
    config.normalize();
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

type DoneMap = BTreeMap<(u64, usize), ExperimentRecord>;

fn key_of(eps: f64, trial: usize) -> (u64, usize) {
    (eps.to_bits(), trial)
}

/// Load previously completed records for resumption, refusing to mix
/// results from a configuration that would compute different cell values.
/// (Changing only the epsilon grid or, outside the disorder sweep, the
/// trial count keeps records reusable.)
fn load_existing(
    records_path: &Path,
    summary_path: &Path,
    identity: &str,
    experiment: Experiment,
) -> Result<DoneMap, String> {
    let mut done = DoneMap::new();
    if !records_path.exists() {
        return Ok(done);
    }
    let stored = fs::read_to_string(summary_path)
        .ok()
        .and_then(|text| serde_json::from_str::<serde_json::Value>(&text).ok())
        .and_then(|v| v.get("run_identity").and_then(|h| h.as_str()).map(String::from));
    match stored {
        Some(h) if h == identity => {}
        Some(h) => {
            return Err(format!(
                "output directory holds results for run identity {h}, current config has {identity}; \
                 pass --fresh to discard them or choose another --output-dir"
            ))
        }
        None => {
            return Err(format!(
                "found {} without a readable {}; pass --fresh to discard it",
                records_path.display(),
                summary_path.display()
            ))
        }
    }
    let file = fs::File::open(records_path)
        .map_err(|e| format!("opening {}: {e}", records_path.display()))?;
    for rec in csv_io::parse_records(std::io::BufReader::new(file))? {
        if rec.experiment == experiment {
            done.insert(key_of(rec.epsilon, rec.trial), rec);
        }
    }
    Ok(done)
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, String> {
    let config = load_config(&args)?;
    if config.experiment == Experiment::VerifySuite {
        return run_verification(&config);
    }
    let out_dir = PathBuf::from(&config.output_dir);
    fs::create_dir_all(&out_dir).map_err(|e| format!("creating {}: {e}", out_dir.display()))?;
    let records_path = out_dir.join("records.csv");
    let summary_path = out_dir.join("summary.json");
    let failures_path = out_dir.join("failures.csv");
    if args.fresh {
        for p in [&records_path, &summary_path, &failures_path] {
            if p.exists() {
                fs::remove_file(p).map_err(|e| format!("removing {}: {e}", p.display()))?;
            }
        }
    }

    let hash = summary::config_hash(&config);
    let identity = summary::run_identity_hash(&config);
    let mut done = load_existing(&records_path, &summary_path, &identity, config.experiment)?;

    // mark the run as in progress so a later resume can identify the config
    let skeleton = serde_json::json!({
        "config_hash": hash,
        "run_identity": identity,
        "experiment": config.experiment.name(),
        "status": "running",
        "config": &config,
    });
    fs::write(&summary_path, serde_json::to_string_pretty(&skeleton).unwrap())
        .map_err(|e| format!("writing {}: {e}", summary_path.display()))?;

    let plan = planned_runs(&config);
    let fresh_file = !records_path.exists();
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&records_path)
        .map_err(|e| format!("opening {}: {e}", records_path.display()))?;
    let mut appender = BufWriter::new(file);
    if fresh_file {
        csv_io::write_header(&mut appender).map_err(|e| e.to_string())?;
    }

    let mut failures: Vec<TrialFailure> = Vec::new();
    let total = plan.len();
    let mut completed = done.len();
    for &(eps, trial) in &plan {
        if done.contains_key(&key_of(eps, trial)) {
            continue;
        }
        match run_single(&config, eps, trial) {
            Ok(rec) => {
                csv_io::write_record(&mut appender, &rec).map_err(|e| e.to_string())?;
                appender.flush().map_err(|e| e.to_string())?;
                completed += 1;
                eprintln!(
                    "[{completed}/{total}] eps={eps} trial={trial} rho={:.5} abs_r={:.5} ({} ms)",
                    rec.report.rho, rec.report.sup_abs_error_r, rec.duration_ms
                );
                done.insert(key_of(eps, trial), rec);
            }
            Err(err) => {
                eprintln!("[fail] eps={eps} trial={trial}: {err}");
                failures.push(TrialFailure {
                    experiment: config.experiment,
                    epsilon: eps,
                    trial,
                    message: err.to_string(),
                });
            }
        }
    }
    drop(appender);

    // canonical rewrite: plan order, so any two complete runs of the same
    // config produce identical files apart from wall-clock durations
    let records: Vec<ExperimentRecord> =
        plan.iter().filter_map(|&(eps, trial)| done.get(&key_of(eps, trial)).cloned()).collect();
    if records.len() < done.len() {
        eprintln!(
            "note: {} stored records fall outside the current epsilon/trial plan and are dropped \
             (identical seeds regenerate them deterministically)",
            done.len() - records.len()
        );
    }
    let mut writer = BufWriter::new(
        fs::File::create(&records_path)
            .map_err(|e| format!("rewriting {}: {e}", records_path.display()))?,
    );
    csv_io::write_header(&mut writer).map_err(|e| e.to_string())?;
    for rec in &records {
        csv_io::write_record(&mut writer, rec).map_err(|e| e.to_string())?;
    }
    writer.flush().map_err(|e| e.to_string())?;

    if failures.is_empty() {
        if failures_path.exists() {
            fs::remove_file(&failures_path).ok();
        }
    } else {
        let mut fw = BufWriter::new(
            fs::File::create(&failures_path)
                .map_err(|e| format!("writing {}: {e}", failures_path.display()))?,
        );
        csv_io::write_failures(&mut fw, &failures).map_err(|e| e.to_string())?;
        fw.flush().map_err(|e| e.to_string())?;
    }

    let summary = summary::build_summary(&hash, &config, &records, failures.len());
    fs::write(&summary_path, serde_json::to_string_pretty(&summary).unwrap())
        .map_err(|e| format!("writing {}: {e}", summary_path.display()))?;

    if !records.is_empty() {
        let files = plots::emit_plots(&records, &hash, &out_dir)?;
        for f in files {
            eprintln!("wrote {}", f.display());
        }
    }
    eprintln!(
        "wrote {} records to {} (config {hash})",
        records.len(),
        records_path.display()
    );
    if let Some(fit) = &summary.fits.rho_vs_epsilon {
        eprintln!("rho vs epsilon: slope {:.3}, r^2 {:.4}", fit.slope, fit.r_squared);
    }

    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} of {} trials failed; see {}", failures.len(), total, failures_path.display());
        Ok(ExitCode::from(1))
    }
}

fn run_verification(config: &ExperimentConfig) -> Result<ExitCode, String> {
    let results = verify_suite(config);
    let mut failed: Vec<&str> = Vec::new();
    let mut stdout = std::io::stdout().lock();
    for r in &results {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        writeln!(stdout, "{tag} {}: {}", r.name, r.detail).map_err(|e| e.to_string())?;
        if !r.pass {
            failed.push(r.name);
        }
    }
    writeln!(stdout, "{} checks, {} failed", results.len(), failed.len())
        .map_err(|e| e.to_string())?;
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(format!("verification failed: {}", failed.join(", ")))
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, String> {
    let mut config = ExperimentConfig::for_experiment(Experiment::VerifySuite);
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    run_verification(&config)
}

fn cmd_plot(args: PlotArgs) -> Result<ExitCode, String> {
    let records_path = args.input.join("records.csv");
    let file = fs::File::open(&records_path)
        .map_err(|e| format!("opening {}: {e}", records_path.display()))?;
    let records = csv_io::parse_records(std::io::BufReader::new(file))?;
    if records.is_empty() {
        return Err(format!("{} holds no records", records_path.display()));
    }
    let hash = fs::read_to_string(args.input.join("summary.json"))
        .ok()
        .and_then(|text| serde_json::from_str::<serde_json::Value>(&text).ok())
        .and_then(|v| v.get("config_hash").and_then(|h| h.as_str()).map(String::from))
        .unwrap_or_else(|| "unknown".into());
    let out_dir = args.output_dir.unwrap_or_else(|| args.input.clone());
    fs::create_dir_all(&out_dir).map_err(|e| format!("creating {}: {e}", out_dir.display()))?;
    let files = plots::emit_plots(&records, &hash, &out_dir)?;
    for f in &files {
        println!("wrote {}", f.display());
    }
    Ok(ExitCode::SUCCESS)
}
