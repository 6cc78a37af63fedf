use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hybrid_qaoa_cli::config::{CdAxis, Shots};
use hybrid_qaoa_cli::output::write_outputs;
use hybrid_qaoa_cli::{run_experiment, CliResult, ExperimentConfig, Kind};

/// Hybrid oscillator-qubit QAOA experiments on Max-Cut.
#[derive(Parser, Debug)]
#[command(author, version)]
struct Args {
    #[arg(value_enum)]
    kind: Kind,

    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (default: config `output_dir`, else `out/<kind>`).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    workers: Option<usize>,

    /// Shots for the final metrics, or `exact`.
    #[arg(long)]
    shots: Option<Shots>,

    #[arg(long, value_enum)]
    cd_axis: Option<CdAxis>,

    /// `single`: evaluate all-zero parameters instead of optimizing.
    #[arg(long)]
    zero_params: bool,

    /// Record wall-clock times in the outputs.
    #[arg(long)]
    timing: bool,
}

fn run(args: Args) -> CliResult<PathBuf> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(s) = args.shots {
        cfg.shots = s;
    }
    if let Some(a) = args.cd_axis {
        cfg.ansatz.cd_axis = a;
    }
    cfg.zero_params |= args.zero_params;
    cfg.timing |= args.timing;

    let out = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(args.kind.to_string()));
    let outcome = run_experiment(&cfg, args.kind)?;
    for job in &outcome.jobs {
        if let Err(e) = &job.outcome {
            eprintln!("cell N={} n_max={} delta={} d={} failed: {e}", job.key.n, job.key.n_max, job.key.delta, job.key.d);
        }
    }
    write_outputs(&outcome, &out)?;
    Ok(out)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(out) => {
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
