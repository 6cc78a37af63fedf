//! Result files: `runs.csv`, `summary.csv`, `manifest.json`, and for
//! `single` also `distribution.csv` and `trace.csv`.

use std::fs;
use std::path::Path;

use hybrid_qaoa::graph::RNG_FAMILY;
use serde::Serialize;

use crate::config::{ExperimentConfig, Kind};
use crate::error::{CliError, CliResult};
use crate::experiment::{compare_summary, sweep_summary, trends, JobKey, Outcome, Trend};
use crate::graph_io::GraphFile;

const SEED_DERIVATION: &str = "SplitMix64 chain; instance = derive(seed, [N, index]); \
optimizer = derive(seed, [0x4f505449, N, n_max, delta bits, P, d, instance_seed, repeat, arm]); \
start i = derive(optimizer, [i]); shots = derive(optimizer, [0x53484f54])";

#[derive(Serialize)]
struct ManifestRun<'a> {
    #[serde(flatten)]
    key: &'a JobKey,
    optimizer_seed: u64,
    best_objective: Option<f64>,
    best_start: Option<usize>,
    param_names: &'a [String],
    best_params: &'a [f64],
}

#[derive(Serialize)]
struct FailedCell<'a> {
    #[serde(flatten)]
    key: &'a JobKey,
    error: &'a str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    kind: Kind,
    rng_family: &'static str,
    seed_derivation: &'static str,
    config: &'a ExperimentConfig,
    graphs: Vec<GraphFile>,
    runs: Vec<ManifestRun<'a>>,
    failed_cells: Vec<FailedCell<'a>>,
    trends: Vec<Trend>,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct DistributionRow {
    bitstring: String,
    probability: f64,
    cut: u32,
    optimal: bool,
}

#[derive(Serialize)]
struct TraceRow {
    start: usize,
    eval: usize,
    best_objective: f64,
}

/// Writes all result files for `outcome` into `dir`, creating it if needed.
pub fn write_outputs(outcome: &Outcome, dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_csv(&dir.join("runs.csv"), outcome.rows())?;

    let mut trend = Vec::new();
    match outcome.kind {
        Kind::Compare => write_csv(&dir.join("summary.csv"), compare_summary(outcome))?,
        Kind::DepthSweep | Kind::DeltaSweep => {
            let summary = sweep_summary(outcome);
            trend = trends(outcome.kind, &summary);
            write_csv(&dir.join("summary.csv"), &summary)?;
        }
        Kind::Single => write_single(outcome, dir)?,
    }

    let mut runs = Vec::new();
    let mut failed_cells = Vec::new();
    for job in &outcome.jobs {
        match &job.outcome {
            Ok(c) => runs.push(ManifestRun {
                key: &job.key,
                optimizer_seed: job.optimizer_seed,
                best_objective: c.record.as_ref().map(|r| r.best_objective),
                best_start: c.record.as_ref().map(|r| r.best_start),
                param_names: &c.param_names,
                best_params: &c.best_params,
            }),
            Err(e) => failed_cells.push(FailedCell { key: &job.key, error: e }),
        }
    }
    let manifest = Manifest {
        tool: "hybrid-qaoa",
        version: env!("CARGO_PKG_VERSION"),
        kind: outcome.kind,
        rng_family: RNG_FAMILY,
        seed_derivation: SEED_DERIVATION,
        config: &outcome.config,
        graphs: outcome.graphs.iter().map(GraphFile::from).collect(),
        runs,
        failed_cells,
        trends: trend,
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

fn write_single(outcome: &Outcome, dir: &Path) -> CliResult<()> {
    let Some(Ok(done)) = outcome.jobs.first().map(|j| &j.outcome) else {
        return Ok(());
    };
    let g = &outcome.graphs[0];
    let cuts = g.cut_table();
    let c_max = cuts.iter().copied().max().unwrap_or(0);
    write_csv(
        &dir.join("distribution.csv"),
        done.distribution.iter().map(|(z, p)| DistributionRow {
            bitstring: z.to_string(),
            probability: p,
            cut: cuts[z.value() as usize],
            optimal: cuts[z.value() as usize] == c_max,
        }),
    )?;
    let trace = done.record.iter().flat_map(|r| {
        r.starts.iter().flat_map(|s| {
            s.history().iter().enumerate().map(move |(i, &f)| TraceRow { start: s.index, eval: i + 1, best_objective: f })
        })
    });
    write_csv(&dir.join("trace.csv"), trace)
}
