//! Experiment grids: job construction, seeded execution on a worker pool,
//! and per-cell summaries.
//!
//! Seeds: instance `i` of size `N` uses `derive(master, [N, i])`, shared by
//! every cutoff and depth. Each optimization uses
//! `derive(master, [OPT_STREAM, N, n_max, Δ bits, P, d, instance seed, repeat, arm])`,
//! so paired arms see the same graph but independent starts.

use std::collections::BTreeMap;
use std::time::Instant;

use hybrid_qaoa::ansatz::{Ansatz, AnsatzConfig};
use hybrid_qaoa::distribution::Distribution;
use hybrid_qaoa::graph::{generate_er, GraphInstance};
use hybrid_qaoa::metrics::CutScorer;
use hybrid_qaoa::optimizer::{multistart, RunRecord};
use hybrid_qaoa::seed::derive;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Kind, Shots};
use crate::error::{CliError, CliResult};
use crate::graph_io::read_graph;

const OPT_STREAM: u64 = 0x4f50_5449;
const SHOT_STREAM: u64 = 0x5348_4f54;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    /// `d = 0` reference in `compare`.
    Baseline,
    /// The mixer depth under test in `compare`.
    Target,
    Sweep,
    Single,
}

impl Arm {
    fn code(self) -> u64 {
        self as u64
    }
}

/// One optimized circuit; one CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub n_max: usize,
    pub delta: f64,
    #[serde(rename = "P")]
    pub p: usize,
    pub d: usize,
    pub instance_seed: u64,
    pub arm: Arm,
    pub expected_cut: f64,
    pub approx_ratio: Option<f64>,
    pub p_opt: Option<f64>,
    pub c_max: u32,
    pub evals: usize,
    pub wall_ms: u64,
    pub repeat: usize,
}

/// Grid coordinates of a job.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JobKey {
    #[serde(rename = "N")]
    pub n: usize,
    pub n_max: usize,
    pub delta: f64,
    #[serde(rename = "P")]
    pub p: usize,
    pub d: usize,
    pub instance_seed: u64,
    pub arm: Arm,
    pub repeat: usize,
    /// For `compare` targets, the baseline they are paired with shares
    /// everything but `d` and `arm`.
    #[serde(skip)]
    pub instance: usize,
}

#[derive(Debug, Clone)]
pub struct JobResult {
    pub key: JobKey,
    pub optimizer_seed: u64,
    pub outcome: Result<Completed, String>,
}

#[derive(Debug, Clone)]
pub struct Completed {
    pub row: RunRow,
    pub param_names: Vec<String>,
    pub best_params: Vec<f64>,
    /// `None` when parameters were fixed instead of optimized.
    pub record: Option<RunRecord>,
    /// Exact output distribution of the final circuit.
    pub distribution: Distribution,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub kind: Kind,
    pub config: ExperimentConfig,
    pub graphs: Vec<GraphInstance>,
    pub jobs: Vec<JobResult>,
}

impl Outcome {
    pub fn rows(&self) -> impl Iterator<Item = &RunRow> {
        self.jobs.iter().filter_map(|j| j.outcome.as_ref().ok().map(|c| &c.row))
    }
}

/// Graphs used by the experiment: the instance file, or seeded G(N, p).
/// Sweeps and `single` use one instance.
pub fn build_graphs(cfg: &ExperimentConfig, kind: Kind) -> CliResult<Vec<(usize, GraphInstance)>> {
    if let Some(path) = &cfg.graph.instance_file {
        return Ok(vec![(0, read_graph(path)?)]);
    }
    let per_size = if kind == Kind::Compare { cfg.graph.n_instances } else { 1 };
    let sizes: &[usize] = if kind == Kind::Single { &cfg.graph.n[..1] } else { &cfg.graph.n };
    let mut out = Vec::new();
    for &n in sizes {
        for idx in 0..per_size {
            let seed = derive(cfg.seed, &[n as u64, idx as u64]);
            out.push((idx, generate_er(n, cfg.graph.edge_prob, seed)?));
        }
    }
    Ok(out)
}

fn jobs_for(cfg: &ExperimentConfig, kind: Kind, graphs: &[(usize, GraphInstance)]) -> Vec<JobKey> {
    let a = &cfg.ansatz;
    let p = a.qaoa_depth;
    let mut keys = Vec::new();
    let mut push = |g: &GraphInstance, instance, n_max, delta, d, arm, repeat| {
        keys.push(JobKey { n: g.n_vertices(), n_max, delta, p, d, instance_seed: g.seed(), arm, repeat, instance })
    };
    match kind {
        Kind::Single => {
            let (i, g) = &graphs[0];
            push(g, *i, a.n_max[0], a.delta[0], a.mixer_depth[0], Arm::Single, 0);
        }
        Kind::Compare => {
            for (i, g) in graphs {
                for &n_max in &a.n_max {
                    for &delta in &a.delta {
                        for repeat in 0..cfg.repeats {
                            push(g, *i, n_max, delta, 0, Arm::Baseline, repeat);
                            for &d in &a.mixer_depth {
                                push(g, *i, n_max, delta, d, Arm::Target, repeat);
                            }
                        }
                    }
                }
            }
        }
        Kind::DepthSweep | Kind::DeltaSweep => {
            let (i, g) = &graphs[0];
            for &n_max in &a.n_max {
                for &delta in &a.delta {
                    for &d in &a.mixer_depth {
                        for repeat in 0..cfg.repeats {
                            push(g, *i, n_max, delta, d, Arm::Sweep, repeat);
                        }
                    }
                }
            }
        }
    }
    keys
}

fn optimizer_seed(master: u64, k: &JobKey) -> u64 {
    derive(
        master,
        &[
            OPT_STREAM,
            k.n as u64,
            k.n_max as u64,
            k.delta.to_bits(),
            k.p as u64,
            k.d as u64,
            k.instance_seed,
            k.repeat as u64,
            k.arm.code(),
        ],
    )
}

fn run_job(cfg: &ExperimentConfig, key: JobKey, g: &GraphInstance) -> JobResult {
    let optimizer_seed = optimizer_seed(cfg.seed, &key);
    let outcome = execute(cfg, &key, g, optimizer_seed).map_err(|e| e.to_string());
    JobResult { key, optimizer_seed, outcome }
}

fn execute(cfg: &ExperimentConfig, key: &JobKey, g: &GraphInstance, optimizer_seed: u64) -> CliResult<Completed> {
    let ansatz_cfg = AnsatzConfig {
        n_pairs: key.n,
        n_max: key.n_max,
        delta: key.delta,
        qaoa_depth: key.p,
        mixer_depth: key.d,
        cd_axis: cfg.ansatz.cd_axis.into(),
    };
    let start = Instant::now();
    let ansatz = Ansatz::new(ansatz_cfg, g)?;
    let layout = ansatz.layout();
    let (best_params, record) = if cfg.zero_params && key.arm == Arm::Single {
        (vec![0.0; layout.len()], None)
    } else {
        let opt = cfg.optimizer.to_config(optimizer_seed);
        let objective = |x: &[f64]| ansatz.expected_cut(x).map_or(f64::NAN, |c| -c);
        let record = multistart(objective, &opt, &layout.classes())?;
        (record.best_params.clone(), Some(record))
    };
    let distribution = ansatz.distribution(&best_params)?;
    let wall_ms = if cfg.timing { start.elapsed().as_millis() as u64 } else { 0 };

    let measured = match cfg.shots {
        Shots::Exact => distribution.clone(),
        Shots::Count(shots) => {
            let samples = distribution.sample(shots, derive(optimizer_seed, &[SHOT_STREAM]))?;
            Distribution::from_samples(key.n, &samples)?
        }
    };
    let report = CutScorer::new(g)?.report(&measured)?;
    let row = RunRow {
        n: key.n,
        n_max: key.n_max,
        delta: key.delta,
        p: key.p,
        d: key.d,
        instance_seed: key.instance_seed,
        arm: key.arm,
        expected_cut: report.expected_cut,
        approx_ratio: report.approx_ratio,
        // Every bitstring is optimal on an edgeless graph; report not-applicable.
        p_opt: (report.c_max > 0).then_some(report.p_opt),
        c_max: report.c_max,
        evals: record.as_ref().map_or(0, RunRecord::total_evals),
        wall_ms,
        repeat: key.repeat,
    };
    Ok(Completed { row, param_names: layout.names(), best_params, record, distribution })
}

/// Runs every job of the experiment on `cfg.workers` threads. Results are
/// collected in job order, so content does not depend on the worker count.
pub fn run_experiment(cfg: &ExperimentConfig, kind: Kind) -> CliResult<Outcome> {
    if let Some(k) = cfg.kind {
        if k != kind {
            return Err(CliError::Config(format!("config is for `{k}` but `{kind}` was requested")));
        }
    }
    cfg.validate()?;
    let graphs = build_graphs(cfg, kind)?;
    let keys = jobs_for(cfg, kind, &graphs);
    let by_key = |k: &JobKey| {
        graphs
            .iter()
            .find(|(i, g)| *i == k.instance && g.n_vertices() == k.n)
            .map(|(_, g)| g)
            .expect("job refers to a built graph")
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    let jobs = pool.install(|| keys.par_iter().map(|k| run_job(cfg, *k, by_key(k))).collect());
    let mut config = cfg.clone();
    config.kind = Some(kind);
    Ok(Outcome { kind, config, graphs: graphs.into_iter().map(|(_, g)| g).collect(), jobs })
}

/// Mean, median and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub std: Option<f64>,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
        let std = (n > 1).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
        Some(Self { count: n, mean, median, std })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    ApproxRatio,
    POpt,
}

impl Metric {
    pub fn of(self, row: &RunRow) -> Option<f64> {
        match self {
            Metric::ApproxRatio => row.approx_ratio,
            Metric::POpt => row.p_opt,
        }
    }
}

/// Paired improvement summary for one `compare` cell and metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImprovementSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub n_max: usize,
    pub delta: f64,
    #[serde(rename = "P")]
    pub p: usize,
    pub d: usize,
    pub metric: Metric,
    /// Instances with a defined improvement.
    pub instances: usize,
    pub mean_improvement: Option<f64>,
    pub median_improvement: Option<f64>,
    /// Spread of per-instance mean improvements across instances.
    pub std_over_instances: Option<f64>,
    /// Mean over instances of the spread across repeats.
    pub mean_std_over_repeats: Option<f64>,
    pub mean_target: Option<f64>,
    pub mean_baseline: Option<f64>,
}

type CellKey = (usize, usize, u64, usize, usize);

fn cell_of(r: &RunRow) -> CellKey {
    (r.n, r.n_max, r.delta.to_bits(), r.p, r.d)
}

/// Improvements `target − baseline` per instance, averaged over repeats.
pub fn compare_summary(outcome: &Outcome) -> Vec<ImprovementSummary> {
    let rows: Vec<&RunRow> = outcome.rows().collect();
    let baseline = |t: &RunRow| {
        rows.iter().copied().find(|b| {
            b.arm == Arm::Baseline
                && (b.n, b.n_max, b.delta.to_bits(), b.instance_seed, b.repeat)
                    == (t.n, t.n_max, t.delta.to_bits(), t.instance_seed, t.repeat)
        })
    };
    // cell -> instance -> (improvements, targets, baselines) per repeat
    type Acc = BTreeMap<u64, (Vec<f64>, Vec<f64>, Vec<f64>)>;
    let mut cells: BTreeMap<(CellKey, Metric), Acc> = BTreeMap::new();
    let mut order: Vec<(CellKey, Metric)> = Vec::new();
    for t in rows.iter().filter(|r| r.arm == Arm::Target) {
        for metric in [Metric::ApproxRatio, Metric::POpt] {
            let key = (cell_of(t), metric);
            if !order.contains(&key) {
                order.push(key);
            }
            let entry = cells.entry(key).or_default().entry(t.instance_seed).or_default();
            if let Some(b) = baseline(t) {
                if let (Some(tv), Some(bv)) = (metric.of(t), metric.of(b)) {
                    entry.0.push(tv - bv);
                    entry.1.push(tv);
                    entry.2.push(bv);
                }
            }
        }
    }
    order
        .into_iter()
        .map(|key @ ((n, n_max, delta, p, d), metric)| {
            let per_instance: Vec<&(Vec<f64>, Vec<f64>, Vec<f64>)> =
                cells[&key].values().filter(|v| !v.0.is_empty()).collect();
            let mean_of = |v: &[f64]| Stats::of(v).map(|s| s.mean);
            let improvements: Vec<f64> = per_instance.iter().filter_map(|v| mean_of(&v.0)).collect();
            let repeat_spread: Vec<f64> = per_instance.iter().filter_map(|v| Stats::of(&v.0).and_then(|s| s.std)).collect();
            let targets: Vec<f64> = per_instance.iter().filter_map(|v| mean_of(&v.1)).collect();
            let baselines: Vec<f64> = per_instance.iter().filter_map(|v| mean_of(&v.2)).collect();
            let s = Stats::of(&improvements);
            ImprovementSummary {
                n,
                n_max,
                delta: f64::from_bits(delta),
                p,
                d,
                metric,
                instances: improvements.len(),
                mean_improvement: s.map(|s| s.mean),
                median_improvement: s.map(|s| s.median),
                std_over_instances: s.and_then(|s| s.std),
                mean_std_over_repeats: mean_of(&repeat_spread),
                mean_target: mean_of(&targets),
                mean_baseline: mean_of(&baselines),
            }
        })
        .collect()
}

/// Mean ± std of both metrics over repeats for one sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub n_max: usize,
    pub delta: f64,
    #[serde(rename = "P")]
    pub p: usize,
    pub d: usize,
    pub runs: usize,
    pub mean_approx_ratio: Option<f64>,
    pub std_approx_ratio: Option<f64>,
    pub mean_p_opt: Option<f64>,
    pub std_p_opt: Option<f64>,
}

pub fn sweep_summary(outcome: &Outcome) -> Vec<SweepSummary> {
    let mut order: Vec<CellKey> = Vec::new();
    let mut cells: BTreeMap<CellKey, Vec<&RunRow>> = BTreeMap::new();
    for r in outcome.rows() {
        let key = cell_of(r);
        if !order.contains(&key) {
            order.push(key);
        }
        cells.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key @ (n, n_max, delta, p, d)| {
            let rows = &cells[&key];
            let stats = |m: Metric| Stats::of(&rows.iter().filter_map(|r| m.of(r)).collect::<Vec<_>>());
            let (ar, po) = (stats(Metric::ApproxRatio), stats(Metric::POpt));
            SweepSummary {
                n,
                n_max,
                delta: f64::from_bits(delta),
                p,
                d,
                runs: rows.len(),
                mean_approx_ratio: ar.map(|s| s.mean),
                std_approx_ratio: ar.and_then(|s| s.std),
                mean_p_opt: po.map(|s| s.mean),
                std_p_opt: po.and_then(|s| s.std),
            }
        })
        .collect()
}

/// Directional checks over a sweep, recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trend {
    pub n_max: usize,
    /// Fixed `Δ` for depth sweeps, fixed `d` for Δ sweeps.
    pub fixed: f64,
    pub metric: Metric,
    /// Depth sweeps: mean at `d = 1` exceeds mean at `d = 0`.
    pub first_step_increases: Option<bool>,
    /// Means are non-decreasing along the swept axis.
    pub non_decreasing: Option<bool>,
}

pub fn trends(kind: Kind, summary: &[SweepSummary]) -> Vec<Trend> {
    let mut out = Vec::new();
    let mean = |s: &SweepSummary, m: Metric| match m {
        Metric::ApproxRatio => s.mean_approx_ratio,
        Metric::POpt => s.mean_p_opt,
    };
    let mut groups: Vec<(usize, f64)> = Vec::new();
    for s in summary {
        let g = (s.n_max, if kind == Kind::DepthSweep { s.delta } else { s.d as f64 });
        if !groups.contains(&g) {
            groups.push(g);
        }
    }
    for (n_max, fixed) in groups {
        let mut series: Vec<&SweepSummary> = summary
            .iter()
            .filter(|s| s.n_max == n_max && if kind == Kind::DepthSweep { s.delta == fixed } else { s.d as f64 == fixed })
            .collect();
        if kind == Kind::DepthSweep {
            series.sort_by_key(|s| s.d);
        } else {
            series.sort_by(|a, b| a.delta.total_cmp(&b.delta));
        }
        for metric in [Metric::ApproxRatio, Metric::POpt] {
            let values: Option<Vec<f64>> = series.iter().map(|s| mean(s, metric)).collect();
            let first_step_increases = if kind == Kind::DepthSweep {
                let at = |d| series.iter().find(|s| s.d == d).and_then(|s| mean(s, metric));
                at(0).zip(at(1)).map(|(a, b)| b > a)
            } else {
                None
            };
            out.push(Trend {
                n_max,
                fixed,
                metric,
                first_step_increases,
                non_decreasing: values.map(|v| v.windows(2).all(|w| w[1] >= w[0])),
            });
        }
    }
    out
}
