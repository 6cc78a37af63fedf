//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hybrid_qaoa::ansatz::MixerAxes;
use hybrid_qaoa::graph::MAX_BRUTEFORCE_VERTICES;
use hybrid_qaoa::optimizer::{InitRanges, OptimizerConfig};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Single,
    Compare,
    DepthSweep,
    DeltaSweep,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Single => "single",
            Kind::Compare => "compare",
            Kind::DepthSweep => "depth-sweep",
            Kind::DeltaSweep => "delta-sweep",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CdAxis {
    Z,
    Xy,
}

impl From<CdAxis> for MixerAxes {
    fn from(a: CdAxis) -> Self {
        match a {
            CdAxis::Z => MixerAxes::ZControl,
            CdAxis::Xy => MixerAxes::XyPlane,
        }
    }
}

/// Final-metric evaluation: exact probabilities or a finite number of samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shots {
    #[default]
    Exact,
    Count(usize),
}

impl FromStr for Shots {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "exact" {
            return Ok(Shots::Exact);
        }
        match s.parse::<usize>() {
            Ok(0) => Err("shot count must be positive".into()),
            Ok(n) => Ok(Shots::Count(n)),
            Err(_) => Err(format!("expected a positive integer or \"exact\", got {s:?}")),
        }
    }
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Count(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Count(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Shots::from_str(&n.to_string()),
            Raw::Text(t) => Shots::from_str(&t),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSection {
    /// Graph sizes `N`.
    pub n: Vec<usize>,
    pub edge_prob: f64,
    /// Seeded instances per size (compare); sweeps use instance 0 only.
    pub n_instances: usize,
    /// Fixed graph in JSON form, replacing seeded generation.
    pub instance_file: Option<PathBuf>,
}

impl Default for GraphSection {
    fn default() -> Self {
        Self { n: vec![4], edge_prob: 0.5, n_instances: 10, instance_file: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnsatzSection {
    pub n_max: Vec<usize>,
    pub delta: Vec<f64>,
    pub qaoa_depth: usize,
    /// Mixer depths. In `compare` each entry is a target arm against `d = 0`.
    pub mixer_depth: Vec<usize>,
    pub cd_axis: CdAxis,
}

impl Default for AnsatzSection {
    fn default() -> Self {
        Self { n_max: vec![10], delta: vec![0.45], qaoa_depth: 2, mixer_depth: vec![2], cd_axis: CdAxis::Z }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub n_starts: usize,
    pub initial_step: f64,
    pub final_step: f64,
    pub max_evals: usize,
    pub gamma_range: [f64; 2],
    pub angle_range: [f64; 2],
    pub cd_amplitude_range: [f64; 2],
    pub cd_phase_range: [f64; 2],
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let o = OptimizerConfig::default();
        let r = o.init_ranges;
        Self {
            n_starts: o.n_starts,
            initial_step: o.initial_step,
            final_step: o.final_step,
            max_evals: o.max_evals,
            gamma_range: r.gamma.into(),
            angle_range: r.angle.into(),
            cd_amplitude_range: r.cd_amplitude.into(),
            cd_phase_range: r.cd_phase.into(),
        }
    }
}

impl OptimizerSection {
    pub fn to_config(&self, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            n_starts: self.n_starts,
            initial_step: self.initial_step,
            final_step: self.final_step,
            max_evals: self.max_evals,
            init_ranges: InitRanges {
                gamma: self.gamma_range.into(),
                angle: self.angle_range.into(),
                cd_amplitude: self.cd_amplitude_range.into(),
                cd_phase: self.cd_phase_range.into(),
            },
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    pub kind: Option<Kind>,
    pub seed: u64,
    pub repeats: usize,
    pub shots: Shots,
    /// Record wall-clock times. Off by default so outputs are reproducible.
    pub timing: bool,
    /// `single` only: skip optimization and evaluate all-zero parameters.
    pub zero_params: bool,
    /// Worker threads; does not affect results, and is not echoed.
    #[serde(skip_serializing)]
    pub workers: usize,
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
    pub graph: GraphSection,
    pub ansatz: AnsatzSection,
    pub optimizer: OptimizerSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: None,
            seed: 0,
            repeats: 1,
            shots: Shots::Exact,
            timing: false,
            zero_params: false,
            workers: 1,
            output_dir: None,
            graph: GraphSection::default(),
            ansatz: AnsatzSection::default(),
            optimizer: OptimizerSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: &str| Err(CliError::Config(m.into()));
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        let g = &self.graph;
        if g.n.is_empty() || self.ansatz.n_max.is_empty() || self.ansatz.delta.is_empty() || self.ansatz.mixer_depth.is_empty() {
            return bad("list fields must be non-empty");
        }
        if g.instance_file.is_none() && g.n.iter().any(|&n| !(2..=MAX_BRUTEFORCE_VERTICES).contains(&n)) {
            return bad("graph sizes must lie in 2..=24");
        }
        if g.n_instances == 0 {
            return bad("n_instances must be at least 1");
        }
        if !(0.0..=1.0).contains(&g.edge_prob) {
            return bad("edge_prob must lie in [0, 1]");
        }
        if self.ansatz.qaoa_depth == 0 {
            return bad("qaoa_depth must be at least 1");
        }
        self.optimizer.to_config(self.seed).validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            kind = "depth-sweep"
            seed = 7
            repeats = 10
            shots = 1000
            [graph]
            n = [4]
            [ansatz]
            n_max = [6, 10]
            delta = [0.45]
            mixer_depth = [0, 1, 2]
            cd_axis = "xy"
            [optimizer]
            max_evals = 100
            "#,
        )
        .unwrap();
        assert_eq!(cfg.kind, Some(Kind::DepthSweep));
        assert_eq!(cfg.shots, Shots::Count(1000));
        assert_eq!(cfg.ansatz.cd_axis, CdAxis::Xy);
        assert_eq!(cfg.optimizer.n_starts, 5);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::from_toml("nonsense = 1").is_err());
        assert!(ExperimentConfig::from_toml("shots = 0").is_err());
        assert!(ExperimentConfig::from_toml("shots = \"many\"").is_err());
        let empty = ExperimentConfig::from_toml("[ansatz]\nn_max = []").unwrap();
        assert!(empty.validate().is_err());
        let zero = ExperimentConfig::from_toml("repeats = 0").unwrap();
        assert!(zero.validate().is_err());
    }

    #[test]
    fn shots_round_trip_text() {
        assert_eq!("exact".parse::<Shots>().unwrap(), Shots::Exact);
        assert_eq!("250".parse::<Shots>().unwrap().to_string(), "250");
        assert!("-3".parse::<Shots>().is_err());
    }
}
