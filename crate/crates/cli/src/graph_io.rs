//! Graph instances as JSON: `{"n": 4, "edges": [[0, 1], ...], "seed": 7, "edge_prob": 0.5}`.

use std::path::Path;

use hybrid_qaoa::graph::GraphInstance;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub edge_prob: f64,
}

impl From<&GraphInstance> for GraphFile {
    fn from(g: &GraphInstance) -> Self {
        Self {
            n: g.n_vertices(),
            edges: g.edges().iter().map(|&(a, b)| [a, b]).collect(),
            seed: g.seed(),
            edge_prob: g.edge_prob(),
        }
    }
}

impl GraphFile {
    pub fn to_instance(&self) -> CliResult<GraphInstance> {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        Ok(GraphInstance::new(self.n, &edges, self.seed, self.edge_prob)?)
    }
}

pub fn read_graph(path: &Path) -> CliResult<GraphInstance> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: GraphFile = serde_json::from_str(&text)?;
    file.to_instance()
}

pub fn write_graph(path: &Path, g: &GraphInstance) -> CliResult<()> {
    let text = serde_json::to_string_pretty(&GraphFile::from(g))?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
