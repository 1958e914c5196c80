//! Optional TOML configuration shared by every subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use motifpart::harness::generate::SyntheticSpec;
use motifpart::harness::order::Ordering;
use motifpart::harness::pipeline::{Algorithm, PartitionConfig};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub partition: PartitionConfig,
    pub generate: SyntheticSpec,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub datasets: Vec<DatasetEntry>,
    pub orderings: Vec<Ordering>,
    pub ks: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub windows: Vec<usize>,
    pub seeds: Vec<u64>,
    pub threads: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            datasets: Vec::new(),
            orderings: vec![Ordering::Bfs],
            ks: vec![8],
            algorithms: Algorithm::ALL.to_vec(),
            windows: vec![100, 1_000, 10_000],
            seeds: vec![0],
            threads: 0,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub graph: PathBuf,
    pub workload: PathBuf,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// `name:graph:workload`
pub fn parse_dataset(s: &str) -> Result<DatasetEntry, String> {
    let parts: Vec<&str> = s.splitn(3, ':').collect();
    match parts.as_slice() {
        [name, graph, workload] if !name.is_empty() => Ok(DatasetEntry {
            name: name.to_string(),
            graph: graph.into(),
            workload: workload.into(),
        }),
        _ => Err(format!("expected NAME:GRAPH:WORKLOAD, got {s:?}")),
    }
}
