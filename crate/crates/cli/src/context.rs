use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use potgraph::generate::{generate, Family};
use potgraph::graph::{Measure, VertexId, WeightedGraph};
use potgraph::io::{parse_edge_list, parse_measure};
use potgraph::linalg::SolverConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::GlobalArgs;

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Where the graph of a run came from.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphSource {
    File { path: PathBuf },
    Generated { family: Family, size: usize },
}

/// Resolved inputs of one command; every file read is hashed.
pub struct Context<'a> {
    pub global: &'a GlobalArgs,
    pub inputs: BTreeMap<String, InputDigest>,
}

impl<'a> Context<'a> {
    pub fn new(global: &'a GlobalArgs) -> Self {
        Self {
            global,
            inputs: BTreeMap::new(),
        }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            rel_tol: self.global.tol_solver,
            ..SolverConfig::default()
        }
    }

    pub fn read(&mut self, label: &str, path: &Path) -> Result<String> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.insert(
            label.to_string(),
            InputDigest {
                path: path.to_path_buf(),
                sha256: sha256_hex(&bytes),
            },
        );
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    pub fn family(&self) -> Result<Option<Family>> {
        self.global
            .generator
            .as_deref()
            .map(|s| s.parse::<Family>().map_err(anyhow::Error::from))
            .transpose()
    }

    pub fn max_radius(&self) -> Result<usize> {
        self.global
            .radii
            .iter()
            .copied()
            .max()
            .ok_or_else(|| anyhow!("--radii is required with --gen"))
    }

    /// Graph from `--graph`, or from `--gen` at `size` (default: largest radius).
    pub fn graph(&mut self, size: Option<usize>) -> Result<(WeightedGraph<f64>, GraphSource)> {
        match (&self.global.graph, self.family()?) {
            (Some(_), Some(_)) => bail!("--graph and --gen are mutually exclusive"),
            (Some(path), None) => {
                let path = path.clone();
                let text = self.read("graph", &path)?;
                let g = parse_edge_list(&text)?;
                Ok((g, GraphSource::File { path }))
            }
            (None, Some(family)) => {
                let size = match size {
                    Some(s) => s,
                    None => self.max_radius()?,
                };
                let g = generate(family.at(size), 1.0)?;
                Ok((g, GraphSource::Generated { family, size }))
            }
            (None, None) => bail!("a graph source is required: --graph PATH or --gen FAMILY"),
        }
    }

    /// The measure named by `--m`; `msigma` uses the supplied load vector.
    pub fn measure(&mut self, graph: &WeightedGraph<f64>, msigma: impl FnOnce() -> Vec<f64>) -> Result<Measure<f64>> {
        let spec = self.global.m.clone();
        match spec.as_str() {
            "unit" => Ok(Measure::unit(graph.len())),
            "msigma" => Ok(Measure::new(msigma())?),
            other => match other.strip_prefix("file:") {
                Some(path) => {
                    let text = self.read("measure", Path::new(path))?;
                    Ok(parse_measure(&text, graph)?)
                }
                None => bail!("unknown measure {other:?}; expected unit, file:PATH or msigma"),
            },
        }
    }
}

pub fn origin_or_first(graph: &WeightedGraph<f64>, origin: Option<u64>) -> Result<VertexId> {
    let id = match origin {
        Some(o) => o,
        None => *graph.ids().first().ok_or_else(|| anyhow!("graph has no vertices"))?,
    };
    graph.require(id)?;
    Ok(id)
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
