//! TOML problem files.
//!
//! ```toml
//! [model]
//! agents = 5
//! state_dim = 1
//! input_dim = 1
//! horizon = 5
//! a = 1.0
//! b = 1.0
//! process_noise = 1.0
//! measurement_noise = [1.0, 1.0, 1.0, 2.0, 1.0]
//! initial_cov = { identity = 5 }
//!
//! [cost]
//! q_stage = { identity = 5 }
//! r_stage = { identity = 5 }
//!
//! [topology]
//! kind = "path"
//!
//! [synthesis]
//! n_max = 50
//! seed = 7
//! ```
//!
//! Matrices are a scalar (1×1), `{ rows, cols, data }` in row-major order,
//! `{ diag = [...] }` or `{ identity = n, scale = s }`. Noise entries are one
//! matrix, a list (per agent, or per measured agent for `measurement_noise`)
//! or a nested list (`process_noise[agent][t]`, `measurement_noise[i][j]`,
//! `measurement_noise[i][j][t]`). Agent numbers in `edges` are 1-based.

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use crate::model::{
    validate_model, Dims, MasModel, MeasurementNoise, NetworkTopology, ProcessNoise, StopMode,
    SynthesisConfig, ValidatedInstance,
};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum MatrixSpec {
    Scalar(f64),
    Full { rows: usize, cols: usize, data: Vec<f64> },
    Diag { diag: Vec<f64> },
    Identity {
        identity: usize,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl MatrixSpec {
    pub fn build(&self, name: &str) -> Result<Mat> {
        match self {
            MatrixSpec::Scalar(v) => Ok(Mat::from_element(1, 1, *v)),
            MatrixSpec::Full { rows, cols, data } => {
                if data.len() != rows * cols {
                    return Err(Error::Config(format!(
                        "{name}: {} entries for a {rows}x{cols} matrix",
                        data.len()
                    )));
                }
                Ok(Mat::from_row_slice(*rows, *cols, data))
            }
            MatrixSpec::Diag { diag } => Ok(Mat::from_diagonal(&Vector::from_column_slice(diag))),
            MatrixSpec::Identity { identity, scale } => Ok(Mat::identity(*identity, *identity) * *scale),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum NoiseSpec {
    One(MatrixSpec),
    List(Vec<MatrixSpec>),
    Nested(Vec<Vec<MatrixSpec>>),
    Nested3(Vec<Vec<Vec<MatrixSpec>>>),
}

fn build_all(specs: &[MatrixSpec], name: &str) -> Result<Vec<Mat>> {
    specs
        .iter()
        .enumerate()
        .map(|(k, s)| s.build(&format!("{name}[{k}]")))
        .collect()
}

fn build_nested(specs: &[Vec<MatrixSpec>], name: &str) -> Result<Vec<Vec<Mat>>> {
    specs
        .iter()
        .enumerate()
        .map(|(k, row)| build_all(row, &format!("{name}[{k}]")))
        .collect()
}

impl NoiseSpec {
    fn process(&self) -> Result<ProcessNoise> {
        let name = "model.process_noise";
        Ok(match self {
            NoiseSpec::One(m) => ProcessNoise::Constant(m.build(name)?),
            NoiseSpec::List(v) => ProcessNoise::PerAgent(build_all(v, name)?),
            NoiseSpec::Nested(v) => ProcessNoise::PerAgentTime(build_nested(v, name)?),
            NoiseSpec::Nested3(_) => {
                return Err(Error::Config(format!("{name}: at most two levels of nesting")))
            }
        })
    }

    fn measurement(&self) -> Result<MeasurementNoise> {
        let name = "model.measurement_noise";
        Ok(match self {
            NoiseSpec::One(m) => MeasurementNoise::Constant(m.build(name)?),
            NoiseSpec::List(v) => MeasurementNoise::PerTarget(build_all(v, name)?),
            NoiseSpec::Nested(v) => MeasurementNoise::PerPair(build_nested(v, name)?),
            NoiseSpec::Nested3(v) => MeasurementNoise::PerPairTime(
                v.iter()
                    .enumerate()
                    .map(|(i, row)| build_nested(row, &format!("{name}[{i}]")))
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    agents: usize,
    state_dim: usize,
    input_dim: usize,
    horizon: usize,
    a: MatrixSpec,
    b: MatrixSpec,
    process_noise: NoiseSpec,
    measurement_noise: NoiseSpec,
    initial_mean: Option<Vec<f64>>,
    initial_cov: Option<MatrixSpec>,
    initial_joint_cov: Option<MatrixSpec>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostSection {
    q: Option<MatrixSpec>,
    q_stage: Option<MatrixSpec>,
    r: Option<MatrixSpec>,
    r_stage: Option<MatrixSpec>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologySection {
    kind: Option<String>,
    links: Option<usize>,
    edges: Option<Vec<[usize; 2]>>,
    #[serde(default = "yes")]
    symmetric: bool,
    #[serde(default = "yes")]
    self_measurement: bool,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthesisSection {
    eps_stop: Option<f64>,
    stop_mode: Option<String>,
    n_max: Option<usize>,
    ridge: Option<f64>,
    psd_clip: Option<f64>,
    mc_runs: Option<usize>,
    seed: Option<u64>,
    allow_singular_process_noise: Option<bool>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    model: ModelSection,
    cost: CostSection,
    topology: Option<TopologySection>,
    synthesis: Option<SynthesisSection>,
}

/// Named graph families accepted by `[topology] kind` and the CLI override.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TopologySpec {
    Complete,
    Isolated,
    Path,
    Ring,
    /// Ring first, then chords (see [`NetworkTopology::with_link_count`]).
    Links(usize),
    /// 1-based undirected links, self-measurement included.
    Edges(Vec<(usize, usize)>),
}

impl FromStr for TopologySpec {
    type Err = Error;

    /// `complete`, `isolated`, `path`, `ring`, `links:K` or `edges:1-2,2-3`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown topology '{s}'"));
        match s.trim() {
            "complete" => Ok(Self::Complete),
            "isolated" => Ok(Self::Isolated),
            "path" => Ok(Self::Path),
            "ring" => Ok(Self::Ring),
            other => {
                if let Some(k) = other.strip_prefix("links:") {
                    return k.trim().parse().map(Self::Links).map_err(|_| bad());
                }
                let list = other.strip_prefix("edges:").ok_or_else(bad)?;
                list.split(',')
                    .filter(|e| !e.trim().is_empty())
                    .map(|e| {
                        let (i, j) = e.split_once('-').ok_or_else(bad)?;
                        Ok((i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Self::Edges)
            }
        }
    }
}

impl TopologySpec {
    pub fn build(&self, agents: usize) -> Result<NetworkTopology> {
        match self {
            Self::Complete => Ok(NetworkTopology::complete(agents)),
            Self::Isolated => Ok(NetworkTopology::isolated(agents)),
            Self::Path => Ok(NetworkTopology::path(agents)),
            Self::Ring => Ok(NetworkTopology::ring(agents)),
            Self::Links(k) => NetworkTopology::with_link_count(agents, *k),
            Self::Edges(e) => NetworkTopology::from_links(agents, &zero_based(e)?, true, true),
        }
    }
}

fn zero_based(edges: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
    edges
        .iter()
        .map(|&(i, j)| {
            if i == 0 || j == 0 {
                Err(Error::Config(format!("edge ({i}, {j}): agents are numbered from 1")))
            } else {
                Ok((i - 1, j - 1))
            }
        })
        .collect()
}

fn topology(section: Option<&TopologySection>, agents: usize) -> Result<NetworkTopology> {
    let Some(s) = section else {
        return Ok(NetworkTopology::complete(agents));
    };
    let given = [s.kind.is_some(), s.links.is_some(), s.edges.is_some()];
    match given.iter().filter(|g| **g).count() {
        0 => return Err(Error::Config("missing field `topology.kind` (or `links`, `edges`)".into())),
        1 => {}
        _ => return Err(Error::Config("topology: give only one of `kind`, `links`, `edges`".into())),
    }
    if let Some(kind) = &s.kind {
        return kind.parse::<TopologySpec>()?.build(agents);
    }
    if let Some(k) = s.links {
        return NetworkTopology::with_link_count(agents, k);
    }
    let edges: Vec<_> = s.edges.as_deref().unwrap_or_default().iter().map(|e| (e[0], e[1])).collect();
    NetworkTopology::from_links(agents, &zero_based(&edges)?, s.symmetric, s.self_measurement)
}

fn weight(full: &Option<MatrixSpec>, stage: &Option<MatrixSpec>, name: &str) -> Result<(Mat, bool)> {
    match (full, stage) {
        (Some(m), None) => Ok((m.build(&format!("cost.{name}"))?, false)),
        (None, Some(m)) => Ok((m.build(&format!("cost.{name}_stage"))?, true)),
        (None, None) => Err(Error::Config(format!("missing field `cost.{name}` (or `cost.{name}_stage`)"))),
        (Some(_), Some(_)) => Err(Error::Config(format!("cost: give `{name}` or `{name}_stage`, not both"))),
    }
}

fn synthesis_config(dims: Dims, cost: &CostSection, s: &SynthesisSection) -> Result<SynthesisConfig> {
    let (q, q_is_stage) = weight(&cost.q, &cost.q_stage, "q")?;
    let (r, r_is_stage) = weight(&cost.r, &cost.r_stage, "r")?;
    let expand = |m: Mat, stage: bool, copies: usize| {
        if stage {
            crate::linalg::kron(&Mat::identity(copies, copies), &m)
        } else {
            m
        }
    };
    let mut cfg = SynthesisConfig::new(
        expand(q, q_is_stage, dims.horizon + 1),
        expand(r, r_is_stage, dims.horizon),
    );
    if let Some(v) = s.eps_stop {
        cfg.eps_stop = v;
    }
    if let Some(mode) = &s.stop_mode {
        cfg.stop_mode = match mode.as_str() {
            "relative" => StopMode::Relative,
            "absolute" => StopMode::Absolute,
            other => return Err(Error::Config(format!("synthesis.stop_mode: unknown mode '{other}'"))),
        };
    }
    if let Some(v) = s.n_max {
        cfg.n_max = v;
    }
    if let Some(v) = s.ridge {
        cfg.ridge = v;
    }
    if let Some(v) = s.psd_clip {
        cfg.psd_clip = v;
    }
    if let Some(v) = s.mc_runs {
        cfg.mc_runs = v;
    }
    if let Some(v) = s.seed {
        cfg.rng_seed = v;
    }
    if let Some(v) = s.allow_singular_process_noise {
        cfg.allow_singular_process_noise = v;
    }
    Ok(cfg)
}

/// Parse and validate a TOML problem description.
pub fn parse_config(text: &str) -> Result<ValidatedInstance> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
    let m = &file.model;
    let dims = Dims::new(m.agents, m.state_dim, m.input_dim, m.horizon);
    let nn = dims.mas_state();
    let model = MasModel {
        a: m.a.build("model.a")?,
        b: m.b.build("model.b")?,
        dims,
        process_noise: m.process_noise.process()?,
        measurement_noise: m.measurement_noise.measurement()?,
        initial_mean: m
            .initial_mean
            .as_ref()
            .map(|v| Vector::from_column_slice(v))
            .unwrap_or_else(|| Vector::zeros(nn)),
        initial_cov: match &m.initial_cov {
            Some(s) => s.build("model.initial_cov")?,
            None => Mat::identity(nn, nn),
        },
        initial_joint_cov: m
            .initial_joint_cov
            .as_ref()
            .map(|s| s.build("model.initial_joint_cov"))
            .transpose()?,
    };
    let topo = topology(file.topology.as_ref(), m.agents)?;
    let cfg = synthesis_config(dims, &file.cost, &file.synthesis.unwrap_or_default())?;
    validate_model(model, topo, cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ValidatedInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
