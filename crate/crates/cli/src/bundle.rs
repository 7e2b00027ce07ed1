//! Result bundles: a directory of row-major matrix text files plus
//! `bundle.json` listing dimensions, topology and a hash of every file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use distctl::{ControlLaw, Dims, EstimatorGains, Mat, SynthesisResult, ValidatedInstance};
use serde::{Deserialize, Serialize};

use crate::output::sha256_hex;

/// `rows cols` on the first line, then one row per line. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn format_matrix(m: &Mat) -> String {
    let mut s = format!("{} {}\n", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:?}", m[(r, c)])).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

pub fn parse_matrix(text: &str) -> Result<Mat> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| anyhow!("empty matrix file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .context("bad matrix header")?;
    let [rows, cols] = dims[..] else {
        bail!("matrix header must be `rows cols`, got `{header}`");
    };
    let data: Vec<f64> = lines
        .flat_map(str::split_whitespace)
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .context("bad matrix entry")?;
    ensure!(data.len() == rows * cols, "{} entries for a {rows}x{cols} matrix", data.len());
    Ok(Mat::from_row_slice(rows, cols, &data))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BundleManifest {
    pub agents: usize,
    pub state_dim: usize,
    pub input_dim: usize,
    pub horizon: usize,
    /// 1-based `(observer, measured)` pairs.
    pub edges: Vec<(usize, usize)>,
    pub cost: f64,
    pub best_iteration: usize,
    pub iterations: usize,
    pub files: BTreeMap<String, String>,
}

impl BundleManifest {
    pub fn dims(&self) -> Dims {
        Dims::new(self.agents, self.state_dim, self.input_dim, self.horizon)
    }
}

pub struct Bundle {
    pub manifest: BundleManifest,
    pub law: ControlLaw,
    pub gains: EstimatorGains,
}

fn gain_file(i: usize, t: usize) -> String {
    format!("gains/L_{}_{t}.txt", i + 1)
}

fn cov_file(i: usize, t: usize) -> String {
    format!("gains/Sigma_{}_{t}.txt", i + 1)
}

fn edges(inst: &ValidatedInstance) -> Vec<(usize, usize)> {
    inst.topology().edges().map(|(i, j)| (i + 1, j + 1)).collect()
}

/// Write the selected law and gains; returns every written path.
pub fn write_bundle(dir: &Path, inst: &ValidatedInstance, res: &SynthesisResult) -> Result<Vec<PathBuf>> {
    let d = inst.dims();
    fs::create_dir_all(dir.join("gains")).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut files = BTreeMap::new();
    let mut written = Vec::new();
    let mut put = |name: String, m: &Mat| -> Result<()> {
        let text = format_matrix(m);
        let path = dir.join(&name);
        fs::write(&path, &text).with_context(|| format!("cannot write {}", path.display()))?;
        files.insert(name, sha256_hex(text.as_bytes()));
        written.push(path);
        Ok(())
    };
    put("law.txt".into(), res.law.matrix())?;
    for i in 0..d.agents {
        for t in 1..=d.horizon {
            put(gain_file(i, t), res.gains.gain(i, t))?;
        }
        for t in 0..=d.horizon {
            put(cov_file(i, t), res.gains.agent_covariance(i, t))?;
        }
    }
    let manifest = BundleManifest {
        agents: d.agents,
        state_dim: d.state_dim,
        input_dim: d.input_dim,
        horizon: d.horizon,
        edges: edges(inst),
        cost: res.cost.total,
        best_iteration: res.best_iteration,
        iterations: res.history.len(),
        files,
    };
    let path = dir.join("bundle.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    written.push(path);
    Ok(written)
}

/// Load a bundle written for `inst`; hashes, dimensions and topology must match.
pub fn read_bundle(dir: &Path, inst: &ValidatedInstance) -> Result<Bundle> {
    let path = dir.join("bundle.json");
    let text = fs::read_to_string(&path).with_context(|| format!("missing bundle: cannot read {}", path.display()))?;
    let manifest: BundleManifest = serde_json::from_str(&text).with_context(|| format!("malformed {}", path.display()))?;
    let d = manifest.dims();
    ensure!(d == inst.dims(), "bundle was built for {d:?}, config describes {:?}", inst.dims());
    ensure!(manifest.edges == edges(inst), "bundle topology differs from the configured topology");

    let read = |name: String| -> Result<Mat> {
        let path = dir.join(&name);
        let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        let expected = manifest.files.get(&name).ok_or_else(|| anyhow!("{name} is not listed in bundle.json"))?;
        ensure!(&sha256_hex(text.as_bytes()) == expected, "{} does not match its recorded hash", path.display());
        parse_matrix(&text).with_context(|| format!("in {}", path.display()))
    };
    let law = ControlLaw::new(read("law.txt".into())?, d)?;
    let mut gains = Vec::new();
    let mut covs = Vec::new();
    for i in 0..d.agents {
        gains.push((1..=d.horizon).map(|t| read(gain_file(i, t))).collect::<Result<Vec<_>>>()?);
        covs.push((0..=d.horizon).map(|t| read(cov_file(i, t))).collect::<Result<Vec<_>>>()?);
    }
    let selectors = (0..d.agents).map(|i| inst.topology().selector(i, d.state_dim)).collect();
    let gains = EstimatorGains::from_parts(d, selectors, gains, covs)?;
    Ok(Bundle { manifest, law, gains })
}
