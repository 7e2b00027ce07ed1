//! Problem instance: agent dynamics, noise statistics, network topology and
//! synthesis settings, plus the validation that turns raw input into a
//! [`ValidatedInstance`].

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{self, block_diag, check_shape, kron, Mat, Vector};

/// Sizes shared by every stacked operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    pub agents: usize,
    pub state_dim: usize,
    pub input_dim: usize,
    pub horizon: usize,
}

impl Dims {
    pub fn new(agents: usize, state_dim: usize, input_dim: usize, horizon: usize) -> Self {
        Self {
            agents,
            state_dim,
            input_dim,
            horizon,
        }
    }

    /// `Nn`, the size of the full MAS state at one time step.
    pub fn mas_state(&self) -> usize {
        self.agents * self.state_dim
    }

    /// `Np`, the size of the full MAS input at one time step.
    pub fn mas_input(&self) -> usize {
        self.agents * self.input_dim
    }

    /// `NnN`, the size of the stacked estimation error of all agents.
    pub fn error_dim(&self) -> usize {
        self.agents * self.mas_state()
    }

    /// `Nn(T+1)`
    pub fn stacked_state(&self) -> usize {
        self.mas_state() * (self.horizon + 1)
    }

    /// `NnT`
    pub fn stacked_estimate(&self) -> usize {
        self.mas_state() * self.horizon
    }

    /// `NpT`
    pub fn stacked_input(&self) -> usize {
        self.mas_input() * self.horizon
    }

    pub fn with_horizon(self, horizon: usize) -> Self {
        Self { horizon, ..self }
    }
}

/// Per-agent process noise covariances `Θ_i(t)`.
#[derive(Clone, Debug, PartialEq)]
pub enum ProcessNoise {
    /// One matrix for every agent and time step.
    Constant(Mat),
    /// One matrix per agent, constant in time.
    PerAgent(Vec<Mat>),
    /// `[agent][t]`
    PerAgentTime(Vec<Vec<Mat>>),
}

impl ProcessNoise {
    pub fn get(&self, agent: usize, t: usize) -> Option<&Mat> {
        match self {
            ProcessNoise::Constant(m) => Some(m),
            ProcessNoise::PerAgent(v) => v.get(agent),
            ProcessNoise::PerAgentTime(v) => v.get(agent).and_then(|s| s.get(t)),
        }
    }
}

/// Measurement noise covariances `Ξ_ij(t)` of agent `i` measuring agent `j`.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasurementNoise {
    Constant(Mat),
    /// Indexed by the measured agent `j`; identical for every observer.
    PerTarget(Vec<Mat>),
    /// `[i][j]`
    PerPair(Vec<Vec<Mat>>),
    /// `[i][j][t]`
    PerPairTime(Vec<Vec<Vec<Mat>>>),
}

impl MeasurementNoise {
    pub fn get(&self, observer: usize, target: usize, t: usize) -> Option<&Mat> {
        match self {
            MeasurementNoise::Constant(m) => Some(m),
            MeasurementNoise::PerTarget(v) => v.get(target),
            MeasurementNoise::PerPair(v) => v.get(observer).and_then(|r| r.get(target)),
            MeasurementNoise::PerPairTime(v) => v
                .get(observer)
                .and_then(|r| r.get(target))
                .and_then(|s| s.get(t)),
        }
    }
}

/// Homogeneous linear stochastic multi-agent system over a finite horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct MasModel {
    pub a: Mat,
    pub b: Mat,
    pub dims: Dims,
    pub process_noise: ProcessNoise,
    pub measurement_noise: MeasurementNoise,
    /// `μ0`, length `Nn`.
    pub initial_mean: Vector,
    /// `Σ0`, `Nn × Nn`.
    pub initial_cov: Mat,
    /// Optional full `NnN × NnN` joint covariance of the agents' initial
    /// estimation errors. When absent every agent starts from the shared prior
    /// `μ0` and all blocks equal `Σ0`.
    pub initial_joint_cov: Option<Mat>,
}

/// Directed measurement graph: `(i, j)` means agent `i` measures agent `j`.
/// Agent indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkTopology {
    agents: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl NetworkTopology {
    pub fn new(agents: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if agents == 0 {
            return Err(Error::InvalidParameter("topology needs at least one agent".into()));
        }
        let edges: BTreeSet<_> = edges.into_iter().collect();
        if let Some(&(i, j)) = edges.iter().find(|(i, j)| *i >= agents || *j >= agents) {
            return Err(Error::DimensionMismatch(format!(
                "edge ({i}, {j}) out of range for {agents} agents"
            )));
        }
        Ok(Self { agents, edges })
    }

    /// Build from links, optionally mirrored and with every agent measuring itself.
    pub fn from_links(
        agents: usize,
        links: &[(usize, usize)],
        symmetric: bool,
        self_measurement: bool,
    ) -> Result<Self> {
        let mut edges = Vec::new();
        for &(i, j) in links {
            edges.push((i, j));
            if symmetric {
                edges.push((j, i));
            }
        }
        if self_measurement {
            edges.extend((0..agents).map(|i| (i, i)));
        }
        Self::new(agents, edges)
    }

    pub fn complete(agents: usize) -> Self {
        let links: Vec<_> = all_pairs(agents).collect();
        Self::from_links(agents, &links, true, true).expect("complete graph is valid")
    }

    /// Self-measurement only.
    pub fn isolated(agents: usize) -> Self {
        Self::from_links(agents, &[], true, true).expect("isolated graph is valid")
    }

    pub fn path(agents: usize) -> Self {
        let links: Vec<_> = (1..agents).map(|i| (i - 1, i)).collect();
        Self::from_links(agents, &links, true, true).expect("path graph is valid")
    }

    pub fn ring(agents: usize) -> Self {
        let links = match agents {
            0 | 1 => 0,
            2 => 1,
            n => n,
        };
        Self::with_link_count(agents, links).expect("ring graph is valid")
    }

    /// Undirected graph with `links` links, added in a fixed order: the ring
    /// first, then chords in lexicographic pair order.
    pub fn with_link_count(agents: usize, links: usize) -> Result<Self> {
        let order = ring_order(agents);
        if links > order.len() {
            return Err(Error::InvalidParameter(format!(
                "{agents} agents admit at most {} links",
                order.len()
            )));
        }
        Self::from_links(agents, &order[..links], true, true)
    }

    /// Same graph without the `(i, i)` self-measurement edges.
    pub fn without_self_measurement(&self) -> Self {
        Self {
            agents: self.agents,
            edges: self.edges.iter().copied().filter(|(i, j)| i != j).collect(),
        }
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// `c_ij`
    pub fn measures(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i, j))
    }

    /// Number of undirected links between distinct agents.
    pub fn links(&self) -> usize {
        all_pairs(self.agents)
            .filter(|&(i, j)| self.measures(i, j) || self.measures(j, i))
            .count()
    }

    pub fn is_complete(&self) -> bool {
        (0..self.agents).all(|i| (0..self.agents).all(|j| self.measures(i, j)))
    }

    /// `Ω_i`, ascending.
    pub fn neighborhood(&self, i: usize) -> Vec<usize> {
        (0..self.agents).filter(|&j| self.measures(i, j)).collect()
    }

    pub fn adjacency(&self) -> Mat {
        Mat::from_fn(self.agents, self.agents, |i, j| {
            if self.measures(i, j) {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn degree(&self) -> Mat {
        let adj = self.adjacency();
        Mat::from_diagonal(&Vector::from_iterator(
            self.agents,
            (0..self.agents).map(|i| adj.row(i).sum()),
        ))
    }

    pub fn laplacian(&self) -> Mat {
        self.degree() - self.adjacency()
    }

    /// `H_i = C_i`, extracting the state blocks of agent `i`'s neighbors.
    pub fn selector(&self, i: usize, state_dim: usize) -> Mat {
        build_selector(self, i, state_dim)
    }
}

fn all_pairs(agents: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..agents).flat_map(move |i| (i + 1..agents).map(move |j| (i, j)))
}

fn ring_order(agents: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<(usize, usize)> = Vec::new();
    if agents >= 2 {
        for i in 0..agents {
            let j = (i + 1) % agents;
            let link = (i.min(j), i.max(j));
            if !order.contains(&link) {
                order.push(link);
            }
        }
    }
    for pair in all_pairs(agents) {
        if !order.contains(&pair) {
            order.push(pair);
        }
    }
    order
}

/// Selector `H_i ∈ {0,1}^{n|Ω_i| × nN}` with one identity block per neighbor.
pub fn build_selector(topo: &NetworkTopology, i: usize, state_dim: usize) -> Mat {
    let hood = topo.neighborhood(i);
    let mut h = Mat::zeros(state_dim * hood.len(), state_dim * topo.agents());
    for (m, &j) in hood.iter().enumerate() {
        h.view_mut((m * state_dim, j * state_dim), (state_dim, state_dim))
            .fill_with_identity();
    }
    h
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum StopMode {
    /// `|ΔJ| ≤ eps · max(1, |J_prev|)`
    #[default]
    Relative,
    /// `|ΔJ| ≤ eps`
    Absolute,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisConfig {
    /// State weight, `Nn(T+1)` square.
    pub q: Mat,
    /// Input weight, `NpT` square.
    pub r: Mat,
    pub eps_stop: f64,
    pub stop_mode: StopMode,
    pub n_max: usize,
    pub ridge: f64,
    pub psd_clip: f64,
    pub mc_runs: usize,
    pub rng_seed: u64,
    /// Accept positive semidefinite process noise (e.g. the noise-free limit).
    pub allow_singular_process_noise: bool,
}

impl SynthesisConfig {
    pub const DEFAULT_EPS_STOP: f64 = 1e-6;
    pub const DEFAULT_N_MAX: usize = 50;
    pub const DEFAULT_RIDGE: f64 = 1e-12;
    pub const DEFAULT_PSD_CLIP: f64 = 1e-10;
    pub const DEFAULT_MC_RUNS: usize = 10_000;

    pub fn new(q: Mat, r: Mat) -> Self {
        Self {
            q,
            r,
            eps_stop: Self::DEFAULT_EPS_STOP,
            stop_mode: StopMode::Relative,
            n_max: Self::DEFAULT_N_MAX,
            ridge: Self::DEFAULT_RIDGE,
            psd_clip: Self::DEFAULT_PSD_CLIP,
            mc_runs: Self::DEFAULT_MC_RUNS,
            rng_seed: 0,
            allow_singular_process_noise: false,
        }
    }

    /// Time-invariant weights: `Q = I_{T+1} ⊗ q_stage`, `R = I_T ⊗ r_stage`.
    pub fn from_stage_weights(dims: Dims, q_stage: &Mat, r_stage: &Mat) -> Self {
        let q = kron(&Mat::identity(dims.horizon + 1, dims.horizon + 1), q_stage);
        let r = kron(&Mat::identity(dims.horizon, dims.horizon), r_stage);
        Self::new(q, r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationWarning {
    /// Agent measures nobody, not even itself.
    DisconnectedAgent(usize),
}

/// A model, topology and configuration that passed every consistency check.
/// Immutable; share freely across threads.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedInstance {
    model: MasModel,
    topology: NetworkTopology,
    config: SynthesisConfig,
    warnings: Vec<ValidationWarning>,
}

const SYMMETRY_TOL: f64 = 1e-9;

fn check_symmetric(m: &Mat, name: &str, time: Option<usize>) -> Result<()> {
    if !linalg::is_symmetric(m, SYMMETRY_TOL) {
        return Err(Error::NotSymmetric {
            matrix: name.to_string(),
            time,
        });
    }
    Ok(())
}

fn check_pd(m: &Mat, name: &str, time: Option<usize>, clip: f64) -> Result<()> {
    check_symmetric(m, name, time)?;
    let min = linalg::min_eigenvalue(m);
    if min <= clip {
        return Err(Error::NotPositiveDefinite {
            matrix: name.to_string(),
            time,
            min_eigenvalue: min,
        });
    }
    Ok(())
}

fn check_psd(m: &Mat, name: &str, time: Option<usize>, clip: f64) -> Result<()> {
    check_symmetric(m, name, time)?;
    let min = linalg::min_eigenvalue(m);
    if min < -clip {
        return Err(Error::NotPositiveSemidefinite {
            matrix: name.to_string(),
            time,
            min_eigenvalue: min,
        });
    }
    Ok(())
}

/// Check every dimensional and definiteness precondition.
pub fn validate_model(
    model: MasModel,
    topology: NetworkTopology,
    config: SynthesisConfig,
) -> Result<ValidatedInstance> {
    let d = model.dims;
    if d.agents == 0 || d.state_dim == 0 || d.input_dim == 0 || d.horizon == 0 {
        return Err(Error::DimensionMismatch(format!(
            "agents, state_dim, input_dim and horizon must be positive, got {d:?}"
        )));
    }
    let (n, p) = (d.state_dim, d.input_dim);
    check_shape(&model.a, n, n, "A")?;
    check_shape(&model.b, n, p, "B")?;
    if topology.agents() != d.agents {
        return Err(Error::DimensionMismatch(format!(
            "topology has {} agents, model has {}",
            topology.agents(),
            d.agents
        )));
    }
    let clip = config.psd_clip;
    if !(clip >= 0.0) {
        return Err(Error::InvalidParameter("psd_clip must be nonnegative".into()));
    }

    for i in 0..d.agents {
        for t in 0..d.horizon {
            let name = format!("Theta_{}", i + 1);
            let theta = model.process_noise.get(i, t).ok_or_else(|| {
                Error::DimensionMismatch(format!("{name} missing at t={t}"))
            })?;
            check_shape(theta, n, n, &name)?;
            if config.allow_singular_process_noise {
                check_psd(theta, &name, Some(t), clip)?;
            } else {
                check_pd(theta, &name, Some(t), clip)?;
            }
        }
    }
    for i in 0..d.agents {
        for j in topology.neighborhood(i) {
            for t in 0..=d.horizon {
                let name = format!("Xi_{}{}", i + 1, j + 1);
                let xi = model.measurement_noise.get(i, j, t).ok_or_else(|| {
                    Error::DimensionMismatch(format!("{name} missing at t={t}"))
                })?;
                check_shape(xi, n, n, &name)?;
                check_pd(xi, &name, Some(t), clip)?;
            }
        }
    }

    let nn = d.mas_state();
    if model.initial_mean.len() != nn {
        return Err(Error::DimensionMismatch(format!(
            "initial mean has length {}, expected {nn}",
            model.initial_mean.len()
        )));
    }
    check_shape(&model.initial_cov, nn, nn, "Sigma0")?;
    check_psd(&model.initial_cov, "Sigma0", None, clip)?;
    if let Some(joint) = &model.initial_joint_cov {
        check_shape(joint, d.error_dim(), d.error_dim(), "initial joint covariance")?;
        check_psd(joint, "initial joint covariance", None, clip)?;
        // Agent-specific prior offsets must have a valid covariance of their own.
        let offsets = joint - shared_prior(d.agents, &model.initial_cov);
        check_psd(&offsets, "initial joint covariance minus shared prior", None, clip)?;
    }

    check_shape(&config.q, d.stacked_state(), d.stacked_state(), "Q")?;
    check_psd(&config.q, "Q", None, clip)?;
    check_shape(&config.r, d.stacked_input(), d.stacked_input(), "R")?;
    check_pd(&config.r, "R", None, clip)?;
    if !(config.eps_stop > 0.0) {
        return Err(Error::InvalidParameter("eps_stop must be positive".into()));
    }
    if config.n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    if config.mc_runs == 0 {
        return Err(Error::InvalidParameter("mc_runs must be at least 1".into()));
    }
    if !(config.ridge >= 0.0) {
        return Err(Error::InvalidParameter("ridge must be nonnegative".into()));
    }

    let warnings = (0..d.agents)
        .filter(|&i| topology.neighborhood(i).is_empty())
        .map(ValidationWarning::DisconnectedAgent)
        .collect::<Vec<_>>();
    for w in &warnings {
        log::warn!("{w:?}");
    }

    Ok(ValidatedInstance {
        model,
        topology,
        config,
        warnings,
    })
}

fn shared_prior(agents: usize, sigma0: &Mat) -> Mat {
    kron(&Mat::from_element(agents, agents, 1.0), sigma0)
}

impl ValidatedInstance {
    pub fn model(&self) -> &MasModel {
        &self.model
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn config(&self) -> &SynthesisConfig {
        &self.config
    }

    pub fn warnings(&self) -> &[ValidationWarning] {
        &self.warnings
    }

    pub fn dims(&self) -> Dims {
        self.model.dims
    }

    pub fn into_parts(self) -> (MasModel, NetworkTopology, SynthesisConfig) {
        (self.model, self.topology, self.config)
    }

    /// Re-validate with a different topology.
    pub fn with_topology(&self, topology: NetworkTopology) -> Result<Self> {
        validate_model(self.model.clone(), topology, self.config.clone())
    }

    pub fn with_config(&self, config: SynthesisConfig) -> Result<Self> {
        validate_model(self.model.clone(), self.topology.clone(), config)
    }

    /// `Ã = I_N ⊗ A`
    pub fn a_tilde(&self) -> Mat {
        let n = self.dims().agents;
        kron(&Mat::identity(n, n), &self.model.a)
    }

    /// `B̃ = I_N ⊗ B`
    pub fn b_tilde(&self) -> Mat {
        let n = self.dims().agents;
        kron(&Mat::identity(n, n), &self.model.b)
    }

    /// `Θ_i(t)`; `None` past the end of a time-varying schedule.
    pub fn process_noise(&self, agent: usize, t: usize) -> Option<&Mat> {
        self.model.process_noise.get(agent, t)
    }

    /// `blkdg(Θ_1(t), …, Θ_N(t))`
    pub fn process_noise_block(&self, t: usize) -> Result<Mat> {
        let blocks = (0..self.dims().agents)
            .map(|i| {
                self.process_noise(i, t).cloned().ok_or_else(|| {
                    Error::DimensionMismatch(format!("Theta_{} missing at t={t}", i + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(block_diag(&blocks))
    }

    /// `Ξ_ij(t)`, or `None` when agent `i` does not measure agent `j`.
    pub fn measurement_noise(&self, observer: usize, target: usize, t: usize) -> Option<&Mat> {
        if !self.topology.measures(observer, target) {
            return None;
        }
        self.model.measurement_noise.get(observer, target, t)
    }

    /// `ⁱΞ(t) = blkdg(c_i1 Ξ_i1(t), …, c_iN Ξ_iN(t))`; unmeasured blocks are zero.
    pub fn agent_measurement_noise(&self, observer: usize, t: usize) -> Result<Mat> {
        let n = self.dims().state_dim;
        let blocks = (0..self.dims().agents)
            .map(|j| {
                if !self.topology.measures(observer, j) {
                    return Ok(Mat::zeros(n, n));
                }
                self.measurement_noise(observer, j, t).cloned().ok_or_else(|| {
                    Error::DimensionMismatch(format!(
                        "Xi_{}{} missing at t={t}",
                        observer + 1,
                        j + 1
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(block_diag(&blocks))
    }

    /// `Σ(0)` over all agents' initial errors.
    pub fn initial_joint_cov(&self) -> Mat {
        match &self.model.initial_joint_cov {
            Some(joint) => joint.clone(),
            None => shared_prior(self.dims().agents, &self.model.initial_cov),
        }
    }

    /// Covariance of the agent-specific prior offsets (zero under the shared prior).
    pub fn prior_offset_cov(&self) -> Mat {
        self.initial_joint_cov() - shared_prior(self.dims().agents, &self.model.initial_cov)
    }
}
