//! Distributed Kalman-like estimators designed offline for a fixed control law.
//!
//! Every agent `i` estimates the whole MAS state, `ⁱx̂(t) ∈ R^{Nn}`, from the
//! measurements of its neighborhood. Because the control law feeds each
//! agent's estimates back into the plant, the agents' errors are coupled
//! across agents and across time; the design propagates the full second
//! moments `E[e(t) e(s)ᵀ]` of the stacked error `e = [¹e; …; ᴺe]`.
//!
//! The error–disturbance cross moments `E[e(t) (w − μ_w)ᵀ]` are propagated
//! alongside so the control cost can be evaluated exactly.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::horizon::ControlLaw;
use crate::linalg::{block_diag, kron, ones, symmetrize, Mat, Vector};
use crate::model::{Dims, ValidatedInstance};

/// `Λ_t` and `Ψ_kt` of the predicted-error recursion
/// `e⁻(t+1) = Λ_t e(t) + Σ_{k<t} Ψ_kt e(k) + 1_N ⊗ w̃(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoopErrorOperators {
    dims: Dims,
    /// `lambda[t]`, `t = 0..T−1`
    pub lambda: Vec<Mat>,
    /// `psi[t][k]` for `k < t`
    pub psi: Vec<Vec<Mat>>,
}

impl ClosedLoopErrorOperators {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Coefficient of `e(k)` in `e⁻(t+1)`.
    pub fn coefficient(&self, t: usize, k: usize) -> &Mat {
        if k == t {
            &self.lambda[t]
        } else {
            &self.psi[t][k]
        }
    }
}

fn check_law_dims(law: &ControlLaw, inst: &ValidatedInstance) -> Result<Dims> {
    let (ld, id) = (law.dims(), inst.dims());
    if (ld.agents, ld.state_dim, ld.input_dim) != (id.agents, id.state_dim, id.input_dim) {
        return Err(Error::DimensionMismatch(format!(
            "control law sized for {ld:?}, instance is {id:?}"
        )));
    }
    Ok(ld)
}

/// `B̄ M̃ F̃_kt = [B̃ M_1ᵀM_1 F_kt, …, B̃ M_NᵀM_N F_kt]`, `Nn × NnN`.
fn estimate_coupling(b_tilde: &Mat, block: &Mat, d: Dims) -> Mat {
    let nn = d.mas_state();
    let mut out = Mat::zeros(nn, d.error_dim());
    for j in 0..d.agents {
        let sel = crate::horizon::input_selector(d, j);
        let part = b_tilde * sel.transpose() * &sel * block;
        out.view_mut((0, j * nn), (nn, nn)).copy_from(&part);
    }
    out
}

pub fn build_error_operators(
    law: &ControlLaw,
    inst: &ValidatedInstance,
) -> Result<ClosedLoopErrorOperators> {
    let d = check_law_dims(law, inst)?;
    let (a, b) = (inst.a_tilde(), inst.b_tilde());
    let eye_n = Mat::identity(d.agents, d.agents);
    let one_n = ones(d.agents);
    let mut lambda = Vec::with_capacity(d.horizon);
    let mut psi = Vec::with_capacity(d.horizon);
    for t in 0..d.horizon {
        let ftt = law.block(t, t);
        lambda.push(kron(&eye_n, &(&a + &b * &ftt)) - kron(&one_n, &estimate_coupling(&b, &ftt, d)));
        let row = (0..t)
            .map(|k| {
                let fkt = law.block(t, k);
                kron(&eye_n, &(&b * &fkt)) - kron(&one_n, &estimate_coupling(&b, &fkt, d))
            })
            .collect();
        psi.push(row);
    }
    Ok(ClosedLoopErrorOperators { dims: d, lambda, psi })
}

/// `Σ_w̃(t) = (1_N 1_Nᵀ) ⊗ blkdg(Θ_1(t), …, Θ_N(t))`
pub fn lifted_process_noise(inst: &ValidatedInstance, t: usize) -> Result<Mat> {
    let n = inst.dims().agents;
    Ok(kron(&Mat::from_element(n, n, 1.0), &inst.process_noise_block(t)?))
}

/// Second moments of the stacked estimation errors over the horizon.
///
/// Only blocks with `s ≤ t` are stored; [`JointErrorCovariance::cross`]
/// completes the rest by symmetry.
#[derive(Clone, Debug, PartialEq)]
pub struct JointErrorCovariance {
    dims: Dims,
    /// `blocks[t][s] = E[e(t) e(s)ᵀ]`, `s ≤ t ≤ T`
    blocks: Vec<Vec<Mat>>,
    /// `predicted[t] = Σ⁻(t)` for `t ≥ 1`; `predicted[0] = Σ(0)`.
    predicted: Vec<Mat>,
    /// `E[e(t) (w − μ_w)ᵀ]`, `NnN × Nn(T+1)`
    disturbance: Vec<Mat>,
}

impl JointErrorCovariance {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// `Σ(t) = E[e(t) e(t)ᵀ]`
    pub fn joint(&self, t: usize) -> &Mat {
        &self.blocks[t][t]
    }

    /// `E[e(t) e(s)ᵀ]`
    pub fn cross(&self, t: usize, s: usize) -> Mat {
        if s <= t {
            self.blocks[t][s].clone()
        } else {
            self.blocks[s][t].transpose()
        }
    }

    /// `Σ⁻(t)`, `t ≥ 1`.
    pub fn predicted(&self, t: usize) -> &Mat {
        &self.predicted[t]
    }

    /// `E[ⁱe(t) ʲe(s)ᵀ]`
    pub fn agent_cross(&self, i: usize, j: usize, t: usize, s: usize) -> Mat {
        let nn = self.dims.mas_state();
        if s <= t {
            self.blocks[t][s].view((i * nn, j * nn), (nn, nn)).into_owned()
        } else {
            self.blocks[s][t].view((j * nn, i * nn), (nn, nn)).transpose()
        }
    }

    /// `ⁱΣ(t)`
    pub fn agent(&self, i: usize, t: usize) -> Mat {
        self.agent_cross(i, i, t, t)
    }

    /// `ⁱʲΣ(t)`
    pub fn pair(&self, i: usize, j: usize, t: usize) -> Mat {
        self.agent_cross(i, j, t, t)
    }

    /// `ⁱΣ⁻(t)`
    pub fn agent_predicted(&self, i: usize, t: usize) -> Mat {
        let nn = self.dims.mas_state();
        self.predicted[t].view((i * nn, i * nn), (nn, nn)).into_owned()
    }

    /// `E[e(t) (w − μ_w)ᵀ]`
    pub fn disturbance_cross(&self, t: usize) -> &Mat {
        &self.disturbance[t]
    }
}

/// Per-agent gains `L_i(t)`, `t = 1..T`, with the quantities each agent
/// stores onboard.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorGains {
    dims: Dims,
    selectors: Vec<Mat>,
    /// `gains[i][t−1] = L_i(t)`
    gains: Vec<Vec<Mat>>,
    /// `innovations[i][t−1] = S_i(t)`
    innovations: Vec<Vec<Mat>>,
    /// `covariances[i][t] = ⁱΣ(t)`, `t = 0..T`
    covariances: Vec<Vec<Mat>>,
}

impl EstimatorGains {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn horizon(&self) -> usize {
        self.dims.horizon
    }

    /// `H_i`
    pub fn selector(&self, i: usize) -> &Mat {
        &self.selectors[i]
    }

    /// `L_i(t)` for `1 ≤ t ≤ T`.
    pub fn gain(&self, i: usize, t: usize) -> &Mat {
        assert!(t >= 1, "gains start at t = 1");
        &self.gains[i][t - 1]
    }

    /// `S_i(t)` for `1 ≤ t ≤ T`.
    pub fn innovation(&self, i: usize, t: usize) -> &Mat {
        assert!(t >= 1, "innovations start at t = 1");
        &self.innovations[i][t - 1]
    }

    /// Agent `i`'s own copy of `ⁱΣ(t)`.
    pub fn agent_covariance(&self, i: usize, t: usize) -> &Mat {
        &self.covariances[i][t]
    }

    /// `L̃(t) = blkdg(L_1(t) H_1, …, L_N(t) H_N)`
    pub fn lifted(&self, t: usize) -> Mat {
        let blocks: Vec<Mat> = (0..self.dims.agents)
            .map(|i| self.gain(i, t) * &self.selectors[i])
            .collect();
        block_diag(&blocks)
    }

    /// Rebuild from raw parts, e.g. when loading a stored bundle.
    pub fn from_parts(
        dims: Dims,
        selectors: Vec<Mat>,
        gains: Vec<Vec<Mat>>,
        covariances: Vec<Vec<Mat>>,
    ) -> Result<Self> {
        let n = dims.agents;
        if selectors.len() != n || gains.len() != n || covariances.len() != n {
            return Err(Error::DimensionMismatch("gain set must cover every agent".into()));
        }
        for i in 0..n {
            if gains[i].len() != dims.horizon || covariances[i].len() != dims.horizon + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "agent {} gain schedule does not span the horizon",
                    i + 1
                )));
            }
            let h = &selectors[i];
            for (k, l) in gains[i].iter().enumerate() {
                if l.nrows() != dims.mas_state() || l.ncols() != h.nrows() {
                    return Err(Error::DimensionMismatch(format!(
                        "L_{}({}) is {}x{}, expected {}x{}",
                        i + 1,
                        k + 1,
                        l.nrows(),
                        l.ncols(),
                        dims.mas_state(),
                        h.nrows()
                    )));
                }
            }
        }
        Ok(Self {
            dims,
            selectors,
            gains,
            innovations: Vec::new(),
            covariances,
        })
    }
}

/// Posterior covariance of one agent for an arbitrary gain (Joseph form).
pub fn agent_posterior(prior: &Mat, selector: &Mat, noise: &Mat, gain: &Mat) -> Mat {
    let lh = gain * selector;
    let g = Mat::identity(prior.nrows(), prior.nrows()) - &lh;
    symmetrize(&(&g * prior * g.transpose() + &lh * noise * lh.transpose()))
}

struct AgentStep {
    gain: Mat,
    innovation: Mat,
    noise_term: Mat,
}

fn agent_gain(
    inst: &ValidatedInstance,
    agent: usize,
    t: usize,
    prior: &Mat,
    selector: &Mat,
) -> Result<AgentStep> {
    let noise = inst.agent_measurement_noise(agent, t)?;
    let s = symmetrize(&(selector * (prior + &noise) * selector.transpose()));
    if s.nrows() == 0 {
        return Ok(AgentStep {
            gain: Mat::zeros(prior.nrows(), 0),
            innovation: s,
            noise_term: Mat::zeros(prior.nrows(), prior.nrows()),
        });
    }
    let clip = inst.config().psd_clip;
    if crate::linalg::min_eigenvalue(&s) <= clip {
        return Err(Error::SingularInnovation { agent, t });
    }
    let chol = s
        .clone()
        .cholesky()
        .ok_or(Error::SingularInnovation { agent, t })?;
    // L = P Hᵀ S⁻¹, solved as Lᵀ = S⁻¹ H P.
    let gain = chol.solve(&(selector * prior)).transpose();
    let lh = &gain * selector;
    let noise_term = &lh * &noise * lh.transpose();
    Ok(AgentStep {
        gain,
        innovation: s,
        noise_term,
    })
}

/// Design all agents' gains against `law` and propagate the joint error moments.
///
/// The horizon is taken from `law`.
pub fn design_estimator(
    law: &ControlLaw,
    inst: &ValidatedInstance,
) -> Result<(EstimatorGains, JointErrorCovariance)> {
    let d = check_law_dims(law, inst)?;
    let ops = build_error_operators(law, inst)?;
    let (nn, ne, horizon) = (d.mas_state(), d.error_dim(), d.horizon);
    let n_w = d.stacked_state();
    let eye_e = Mat::identity(ne, ne);

    let selectors: Vec<Mat> = (0..d.agents)
        .map(|i| inst.topology().selector(i, d.state_dim))
        .collect();

    let sigma0 = symmetrize(&inst.initial_joint_cov());
    let mut blocks: Vec<Vec<Mat>> = vec![vec![sigma0.clone()]];
    let mut predicted = vec![sigma0];
    let mut disturbance = Vec::with_capacity(horizon + 1);
    {
        // e(0) = 1_N ⊗ (x(0) − μ0) + agent offsets independent of w.
        let mut dw = Mat::zeros(ne, n_w);
        for i in 0..d.agents {
            dw.view_mut((i * nn, 0), (nn, nn))
                .copy_from(&inst.model().initial_cov);
        }
        disturbance.push(dw);
    }
    let mut gains = vec![Vec::with_capacity(horizon); d.agents];
    let mut innovations = vec![Vec::with_capacity(horizon); d.agents];

    for t in 0..horizon {
        // x_s = E[(e⁻(t+1) − 1⊗w̃(t)) e(s)ᵀ] for s ≤ t
        let x: Vec<Mat> = (0..=t)
            .map(|s| {
                (0..=t).fold(Mat::zeros(ne, ne), |acc, k| {
                    let cross = if s <= k { &blocks[k][s] } else { &blocks[s][k].transpose() };
                    acc + ops.coefficient(t, k) * cross
                })
            })
            .collect();
        let mut prior = lifted_process_noise(inst, t)?;
        for (m, xm) in x.iter().enumerate() {
            prior += xm * ops.coefficient(t, m).transpose();
        }
        let prior = symmetrize(&prior);

        let mut xw = (0..=t).fold(Mat::zeros(ne, n_w), |acc, k| {
            acc + ops.coefficient(t, k) * &disturbance[k]
        });
        let theta = inst.process_noise_block(t)?;
        for i in 0..d.agents {
            let mut v = xw.view_mut((i * nn, (t + 1) * nn), (nn, nn));
            v += &theta;
        }

        let steps = (0..d.agents)
            .into_par_iter()
            .map(|i| {
                let p = prior.view((i * nn, i * nn), (nn, nn)).into_owned();
                agent_gain(inst, i, t + 1, &p, &selectors[i])
            })
            .collect::<Result<Vec<_>>>()?;

        let lifted = block_diag(
            &steps
                .iter()
                .zip(&selectors)
                .map(|(s, h)| &s.gain * h)
                .collect::<Vec<_>>(),
        );
        let g = &eye_e - &lifted;
        let noise_term = block_diag(&steps.iter().map(|s| s.noise_term.clone()).collect::<Vec<_>>());
        let post = symmetrize(&(&g * &prior * g.transpose() + noise_term));

        let mut row: Vec<Mat> = x.iter().map(|xs| &g * xs).collect();
        row.push(post);
        blocks.push(row);
        predicted.push(prior);
        xw = &g * xw;
        disturbance.push(xw);
        for (i, s) in steps.into_iter().enumerate() {
            gains[i].push(s.gain);
            innovations[i].push(s.innovation);
        }
    }

    let covariances = (0..d.agents)
        .map(|i| {
            (0..=horizon)
                .map(|t| blocks[t][t].view((i * nn, i * nn), (nn, nn)).into_owned())
                .collect()
        })
        .collect();

    Ok((
        EstimatorGains {
            dims: d,
            selectors,
            gains,
            innovations,
            covariances,
        },
        JointErrorCovariance {
            dims: d,
            blocks,
            predicted,
            disturbance,
        },
    ))
}

/// Horizon-stacked covariances `Σ_ij = E[ⁱe ʲeᵀ]` and `E[ⁱe (w − μ_w)ᵀ]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizonCovariances {
    dims: Dims,
    /// `pairs[i][j] = Σ_ij`, `Nn(T+1)` square.
    pairs: Vec<Vec<Mat>>,
    /// `disturbance[i] = E[ⁱe (w − μ_w)ᵀ]`
    disturbance: Vec<Mat>,
}

impl HorizonCovariances {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// `Σ_i`
    pub fn agent(&self, i: usize) -> &Mat {
        &self.pairs[i][i]
    }

    /// `Σ_ij`
    pub fn pair(&self, i: usize, j: usize) -> &Mat {
        &self.pairs[i][j]
    }

    pub fn disturbance(&self, i: usize) -> &Mat {
        &self.disturbance[i]
    }

    /// Covariances of an estimator-free loop: zero errors.
    pub fn zero(dims: Dims) -> Self {
        let m = dims.stacked_state();
        Self {
            dims,
            pairs: vec![vec![Mat::zeros(m, m); dims.agents]; dims.agents],
            disturbance: vec![Mat::zeros(m, m); dims.agents],
        }
    }
}

pub fn extract_horizon_covariances(cov: &JointErrorCovariance) -> HorizonCovariances {
    let d = cov.dims();
    let (nn, horizon) = (d.mas_state(), d.horizon);
    let m = d.stacked_state();
    let mut pairs = vec![vec![Mat::zeros(m, m); d.agents]; d.agents];
    for t in 0..=horizon {
        for s in 0..=t {
            let block = &cov.blocks[t][s];
            for i in 0..d.agents {
                for j in 0..d.agents {
                    let b = block.view((i * nn, j * nn), (nn, nn));
                    pairs[i][j].view_mut((t * nn, s * nn), (nn, nn)).copy_from(&b);
                    if s != t {
                        pairs[j][i]
                            .view_mut((s * nn, t * nn), (nn, nn))
                            .copy_from(&b.transpose());
                    }
                }
            }
        }
    }
    let disturbance = (0..d.agents)
        .map(|i| {
            let mut out = Mat::zeros(m, m);
            for t in 0..=horizon {
                out.view_mut((t * nn, 0), (nn, m))
                    .copy_from(&cov.disturbance[t].view((i * nn, 0), (nn, m)));
            }
            out
        })
        .collect();
    HorizonCovariances {
        dims: d,
        pairs,
        disturbance,
    }
}

/// Agent `i`'s onboard filter state.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentBelief {
    pub agent: usize,
    /// `ⁱx̂(0..=t)`; the control law consumes the whole history.
    pub history: Vec<Vector>,
    /// `ⁱx̂⁻(t)` of the latest step, absent at `t = 0`.
    pub predicted: Option<Vector>,
    /// Local copy of `ⁱΣ(t)`.
    pub covariance: Mat,
}

impl AgentBelief {
    pub fn new(agent: usize, initial_estimate: Vector, initial_cov: Mat) -> Self {
        Self {
            agent,
            history: vec![initial_estimate],
            predicted: None,
            covariance: initial_cov,
        }
    }

    pub fn time(&self) -> usize {
        self.history.len() - 1
    }

    pub fn estimate(&self) -> &Vector {
        self.history.last().expect("belief history is never empty")
    }
}

/// `u(t)` as agent `i` believes the whole MAS applies it:
/// `Σ_{k≤t} F_kt ⁱx̂(k)`, `Np`-vector.
pub fn believed_input(belief: &AgentBelief, law: &ControlLaw) -> Vector {
    let t = belief.time();
    let np = law.dims().mas_input();
    let mut u = Vector::zeros(np);
    for (k, est) in belief.history.iter().enumerate().take(t + 1) {
        u += law.block(t, k) * est;
    }
    u
}

/// One filter step: predict with the agent's own estimate history, then
/// correct with the neighbors' measurements `z_ij(t+1)`.
///
/// `measurements[j]` is `x_j(t+1) + v_ij(t+1)`; entries of agents outside
/// `Ω_i` are ignored.
pub fn online_update(
    belief: &AgentBelief,
    inst: &ValidatedInstance,
    gains: &EstimatorGains,
    law: &ControlLaw,
    measurements: &[Option<Vector>],
) -> Result<AgentBelief> {
    let i = belief.agent;
    let t = belief.time();
    let n = inst.dims().state_dim;
    let predicted = inst.a_tilde() * belief.estimate() + inst.b_tilde() * believed_input(belief, law);

    let hood = inst.topology().neighborhood(i);
    let mut z = Vector::zeros(n * hood.len());
    for (m, &j) in hood.iter().enumerate() {
        let zj = measurements
            .get(j)
            .and_then(|v| v.as_ref())
            .ok_or(Error::MissingMeasurement { agent: i, neighbor: j })?;
        if zj.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "measurement of agent {} has length {}, expected {n}",
                j + 1,
                zj.len()
            )));
        }
        z.rows_mut(m * n, n).copy_from(zj);
    }
    let innovation = z - gains.selector(i) * &predicted;
    let estimate = &predicted + gains.gain(i, t + 1) * innovation;

    let mut next = belief.clone();
    next.history.push(estimate);
    next.predicted = Some(predicted);
    next.covariance = gains.agent_covariance(i, t + 1).clone();
    Ok(next)
}
