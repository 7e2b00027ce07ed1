//! Closed-loop simulation of the deployed controllers, Monte Carlo batches,
//! baselines and topology sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::control::{build_agent_subproblem, solve_agent_subproblem, AgentSubproblem, CostReport, LoopMaps};
use crate::error::{Error, Result};
use crate::estimator::{believed_input, online_update, AgentBelief, EstimatorGains};
use crate::horizon::{agent_projector, apply_mask, build_horizon, h_map, input_selector, ControlLaw, HorizonOperators};
use crate::linalg::{block_diag, psd_factor, trace_product, Mat, Vector};
use crate::model::{NetworkTopology, ValidatedInstance};
use crate::synthesis::{run_synthesis, SynthesisResult};

/// How the agents turn information into inputs.
#[derive(Clone, Debug, PartialEq)]
pub enum Controller {
    /// Each agent runs its filter and applies its rows of `F` to its own
    /// estimate history.
    EstimateFeedback { law: ControlLaw, gains: EstimatorGains },
    /// Each agent applies its rows of `F` to its raw neighbor measurements,
    /// from `t = 0`. `F` must respect the topology.
    MeasurementFeedback { law: ControlLaw },
}

impl Controller {
    pub fn law(&self) -> &ControlLaw {
        match self {
            Controller::EstimateFeedback { law, .. } | Controller::MeasurementFeedback { law } => law,
        }
    }
}

/// One draw of every random quantity in a closed-loop run.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRealization {
    /// `x(0)`
    pub x0: Vector,
    /// `w̃(t)`, `t = 0..T−1`
    pub process: Vec<Vector>,
    /// `measurement[t][i]`: agent `i`'s noise on every agent's state at time
    /// `t = 0..T`, stacked to length `Nn`; zero on unmeasured blocks.
    pub measurement: Vec<Vec<Vector>>,
    /// Agent-specific prior offsets `δ_i`: agent `i` starts from `μ0 − δ_i`.
    pub prior_offsets: Vec<Vector>,
}

impl NoiseRealization {
    /// All noise zero and `x(0) = μ0`.
    pub fn zeros(inst: &ValidatedInstance, horizon: usize) -> Self {
        let d = inst.dims();
        let nn = d.mas_state();
        Self {
            x0: inst.model().initial_mean.clone(),
            process: vec![Vector::zeros(nn); horizon],
            measurement: vec![vec![Vector::zeros(nn); d.agents]; horizon + 1],
            prior_offsets: vec![Vector::zeros(nn); d.agents],
        }
    }

    pub fn horizon(&self) -> usize {
        self.process.len()
    }
}

/// Precomputed square-root factors for drawing [`NoiseRealization`]s.
#[derive(Clone, Debug)]
pub struct NoiseSampler {
    mean: Vector,
    initial: Mat,
    offsets: Mat,
    process: Vec<Mat>,
    measurement: Vec<Vec<Mat>>,
    agents: usize,
}

impl NoiseSampler {
    pub fn new(inst: &ValidatedInstance, horizon: usize) -> Result<Self> {
        let d = inst.dims();
        let process = (0..horizon)
            .map(|t| inst.process_noise_block(t).map(|m| psd_factor(&m)))
            .collect::<Result<Vec<_>>>()?;
        let measurement = (0..=horizon)
            .map(|t| {
                (0..d.agents)
                    .map(|i| inst.agent_measurement_noise(i, t).map(|m| psd_factor(&m)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            mean: inst.model().initial_mean.clone(),
            initial: psd_factor(&inst.model().initial_cov),
            offsets: psd_factor(&inst.prior_offset_cov()),
            process,
            measurement,
            agents: d.agents,
        })
    }

    fn gaussian<R: Rng>(factor: &Mat, rng: &mut R) -> Vector {
        let z = Vector::from_iterator(factor.ncols(), (0..factor.ncols()).map(|_| rng.sample::<f64, _>(StandardNormal)));
        factor * z
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> NoiseRealization {
        let x0 = &self.mean + Self::gaussian(&self.initial, rng);
        let nn = self.mean.len();
        let stacked = Self::gaussian(&self.offsets, rng);
        let prior_offsets = (0..self.agents)
            .map(|i| stacked.rows(i * nn, nn).into_owned())
            .collect();
        let process = self.process.iter().map(|f| Self::gaussian(f, rng)).collect();
        let measurement = self
            .measurement
            .iter()
            .map(|row| row.iter().map(|f| Self::gaussian(f, rng)).collect())
            .collect();
        NoiseRealization {
            x0,
            process,
            measurement,
            prior_offsets,
        }
    }
}

/// RNG of run `run` in a batch seeded with `seed`.
pub fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Draw a noise realization over `horizon` steps.
pub fn sample_noise(inst: &ValidatedInstance, horizon: usize, seed: u64) -> Result<NoiseRealization> {
    Ok(NoiseSampler::new(inst, horizon)?.sample(&mut run_rng(seed, 0)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub seed: Option<u64>,
    pub noise: NoiseRealization,
    /// `x(0..=T)`
    pub states: Vec<Vector>,
    /// `u(0..T)`
    pub inputs: Vec<Vector>,
    /// `beliefs[i]` is `ⁱx̂(0..=T)`; empty under measurement feedback.
    pub beliefs: Vec<Vec<Vector>>,
    /// `xᵀ Q x + uᵀ R u`; NaN when the run is longer or shorter than the
    /// instance's cost horizon.
    pub cost: f64,
}

impl Rollout {
    /// `z_ij(t) = x_j(t) + v_ij(t)` for `j ∈ Ω_i`, `None` otherwise.
    pub fn measurements(&self, inst: &ValidatedInstance, agent: usize, t: usize) -> Vec<Option<Vector>> {
        measurements_at(inst, &self.states[t], &self.noise.measurement[t][agent], agent)
    }

    pub fn horizon(&self) -> usize {
        self.inputs.len()
    }
}

fn measurements_at(inst: &ValidatedInstance, x: &Vector, v: &Vector, agent: usize) -> Vec<Option<Vector>> {
    let n = inst.dims().state_dim;
    (0..inst.dims().agents)
        .map(|j| {
            inst.topology()
                .measures(agent, j)
                .then(|| x.rows(j * n, n) + v.rows(j * n, n))
        })
        .collect()
}

fn check_noise(noise: &NoiseRealization, inst: &ValidatedInstance, horizon: usize) -> Result<()> {
    let d = inst.dims();
    let nn = d.mas_state();
    let ok = noise.x0.len() == nn
        && noise.process.len() >= horizon
        && noise.process.iter().all(|w| w.len() == nn)
        && noise.measurement.len() > horizon
        && noise.measurement.iter().all(|r| r.len() == d.agents && r.iter().all(|v| v.len() == nn))
        && noise.prior_offsets.len() == d.agents
        && noise.prior_offsets.iter().all(|o| o.len() == nn);
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "noise realization does not cover {horizon} steps of this instance"
        )))
    }
}

/// Reject measurement-feedback laws that read states an agent cannot measure.
fn check_local(law: &ControlLaw, inst: &ValidatedInstance) -> Result<()> {
    let mask = crate::horizon::SparsityMask::new(law.dims(), inst.topology()).topology;
    let leak = law
        .matrix()
        .iter()
        .zip(mask.iter())
        .any(|(v, m)| *m == 0.0 && *v != 0.0);
    if leak {
        return Err(Error::InvalidParameter(
            "measurement-feedback law uses states outside the agents' neighborhoods".into(),
        ));
    }
    Ok(())
}

/// Run the closed loop over the controller's horizon with the given noise.
pub fn rollout_with_noise(
    inst: &ValidatedInstance,
    controller: &Controller,
    noise: NoiseRealization,
) -> Result<Rollout> {
    let law = controller.law();
    let d = law.dims();
    let id = inst.dims();
    if (d.agents, d.state_dim, d.input_dim) != (id.agents, id.state_dim, id.input_dim) {
        return Err(Error::DimensionMismatch("controller does not match the instance".into()));
    }
    let horizon = d.horizon;
    check_noise(&noise, inst, horizon)?;
    let (a, b) = (inst.a_tilde(), inst.b_tilde());
    let agents = d.agents;
    let selectors: Vec<Mat> = (0..agents).map(|i| input_selector(d, i)).collect();
    let own = |i: usize, u: &Vector| selectors[i].transpose() * (&selectors[i] * u);

    let mut states = vec![noise.x0.clone()];
    let mut inputs = Vec::with_capacity(horizon);
    let mut beliefs_out = Vec::new();

    match controller {
        Controller::EstimateFeedback { gains, .. } => {
            if gains.horizon() < horizon {
                return Err(Error::DimensionMismatch(format!(
                    "estimator gains cover {} steps, controller needs {horizon}",
                    gains.horizon()
                )));
            }
            let mean = &inst.model().initial_mean;
            let mut beliefs: Vec<AgentBelief> = (0..agents)
                .map(|i| AgentBelief::new(i, mean - &noise.prior_offsets[i], gains.agent_covariance(i, 0).clone()))
                .collect();
            for t in 0..horizon {
                let u = (0..agents).fold(Vector::zeros(d.mas_input()), |acc, i| {
                    acc + own(i, &believed_input(&beliefs[i], law))
                });
                let x_next = &a * &states[t] + &b * &u + &noise.process[t];
                beliefs = beliefs
                    .iter()
                    .enumerate()
                    .map(|(i, bel)| {
                        let z = measurements_at(inst, &x_next, &noise.measurement[t + 1][i], i);
                        online_update(bel, inst, gains, law, &z)
                    })
                    .collect::<Result<Vec<_>>>()?;
                states.push(x_next);
                inputs.push(u);
            }
            beliefs_out = beliefs.into_iter().map(|b| b.history).collect();
        }
        Controller::MeasurementFeedback { .. } => {
            check_local(law, inst)?;
            let n = d.state_dim;
            // y_i(k): measured blocks x_j + v_ij, zero elsewhere.
            let mut outputs: Vec<Vec<Vector>> = vec![Vec::with_capacity(horizon); agents];
            for t in 0..horizon {
                for (i, out) in outputs.iter_mut().enumerate() {
                    let z = measurements_at(inst, &states[t], &noise.measurement[t][i], i);
                    let mut y = Vector::zeros(d.mas_state());
                    for (j, zj) in z.iter().enumerate() {
                        if let Some(zj) = zj {
                            y.rows_mut(j * n, n).copy_from(zj);
                        }
                    }
                    out.push(y);
                }
                let u = (0..agents).fold(Vector::zeros(d.mas_input()), |acc, i| {
                    let ui = (0..=t).fold(Vector::zeros(d.mas_input()), |s, k| s + law.block(t, k) * &outputs[i][k]);
                    acc + own(i, &ui)
                });
                states.push(&a * &states[t] + &b * &u + &noise.process[t]);
                inputs.push(u);
            }
        }
    }

    let cost = if horizon == id.horizon {
        let x = stack(&states);
        let u = stack(&inputs);
        let cfg = inst.config();
        (x.transpose() * &cfg.q * &x)[(0, 0)] + (u.transpose() * &cfg.r * &u)[(0, 0)]
    } else {
        f64::NAN
    };
    Ok(Rollout {
        seed: None,
        noise,
        states,
        inputs,
        beliefs: beliefs_out,
        cost,
    })
}

fn stack(parts: &[Vector]) -> Vector {
    let len = parts.iter().map(|p| p.len()).sum();
    Vector::from_iterator(len, parts.iter().flat_map(|p| p.iter().copied()))
}

/// Rollout with noise drawn from `seed`.
pub fn rollout(inst: &ValidatedInstance, controller: &Controller, seed: u64) -> Result<Rollout> {
    let noise = sample_noise(inst, controller.law().dims().horizon, seed)?;
    let mut r = rollout_with_noise(inst, controller, noise)?;
    r.seed = Some(seed);
    Ok(r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchStats {
    pub runs: usize,
    pub mean: f64,
    /// Sample standard deviation over `√runs`; zero for a single run.
    pub std_error: f64,
    /// Realized cost of every run, in run order.
    pub costs: Vec<f64>,
}

impl BatchStats {
    pub fn from_costs(costs: Vec<f64>) -> Result<Self> {
        let runs = costs.len();
        if runs == 0 {
            return Err(Error::InvalidParameter("a batch needs at least one run".into()));
        }
        let mean = costs.iter().sum::<f64>() / runs as f64;
        let std_error = if runs > 1 {
            let var = costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
            (var / runs as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            runs,
            mean,
            std_error,
            costs,
        })
    }
}

/// Independent rollouts; run `k` draws its noise from stream `k` of `seed`.
pub fn monte_carlo(inst: &ValidatedInstance, controller: &Controller, runs: usize, seed: u64) -> Result<BatchStats> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    if controller.law().dims().horizon != inst.dims().horizon {
        return Err(Error::DimensionMismatch("controller horizon differs from the cost horizon".into()));
    }
    let sampler = NoiseSampler::new(inst, inst.dims().horizon)?;
    let costs = (0..runs)
        .into_par_iter()
        .map(|k| {
            let noise = sampler.sample(&mut run_rng(seed, k as u64));
            rollout_with_noise(inst, controller, noise).map(|r| r.cost)
        })
        .collect::<Result<Vec<_>>>()?;
    BatchStats::from_costs(costs)
}

/// The full synthesis with every agent measuring every other agent.
pub fn baseline_fully_connected(inst: &ValidatedInstance) -> Result<SynthesisResult> {
    if inst.topology().is_complete() {
        return run_synthesis(inst);
    }
    run_synthesis(&inst.with_topology(NetworkTopology::complete(inst.dims().agents))?)
}

/// `blkdg(ⁱΞ(0), …, ⁱΞ(T))`: agent `i`'s stacked measurement noise.
pub fn horizon_measurement_noise(inst: &ValidatedInstance, agent: usize) -> Result<Mat> {
    let blocks = (0..=inst.dims().horizon)
        .map(|t| inst.agent_measurement_noise(agent, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(block_diag(&blocks))
}

/// Exact expected cost of a measurement-feedback law,
/// `u = F C x + Σ_i 𝓜_i F C v_i`.
pub fn measurement_feedback_cost(
    law: &ControlLaw,
    inst: &ValidatedInstance,
    ops: &HorizonOperators,
) -> Result<CostReport> {
    let d = ops.dims();
    let cfg = inst.config();
    let maps = LoopMaps::new(law.matrix(), ops);
    let mut vcov = Mat::zeros(d.stacked_input(), d.stacked_input());
    for i in 0..d.agents {
        let y = agent_projector(d, i) * law.matrix() * &ops.c;
        vcov += &y * horizon_measurement_noise(inst, i)? * y.transpose();
    }
    let mu = Mat::from_column_slice(ops.mu_w.len(), 1, ops.mu_w.as_slice());
    let mm = &mu * mu.transpose();
    let tw = |w: &Mat, a: &Mat, cov: &Mat| trace_product(&(w * a), &(cov * a.transpose()));
    let (q, r) = (&cfg.q, &cfg.r);
    let dist = (tw(q, &maps.ax, &ops.sigma_w), tw(r, &maps.au, &ops.sigma_w));
    let err = (tw(q, &maps.bx, &vcov), tw(r, &maps.bu, &vcov));
    let mean = (tw(q, &maps.ax, &mm), tw(r, &maps.au, &mm));
    let state_cost = dist.0 + err.0 + mean.0;
    let input_cost = dist.1 + err.1 + mean.1;
    Ok(CostReport {
        total: state_cost + input_cost,
        state_cost,
        input_cost,
        disturbance: dist.0 + dist.1,
        error: err.0 + err.1,
        cross: 0.0,
        mean: mean.0 + mean.1,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedBaseline {
    pub law: ControlLaw,
    pub cost: CostReport,
    /// Surrogate objective at the optimum, before masking back to `F`.
    pub surrogate: f64,
}

/// Heuristic baseline without virtual interactions: one convex problem in `Φ`
/// over the topology-and-causality pattern, with the agents' raw measurement
/// noise in place of estimation errors; `F` is the topology-masked `h(Φ)`.
pub fn baseline_topology_restricted(inst: &ValidatedInstance) -> Result<RestrictedBaseline> {
    baseline_topology_restricted_with(inst, true)
}

/// `use_initial = false` blanks the time-0 measurement columns so the
/// baseline sees the same information as the estimator, which performs no
/// update at time 0.
pub fn baseline_topology_restricted_with(inst: &ValidatedInstance, use_initial: bool) -> Result<RestrictedBaseline> {
    let d = inst.dims();
    let ops = build_horizon(inst)?;
    let zero = Mat::zeros(d.stacked_state(), d.stacked_state());
    let base = build_agent_subproblem(0, &zero, &ops, inst.config())?;
    let (v, w) = base.terms()[0].clone();
    let mut terms = vec![(v.clone(), w)];
    for i in 0..d.agents {
        let m = agent_projector(d, i);
        let cv = &ops.c * horizon_measurement_noise(inst, i)? * ops.c.transpose();
        terms.push((&m * &v * &m, cv));
    }
    let masks = ops.masks(inst.topology());
    let mut mask = masks.topology.clone();
    if !use_initial {
        mask.columns_mut(0, d.agents * d.state_dim).fill(0.0);
    }
    let sub = AgentSubproblem::from_terms(d, terms, base.linear().clone(), base.constant(), mask.clone(), inst.config().ridge)?;
    let phi = solve_agent_subproblem(&sub)?;
    let surrogate = sub.objective(phi.matrix());
    let law = ControlLaw::new(apply_mask(h_map(&phi, &ops).matrix(), &mask)?, d)?;
    let cost = measurement_feedback_cost(&law, inst, &ops)?;
    Ok(RestrictedBaseline { law, cost, surrogate })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub cost: f64,
    pub iterations: usize,
    pub best_iteration: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub links: usize,
    pub outcome: Result<SweepOutcome>,
}

/// Synthesize on every topology; failures are reported per row.
pub fn topology_sweep_over(inst: &ValidatedInstance, topologies: &[NetworkTopology]) -> Vec<SweepRow> {
    topologies
        .par_iter()
        .map(|topo| {
            let outcome = (|| {
                crate::stability::require_observable(topo, inst.dims().state_dim)?;
                let res = run_synthesis(&inst.with_topology(topo.clone())?)?;
                Ok(SweepOutcome {
                    cost: res.cost.total,
                    iterations: res.history.len(),
                    best_iteration: res.best_iteration,
                })
            })();
            SweepRow {
                links: topo.links(),
                outcome,
            }
        })
        .collect()
}

/// Sweep over link counts; links are added ring first, then chords in
/// lexicographic order.
pub fn topology_sweep(inst: &ValidatedInstance, link_counts: &[usize]) -> Vec<SweepRow> {
    let agents = inst.dims().agents;
    let built: Vec<std::result::Result<NetworkTopology, (usize, Error)>> = link_counts
        .iter()
        .map(|&k| NetworkTopology::with_link_count(agents, k).map_err(|e| (k, e)))
        .collect();
    let valid: Vec<NetworkTopology> = built.iter().filter_map(|b| b.as_ref().ok().cloned()).collect();
    let mut swept = topology_sweep_over(inst, &valid).into_iter();
    built
        .into_iter()
        .map(|b| match b {
            Ok(_) => swept.next().expect("one row per valid topology"),
            Err((links, e)) => SweepRow { links, outcome: Err(e) },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::design_estimator;
    use crate::scenarios;

    #[test]
    fn zero_noise_from_rest_stays_at_rest() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::path(5)).unwrap();
        let d = inst.dims();
        let law = ControlLaw::static_gain(&Mat::from_fn(5, 5, |r, c| if r == c { -0.7 } else { 0.2 }), d).unwrap();
        let (gains, _) = design_estimator(&law, &inst).unwrap();
        let ctrl = Controller::EstimateFeedback { law, gains };
        let r = rollout_with_noise(&inst, &ctrl, NoiseRealization::zeros(&inst, 5)).unwrap();
        assert!(r.states.iter().all(|x| x.norm() == 0.0));
        assert!(r.inputs.iter().all(|u| u.norm() == 0.0));
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn rollout_is_reproducible() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::ring(5)).unwrap();
        let law = ControlLaw::static_gain(&(Mat::identity(5, 5) * -0.5), inst.dims()).unwrap();
        let (gains, _) = design_estimator(&law, &inst).unwrap();
        let ctrl = Controller::EstimateFeedback { law, gains };
        let a = rollout(&inst, &ctrl, 11).unwrap();
        let b = rollout(&inst, &ctrl, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.cost, rollout(&inst, &ctrl, 12).unwrap().cost);
        assert!(a.cost >= 0.0);
    }

    #[test]
    fn single_run_batch() {
        let inst = scenarios::scalar_single_agent(2, 1.0, 1.0, 1.0, 1.0).unwrap();
        let law = ControlLaw::zeros(inst.dims());
        let (gains, _) = design_estimator(&law, &inst).unwrap();
        let ctrl = Controller::EstimateFeedback { law, gains };
        let stats = monte_carlo(&inst, &ctrl, 1, 3).unwrap();
        assert_eq!(stats.std_error, 0.0);
        assert_eq!(stats.mean, stats.costs[0]);
        assert!(monte_carlo(&inst, &ctrl, 0, 3).is_err());
    }

    #[test]
    fn measurement_feedback_rejects_nonlocal_law() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::path(5)).unwrap();
        let law = ControlLaw::static_gain(&Mat::from_element(5, 5, 0.1), inst.dims()).unwrap();
        let ctrl = Controller::MeasurementFeedback { law };
        assert!(matches!(rollout(&inst, &ctrl, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn isolated_restricted_baseline_is_block_diagonal() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::isolated(5)).unwrap();
        let base = baseline_topology_restricted(&inst).unwrap();
        for r in 0..25 {
            for c in 0..25 {
                if r % 5 != c % 5 {
                    assert_eq!(base.law.matrix()[(r, c)], 0.0);
                }
            }
        }
        assert!(base.cost.total > 0.0);
    }

    #[test]
    fn matched_baseline_ignores_initial_measurements() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::path(5)).unwrap();
        let b = baseline_topology_restricted_with(&inst, false).unwrap();
        assert!(b.law.matrix().columns(0, 5).iter().all(|v| *v == 0.0));
        let full = baseline_topology_restricted(&inst).unwrap();
        assert!(full.law.matrix().columns(0, 5).iter().any(|v| *v != 0.0));
        assert!(full.cost.total <= b.cost.total);
    }

    #[test]
    fn sweep_reports_unobservable_rows() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::ring(5)).unwrap();
        let rows = topology_sweep(&inst, &[3, 5, 11]);
        assert_eq!(rows.len(), 3);
        assert!(matches!(rows[0].outcome, Err(Error::ObservabilityViolation { .. })));
        assert!(rows[1].outcome.is_ok());
        assert!(matches!(rows[2].outcome, Err(Error::InvalidParameter(_))));
    }
}
