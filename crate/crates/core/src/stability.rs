//! Stability checks of the distributed estimator under a static gain
//! `u_i(t) = M_i F ⁱx̂(t)`.
//!
//! Agent `i`'s error obeys
//!
//! ```text
//! ⁱe⁻(t+1) = D1 ⁱe(t) + D12 e(t) + w̃(t),   D1 = Ã + B̃F,   D12 = −B̄ M̃ (I_N ⊗ F)
//! ```
//!
//! and the stacked error admits the affine representation
//! `e(t) = H_i(t) ⁱe(t) + α_i(t)` for every agent.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{design_estimator, EstimatorGains, JointErrorCovariance};
use crate::horizon::{input_selector, ControlLaw};
use crate::linalg::{block_diag, kron, max_abs, min_eigenvalue, ones, rank, spd_inverse, symmetrize, Mat, Vector};
use crate::model::{Dims, NetworkTopology, ValidatedInstance};
use crate::simulate::{rollout_with_noise, sample_noise, Controller, NoiseRealization};

const RANK_TOL: f64 = 1e-10;
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObservabilityReport {
    pub agent: usize,
    pub rank: usize,
    pub required: usize,
    pub observable: bool,
}

/// Rank of `[C; C 𝓛̂; …; C 𝓛̂^{Nn−1}]` with `𝓛̂ = 𝓛 ⊗ I_n`.
pub fn observability_rank(laplacian: &Mat, selector: &Mat, state_dim: usize) -> usize {
    let l = kron(laplacian, &Mat::identity(state_dim, state_dim));
    let dim = l.nrows();
    let rows = selector.nrows();
    if rows == 0 {
        return 0;
    }
    let mut obs = Mat::zeros(rows * dim, dim);
    let mut block = selector.clone();
    for k in 0..dim {
        obs.view_mut((k * rows, 0), (rows, dim)).copy_from(&block);
        block = &block * &l;
    }
    rank(&obs, RANK_TOL)
}

/// Observability of the Laplacian dynamics from agent `i`'s measurements.
pub fn observability_check(topo: &NetworkTopology, agent: usize, state_dim: usize) -> ObservabilityReport {
    let required = topo.agents() * state_dim;
    let rank = observability_rank(&topo.laplacian(), &topo.selector(agent, state_dim), state_dim);
    ObservabilityReport {
        agent,
        rank,
        required,
        observable: rank == required,
    }
}

/// `ObservabilityViolation` for the first agent that fails the rank test.
pub fn require_observable(topo: &NetworkTopology, state_dim: usize) -> Result<()> {
    for i in 0..topo.agents() {
        let rep = observability_check(topo, i, state_dim);
        if !rep.observable {
            return Err(Error::ObservabilityViolation {
                agent: i,
                rank: rep.rank,
                required: rep.required,
            });
        }
    }
    Ok(())
}

/// Memoryless gain `F ∈ R^{Np × Nn}` with its error-dynamics operators.
#[derive(Clone, Debug, PartialEq)]
pub struct StaticGain {
    gain: Mat,
    d1: Mat,
    d12: Mat,
    dims: Dims,
}

impl StaticGain {
    pub fn new(gain: Mat, inst: &ValidatedInstance) -> Result<Self> {
        let d = inst.dims();
        crate::linalg::check_shape(&gain, d.mas_input(), d.mas_state(), "static gain")?;
        let b = inst.b_tilde();
        let d1 = inst.a_tilde() + &b * &gain;
        let nn = d.mas_state();
        let mut d12 = Mat::zeros(nn, d.error_dim());
        for j in 0..d.agents {
            let m = input_selector(d, j);
            let part = -(&b * m.transpose() * &m * &gain);
            d12.view_mut((0, j * nn), (nn, nn)).copy_from(&part);
        }
        Ok(Self { gain, d1, d12, dims: d })
    }

    /// `u_i = −k ⁱx̂_i`: each agent feeds back its own state estimate only.
    pub fn diagonal(k: f64, inst: &ValidatedInstance) -> Result<Self> {
        let d = inst.dims();
        if d.state_dim != d.input_dim {
            return Err(Error::DimensionMismatch("diagonal gain needs n = p".into()));
        }
        Self::new(Mat::identity(d.mas_input(), d.mas_state()) * -k, inst)
    }

    pub fn gain(&self) -> &Mat {
        &self.gain
    }

    /// `Ã + B̃ F`
    pub fn d1(&self) -> &Mat {
        &self.d1
    }

    /// `−B̄ M̃ (I_N ⊗ F)`
    pub fn d12(&self) -> &Mat {
        &self.d12
    }

    /// The gain applied at every step of a `horizon`-step law.
    pub fn law(&self, horizon: usize) -> Result<ControlLaw> {
        ControlLaw::static_gain(&self.gain, self.dims.with_horizon(horizon))
    }

    /// Estimator designed against the repeated gain.
    pub fn design(&self, inst: &ValidatedInstance, horizon: usize) -> Result<StaticDesign> {
        let (gains, covariances) = design_estimator(&self.law(horizon)?, inst)?;
        Ok(StaticDesign { gains, covariances })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaticDesign {
    pub gains: EstimatorGains,
    pub covariances: JointErrorCovariance,
}

/// `H_i(t)`, `η_i(t)` and the step operators, for `t = 0..=horizon`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMapState {
    /// `h[i][t] = H_i(t)`, `NnN × Nn`
    pub h: Vec<Vec<Mat>>,
    /// `eta[i][t] = η_i(t) = Cov(α_i(t))`
    pub eta: Vec<Vec<Mat>>,
    /// `d2[i][t] = ⁱD2(t)`, `t < horizon`
    pub d2: Vec<Vec<Mat>>,
    /// `d22[i][t] = ⁱD22(t+1)`, `t < horizon`
    pub d22: Vec<Vec<Mat>>,
}

impl AffineMapState {
    pub fn horizon(&self) -> usize {
        self.d2.first().map_or(0, |v| v.len())
    }
}

/// `E_j`: embeds an `Nn` block at position `j` of an `NnN` vector.
fn embed(d: Dims, j: usize) -> Mat {
    let nn = d.mas_state();
    let mut e = Mat::zeros(d.error_dim(), nn);
    e.view_mut((j * nn, 0), (nn, nn)).fill_with_identity();
    e
}

/// `X K⁻¹`, failing on a numerically singular `K`.
fn right_solve(x: &Mat, k: &Mat, agent: usize, t: usize) -> Result<Mat> {
    let sv = k.clone().singular_values();
    let smax = sv.max();
    if !(sv.min() > SINGULAR_TOL * smax.max(f64::MIN_POSITIVE)) {
        return Err(Error::SingularStep { agent, t });
    }
    let lu = k.transpose().lu();
    lu.solve(&x.transpose())
        .map(|s| s.transpose())
        .ok_or(Error::SingularStep { agent, t })
}

/// Covariance of `α(0)` stacked over agents, from the prior offsets.
fn initial_alpha_cov(inst: &ValidatedInstance) -> Mat {
    let d = inst.dims();
    let ne = d.error_dim();
    // α_i(0) = e(0) − 1_N ⊗ ⁱe(0) = (I − 1_N ⊗ E_iᵀ) δ
    let t = Mat::from_fn(d.agents * ne, ne, |_, _| 0.0);
    let mut t = t;
    for i in 0..d.agents {
        let map = Mat::identity(ne, ne) - kron(&ones(d.agents), &embed(d, i).transpose());
        t.view_mut((i * ne, 0), (ne, ne)).copy_from(&map);
    }
    &t * inst.prior_offset_cov() * t.transpose()
}

/// Propagate `H_i(t)` and `η_i(t)` for `t = 0..=horizon`.
pub fn propagate_affine_map(
    inst: &ValidatedInstance,
    gain: &StaticGain,
    gains: &EstimatorGains,
    horizon: usize,
) -> Result<AffineMapState> {
    let d = inst.dims();
    if gains.horizon() < horizon {
        return Err(Error::DimensionMismatch(format!(
            "gains cover {} steps, {horizon} requested",
            gains.horizon()
        )));
    }
    let (nn, ne, agents) = (d.mas_state(), d.error_dim(), d.agents);
    let eye = Mat::identity(nn, nn);
    let h0 = kron(&ones(agents), &eye);
    let mut h: Vec<Vec<Mat>> = vec![vec![h0]; agents];
    let mut d2s: Vec<Vec<Mat>> = vec![Vec::with_capacity(horizon); agents];
    let mut d22s: Vec<Vec<Mat>> = vec![Vec::with_capacity(horizon); agents];
    let mut p = initial_alpha_cov(inst);
    let split = |p: &Mat| -> Vec<Mat> {
        (0..agents)
            .map(|i| p.view((i * ne, i * ne), (ne, ne)).into_owned())
            .collect()
    };
    let mut eta: Vec<Vec<Mat>> = split(&p).into_iter().map(|m| vec![m]).collect();
    let embeds: Vec<Mat> = (0..agents).map(|j| embed(d, j)).collect();

    for t in 0..horizon {
        let mut steps = Vec::with_capacity(agents);
        for i in 0..agents {
            let d2 = gain.d1() + gain.d12() * &h[i][t];
            let lc = gains.gain(i, t + 1) * gains.selector(i);
            let d22 = &eye - &lc;
            steps.push((d2, d22, lc));
        }
        let ftilde = block_diag(&steps.iter().map(|(d2, d22, _)| d22 * d2).collect::<Vec<_>>());
        let next_h = (0..agents)
            .into_par_iter()
            .map(|i| {
                let k = &steps[i].1 * &steps[i].0;
                right_solve(&(&ftilde * &h[i][t]), &k, i, t)
            })
            .collect::<Result<Vec<_>>>()?;

        // α(t+1) = T α(t) + N_w w̃(t) + Σ_j N_vj v_j(t+1)
        let mut tmat = Mat::zeros(agents * ne, agents * ne);
        let mut nw = Mat::zeros(agents * ne, nn);
        let gamma_w = (0..agents).fold(Mat::zeros(ne, nn), |acc, j| acc + &embeds[j] * &steps[j].1);
        let mut nv: Vec<Mat> = vec![Mat::zeros(agents * ne, nn); agents];
        for i in 0..agents {
            let hn = &next_h[i];
            for j in 0..agents {
                let mut blk = &embeds[j] * &steps[j].1 * gain.d12();
                if i == j {
                    blk += &ftilde - hn * &steps[i].1 * gain.d12();
                }
                tmat.view_mut((i * ne, j * ne), (ne, ne)).copy_from(&blk);
                let mut v = -(&embeds[j] * &steps[j].2);
                if i == j {
                    v += hn * &steps[i].2;
                }
                nv[j].view_mut((i * ne, 0), (ne, nn)).copy_from(&v);
            }
            nw.view_mut((i * ne, 0), (ne, nn))
                .copy_from(&(&gamma_w - hn * &steps[i].1));
        }
        let theta = inst.process_noise_block(t)?;
        let mut next_p = &tmat * &p * tmat.transpose() + &nw * theta * nw.transpose();
        for j in 0..agents {
            next_p += &nv[j] * inst.agent_measurement_noise(j, t + 1)? * nv[j].transpose();
        }
        p = symmetrize(&next_p);
        for (i, m) in split(&p).into_iter().enumerate() {
            eta[i].push(m);
        }
        for (i, hn) in next_h.into_iter().enumerate() {
            h[i].push(hn);
        }
        for (i, (d2, d22, _)) in steps.into_iter().enumerate() {
            d2s[i].push(d2);
            d22s[i].push(d22);
        }
    }
    Ok(AffineMapState {
        h,
        eta,
        d2: d2s,
        d22: d22s,
    })
}

/// Per-agent errors `ⁱe(t) = x(t) − ⁱx̂(t)` of a rollout.
fn agent_errors(states: &[Vector], beliefs: &[Vec<Vector>]) -> Vec<Vec<Vector>> {
    beliefs
        .iter()
        .map(|hist| hist.iter().zip(states).map(|(xh, x)| x - xh).collect())
        .collect()
}

/// `max_t ‖e(t) − H_i(t) ⁱe(t) − α_i(t)‖∞` along one noise path, with `α_i`
/// propagated realization-wise from the map's own `H_i`.
pub fn affine_residual(
    inst: &ValidatedInstance,
    gain: &StaticGain,
    gains: &EstimatorGains,
    map: &AffineMapState,
    noise: &NoiseRealization,
) -> Result<f64> {
    let d = inst.dims();
    let steps = map.horizon();
    let ctrl = Controller::EstimateFeedback {
        law: gain.law(steps)?,
        gains: gains.clone(),
    };
    let path = rollout_with_noise(inst, &ctrl, noise.clone())?;
    let errs = agent_errors(&path.states, &path.beliefs);
    let (nn, agents) = (d.mas_state(), d.agents);
    let stacked = |t: usize| -> Vector {
        let mut e = Vector::zeros(d.error_dim());
        for i in 0..agents {
            e.rows_mut(i * nn, nn).copy_from(&errs[i][t]);
        }
        e
    };

    // α_i(0) = e(0) − H_i(0) ⁱe(0)
    let e0 = stacked(0);
    let mut alpha: Vec<Vector> = (0..agents).map(|i| &e0 - &map.h[i][0] * &errs[i][0]).collect();
    let mut worst = 0.0_f64;
    for t in 0..=steps {
        let e = stacked(t);
        for i in 0..agents {
            let r = &e - &map.h[i][t] * &errs[i][t] - &alpha[i];
            worst = worst.max(r.amax());
        }
        if t == steps {
            break;
        }
        let zeta: Vec<Vector> = (0..agents)
            .map(|i| {
                let lc = gains.gain(i, t + 1) * gains.selector(i);
                &map.d22[i][t] * &noise.process[t] - lc * &noise.measurement[t + 1][i]
            })
            .collect();
        let ftilde = block_diag(&(0..agents).map(|i| &map.d22[i][t] * &map.d2[i][t]).collect::<Vec<_>>());
        let mut gamma = Vector::zeros(d.error_dim());
        for j in 0..agents {
            gamma
                .rows_mut(j * nn, nn)
                .copy_from(&(&map.d22[j][t] * gain.d12() * &alpha[j] + &zeta[j]));
        }
        alpha = (0..agents)
            .map(|i| {
                let hn = &map.h[i][t + 1];
                (&ftilde - hn * &map.d22[i][t] * gain.d12()) * &alpha[i] + &gamma - hn * &zeta[i]
            })
            .collect();
    }
    Ok(worst)
}

/// Propagate the affine map and check it on one sampled path.
pub fn verify_affine_identity(
    inst: &ValidatedInstance,
    gain: &StaticGain,
    gains: &EstimatorGains,
    seed: u64,
    steps: usize,
) -> Result<f64> {
    let map = propagate_affine_map(inst, gain, gains, steps)?;
    let noise = sample_noise(inst, steps, seed)?;
    affine_residual(inst, gain, gains, &map, &noise)
}

/// Smallest eigenvalues of the decrement matrix `𝓜_i(t)` in three forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovEntry {
    pub agent: usize,
    /// Index of `𝓜_i(t)`, `t ≥ 1`.
    pub t: usize,
    /// `ⁱΣ⁻¹ − ⁱD2ᵀ (ⁱD2 ⁱΣ ⁱD2ᵀ + Y)⁻¹ ⁱD2`
    pub min_eig_subtraction: f64,
    /// `ⁱΣ⁻¹ (ⁱΣ⁻¹ + ⁱD2ᵀ Y⁻¹ ⁱD2)⁻¹ ⁱΣ⁻¹`
    pub min_eig_inverse: f64,
    /// Largest entrywise gap between the two forms relative to their size.
    pub form_gap: f64,
    /// `ⁱΣ(t−1)⁻¹ − Kᵀ ⁱΣ(t)⁻¹ K`, `K = ⁱD22 ⁱD2`, from the designed covariances.
    pub min_eig_direct: f64,
}

fn inverse(m: &Mat, what: &str) -> Result<Mat> {
    symmetrize(m)
        .cholesky()
        .map(|c| c.inverse())
        .or_else(|| m.clone().try_inverse())
        .ok_or_else(|| Error::NumericalFailure(format!("{what} is singular")))
}

/// `𝓜_i(t+1)` for every agent and `t < horizon`, where
/// `Y = D12 η_i D12ᵀ + Σ_w̃ + W_i` and
/// `W_i = ⁱΣ⁻ C_iᵀ (C_i Ξ_i C_iᵀ)⁻¹ C_i ⁱΣ⁻`.
pub fn lyapunov_decrement_check(
    inst: &ValidatedInstance,
    gain: &StaticGain,
    design: &StaticDesign,
    map: &AffineMapState,
) -> Result<Vec<LyapunovEntry>> {
    let d = inst.dims();
    let clip = inst.config().psd_clip;
    let horizon = map.horizon();
    let jobs: Vec<(usize, usize)> = (0..d.agents).flat_map(|i| (0..horizon).map(move |t| (i, t))).collect();
    jobs.into_par_iter()
        .map(|(i, t)| {
            let cov = &design.covariances;
            let sigma = cov.agent(i, t);
            let sigma_inv = spd_inverse(&sigma, clip).ok_or(Error::NotInvertibleCovariance { agent: i, t })?;
            let sigma_next_inv = spd_inverse(&cov.agent(i, t + 1), clip)
                .ok_or(Error::NotInvertibleCovariance { agent: i, t: t + 1 })?;
            let prior = cov.agent_predicted(i, t + 1);
            let c = design.gains.selector(i);
            let w = if c.nrows() == 0 {
                Mat::zeros(prior.nrows(), prior.ncols())
            } else {
                let xi = c * inst.agent_measurement_noise(i, t + 1)? * c.transpose();
                &prior * c.transpose() * inverse(&xi, "C_i Xi_i C_i^T")? * c * &prior
            };
            let d12 = gain.d12();
            let y = symmetrize(&(d12 * &map.eta[i][t] * d12.transpose() + inst.process_noise_block(t)? + w));
            let d2 = &map.d2[i][t];

            let sub = symmetrize(&(&sigma_inv - d2.transpose() * inverse(&(d2 * &sigma * d2.transpose() + &y), "predicted covariance")? * d2));
            let inner = &sigma_inv + d2.transpose() * inverse(&y, "Y")? * d2;
            let inv = symmetrize(&(&sigma_inv * inverse(&inner, "inverse-form core")? * &sigma_inv));
            let scale = max_abs(&sub).max(max_abs(&inv)).max(f64::MIN_POSITIVE);
            let k = &map.d22[i][t] * d2;
            let direct = symmetrize(&(&sigma_inv - k.transpose() * sigma_next_inv * &k));
            Ok(LyapunovEntry {
                agent: i,
                t: t + 1,
                min_eig_subtraction: min_eigenvalue(&sub),
                min_eig_inverse: min_eigenvalue(&inv),
                form_gap: max_abs(&(&sub - &inv)) / scale,
                min_eig_direct: min_eigenvalue(&direct),
            })
        })
        .collect()
}

/// `ΔV = V(E[ⁱe(t+1) | ⁱe(t)], t+1) − V(ⁱe(t), t)` along a sampled path,
/// skipping steps where `ⁱe(t) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecrementSample {
    pub agent: usize,
    pub t: usize,
    pub v: f64,
    pub delta_v: f64,
}

pub fn decrement_samples(
    inst: &ValidatedInstance,
    gain: &StaticGain,
    design: &StaticDesign,
    map: &AffineMapState,
    seed: u64,
) -> Result<Vec<DecrementSample>> {
    let steps = map.horizon();
    let clip = inst.config().psd_clip;
    let ctrl = Controller::EstimateFeedback {
        law: gain.law(steps)?,
        gains: design.gains.clone(),
    };
    let path = rollout_with_noise(inst, &ctrl, sample_noise(inst, steps, seed)?)?;
    let errs = agent_errors(&path.states, &path.beliefs);
    let mut out = Vec::new();
    for (i, e_i) in errs.iter().enumerate() {
        for t in 0..steps {
            let e = &e_i[t];
            if e.amax() == 0.0 {
                continue;
            }
            let now = spd_inverse(&design.covariances.agent(i, t), clip)
                .ok_or(Error::NotInvertibleCovariance { agent: i, t })?;
            let next = spd_inverse(&design.covariances.agent(i, t + 1), clip)
                .ok_or(Error::NotInvertibleCovariance { agent: i, t: t + 1 })?;
            let expected = &map.d22[i][t] * &map.d2[i][t] * e;
            let v = e.dot(&(&now * e));
            out.push(DecrementSample {
                agent: i,
                t,
                v,
                delta_v: expected.dot(&(&next * &expected)) - v,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    #[test]
    fn observability_examples() {
        let full = NetworkTopology::complete(2);
        let rep = observability_check(&full, 0, 1);
        assert_eq!((rep.rank, rep.observable), (2, true));

        let path_laplacian = Mat::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(observability_rank(&path_laplacian, &Mat::from_row_slice(1, 2, &[1.0, 0.0]), 1), 2);

        let isolated = NetworkTopology::isolated(2);
        let rep = observability_check(&isolated, 0, 1);
        assert_eq!((rep.rank, rep.observable), (1, false));
        assert!(matches!(
            require_observable(&isolated, 1),
            Err(Error::ObservabilityViolation { agent: 0, rank: 1, required: 2 })
        ));
        assert!(require_observable(&NetworkTopology::path(5), 1).is_ok());
    }

    #[test]
    fn d12_cancels_own_feedback_for_one_agent() {
        let inst = scenarios::scalar_single_agent(3, 1.0, 1.0, 1.0, 1.0).unwrap();
        let g = StaticGain::new(Mat::from_element(1, 1, -0.4), &inst).unwrap();
        assert!((g.d1()[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((g.d12()[(0, 0)] - 0.4).abs() < 1e-15);
        let design = g.design(&inst, 10).unwrap();
        let map = propagate_affine_map(&inst, &g, &design.gains, 10).unwrap();
        for t in 0..=10 {
            assert!((map.h[0][t][(0, 0)] - 1.0).abs() < 1e-12);
            assert_eq!(map.eta[0][t][(0, 0)], 0.0);
        }
    }

    #[test]
    fn eta_starts_at_zero() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::path(5)).unwrap();
        let g = StaticGain::diagonal(0.5, &inst).unwrap();
        let design = g.design(&inst, 4).unwrap();
        let map = propagate_affine_map(&inst, &g, &design.gains, 4).unwrap();
        for i in 0..5 {
            assert_eq!(max_abs(&map.eta[i][0]), 0.0);
            let h0 = &map.h[i][0];
            let sigma0 = h0 * design.covariances.agent(i, 0) * h0.transpose();
            assert!(max_abs(&(sigma0 - design.covariances.joint(0))) < 1e-15);
        }
    }

    #[test]
    fn zero_noise_path_has_zero_residual() {
        let inst = scenarios::scalar_single_agent(3, 1.0, 0.0, 1.0, 0.0).unwrap();
        let g = StaticGain::new(Mat::from_element(1, 1, -0.5), &inst).unwrap();
        let design = g.design(&inst, 5).unwrap();
        let map = propagate_affine_map(&inst, &g, &design.gains, 5).unwrap();
        let noise = NoiseRealization::zeros(&inst, 5);
        assert_eq!(affine_residual(&inst, &g, &design.gains, &map, &noise).unwrap(), 0.0);
    }

    #[test]
    fn affine_identity_on_five_agents() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::path(5)).unwrap();
        let g = StaticGain::diagonal(0.5, &inst).unwrap();
        let design = g.design(&inst, 10).unwrap();
        let res = verify_affine_identity(&inst, &g, &design.gains, 4, 10).unwrap();
        assert!(res <= 1e-8, "residual {res}");

        let mut map = propagate_affine_map(&inst, &g, &design.gains, 10).unwrap();
        map.h[2][1].add_scalar_mut(0.1);
        let noise = sample_noise(&inst, 10, 4).unwrap();
        assert!(affine_residual(&inst, &g, &design.gains, &map, &noise).unwrap() > 0.05);
    }

    #[test]
    fn decrement_forms_agree_and_are_positive() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::path(5)).unwrap();
        let g = StaticGain::diagonal(0.5, &inst).unwrap();
        let design = g.design(&inst, 20).unwrap();
        let map = propagate_affine_map(&inst, &g, &design.gains, 20).unwrap();
        let entries = lyapunov_decrement_check(&inst, &g, &design, &map).unwrap();
        assert_eq!(entries.len(), 100);
        for e in entries {
            assert!(e.min_eig_inverse > 0.0, "{e:?}");
            assert!(e.form_gap <= 1e-8, "{e:?}");
        }
    }
}
