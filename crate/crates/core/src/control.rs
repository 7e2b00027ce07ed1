//! Cost evaluation and the per-agent convex control subproblems.
//!
//! With `u = F C x − d`, `d = Σ_i 𝓜_i F C ⁱe`, and `x = P11 w + P12 u`:
//!
//! ```text
//! x = (I − P12 F C)⁻¹ (P11 w − P12 d)
//! u = (I − F C P12)⁻¹ (F C P11 w − d)
//! ```
//!
//! Both resolvents are unit lower-triangular and are applied by forward
//! substitution.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::HorizonCovariances;
use crate::horizon::{h_map, ControlLaw, HorizonOperators, PhiParameter};
use crate::linalg::{trace_product, unit_lower_solve, Mat};
use crate::model::{Dims, SynthesisConfig};

/// Expected quadratic cost split two ways: by weight (`state_cost + input_cost`)
/// and by source (`disturbance + error + cross + mean`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostReport {
    pub total: f64,
    pub state_cost: f64,
    pub input_cost: f64,
    /// Zero-mean disturbance `w − μ_w` propagated through the loop.
    pub disturbance: f64,
    /// Estimation errors fed back through the input.
    pub error: f64,
    /// Correlation between disturbance and estimation errors; may be negative.
    pub cross: f64,
    /// Mean of the disturbance, `μ_w`.
    pub mean: f64,
}

/// Closed-loop maps of one control law.
pub(crate) struct LoopMaps {
    /// `(I − P12 F C)⁻¹ P11`
    pub ax: Mat,
    /// `(I − F C P12)⁻¹ F C P11`
    pub au: Mat,
    /// `(I − P12 F C)⁻¹ P12`
    pub bx: Mat,
    /// `(I − F C P12)⁻¹`, `NpT` square
    pub bu: Mat,
}

impl LoopMaps {
    pub fn new(law: &Mat, ops: &HorizonOperators) -> Self {
        let fc = law * &ops.c;
        let x_u = law * ops.cp12();
        let bu = unit_lower_solve(&x_u, &Mat::identity(x_u.nrows(), x_u.nrows()));
        let au = &bu * &fc * &ops.p11;
        // (I − P12 F C)⁻¹ P12 = P12 (I − F C P12)⁻¹, and
        // (I − P12 F C)⁻¹ P11 = P11 + P12 (I − F C P12)⁻¹ F C P11.
        let bx = &ops.p12 * &bu;
        let ax = &ops.p11 + &ops.p12 * &au;
        Self { ax, au, bx, bu }
    }
}

fn weighted(q: &Mat, a: &Mat, cov: &Mat, b: &Mat) -> f64 {
    // tr(Q A Cov Bᵀ)
    trace_product(&(q * a), &(cov * b.transpose()))
}

fn check_weights(cfg: &SynthesisConfig, d: Dims) -> Result<()> {
    crate::linalg::check_shape(&cfg.q, d.stacked_state(), d.stacked_state(), "Q")?;
    crate::linalg::check_shape(&cfg.r, d.stacked_input(), d.stacked_input(), "R")
}

/// `E[xᵀ Q x + uᵀ R u]` of the closed loop driven by `law` with the agents'
/// estimation errors described by `covs`.
pub fn evaluate_global_cost(
    law: &ControlLaw,
    covs: &HorizonCovariances,
    ops: &HorizonOperators,
    cfg: &SynthesisConfig,
) -> Result<CostReport> {
    let d = ops.dims();
    check_weights(cfg, d)?;
    if law.dims() != d || covs.dims() != d {
        return Err(Error::DimensionMismatch(
            "control law, covariances and operators must share dimensions".into(),
        ));
    }
    let maps = LoopMaps::new(law.matrix(), ops);
    let (q, r) = (&cfg.q, &cfg.r);

    // d = Σ_i Y_i ⁱe with Y_i = 𝓜_i F C
    let y: Vec<Mat> = (0..d.agents)
        .map(|i| ops.agent_projector(i) * law.matrix() * &ops.c)
        .collect();
    let mut dcov = Mat::zeros(d.stacked_input(), d.stacked_input());
    let mut xdw = Mat::zeros(d.stacked_input(), d.stacked_state());
    for i in 0..d.agents {
        for j in 0..d.agents {
            dcov += &y[i] * covs.pair(i, j) * y[j].transpose();
        }
        xdw += &y[i] * covs.disturbance(i);
    }

    let sw = &ops.sigma_w;
    let mu = Mat::from_column_slice(ops.mu_w.len(), 1, ops.mu_w.as_slice());
    let mm = &mu * mu.transpose();

    let dist_x = weighted(q, &maps.ax, sw, &maps.ax);
    let dist_u = weighted(r, &maps.au, sw, &maps.au);
    let err_x = weighted(q, &maps.bx, &dcov, &maps.bx);
    let err_u = weighted(r, &maps.bu, &dcov, &maps.bu);
    let cross_x = -2.0 * weighted(q, &maps.bx, &xdw, &maps.ax);
    let cross_u = -2.0 * weighted(r, &maps.bu, &xdw, &maps.au);
    let mean_x = weighted(q, &maps.ax, &mm, &maps.ax);
    let mean_u = weighted(r, &maps.au, &mm, &maps.au);

    let state_cost = dist_x + err_x + cross_x + mean_x;
    let input_cost = dist_u + err_u + cross_u + mean_u;
    Ok(CostReport {
        total: state_cost + input_cost,
        state_cost,
        input_cost,
        disturbance: dist_x + dist_u,
        error: err_x + err_u,
        cross: cross_x + cross_u,
        mean: mean_x + mean_u,
    })
}

/// The cost agent `i` sees when it assumes every agent applies `law` to
/// agent `i`'s own estimate: `ⁱu = F C (x − ⁱe)`, with `ⁱe` independent of `w`.
///
/// `sigma_i` is the horizon-stacked `Σ_i`, `Nn(T+1)` square.
pub fn agent_view_cost(
    law: &ControlLaw,
    sigma_i: &Mat,
    ops: &HorizonOperators,
    cfg: &SynthesisConfig,
) -> Result<f64> {
    let d = ops.dims();
    check_weights(cfg, d)?;
    crate::linalg::check_shape(sigma_i, d.stacked_state(), d.stacked_state(), "Sigma_i")?;
    let maps = LoopMaps::new(law.matrix(), ops);
    let mu = Mat::from_column_slice(ops.mu_w.len(), 1, ops.mu_w.as_slice());
    let s = &ops.sigma_w + &mu * mu.transpose();
    let csc = &ops.c * sigma_i * ops.c.transpose();
    let fe = law.matrix();
    let (q, r) = (&cfg.q, &cfg.r);
    Ok(weighted(q, &maps.ax, &s, &maps.ax)
        + weighted(r, &maps.au, &s, &maps.au)
        + weighted(q, &(&maps.bx * fe), &csc, &(&maps.bx * fe))
        + weighted(r, &(&maps.bu * fe), &csc, &(&maps.bu * fe)))
}

/// Quadratic `J̃(Φ) = Σ_k tr(V_k Φ W_k Φᵀ) + 2⟨G, Φ⟩ + c` over the entries of
/// `Φ` allowed by a 0/1 mask.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentSubproblem {
    pub agent: Option<usize>,
    dims: Dims,
    terms: Vec<(Mat, Mat)>,
    linear: Mat,
    constant: f64,
    mask: Mat,
    ridge: f64,
}

impl AgentSubproblem {
    /// `terms` are `(V_k, W_k)` pairs of symmetric PSD matrices of sizes
    /// `NpT` and `NnT`.
    pub fn from_terms(
        dims: Dims,
        terms: Vec<(Mat, Mat)>,
        linear: Mat,
        constant: f64,
        mask: Mat,
        ridge: f64,
    ) -> Result<Self> {
        let (rows, cols) = (dims.stacked_input(), dims.stacked_estimate());
        for (v, w) in &terms {
            crate::linalg::check_shape(v, rows, rows, "subproblem left factor")?;
            crate::linalg::check_shape(w, cols, cols, "subproblem right factor")?;
        }
        crate::linalg::check_shape(&linear, rows, cols, "subproblem linear term")?;
        crate::linalg::check_shape(&mask, rows, cols, "subproblem mask")?;
        if !(ridge >= 0.0) {
            return Err(Error::InvalidParameter(format!("ridge must be nonnegative, got {ridge}")));
        }
        Ok(Self {
            agent: None,
            dims,
            terms,
            linear,
            constant,
            mask,
            ridge,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn mask(&self) -> &Mat {
        &self.mask
    }

    pub fn terms(&self) -> &[(Mat, Mat)] {
        &self.terms
    }

    pub fn linear(&self) -> &Mat {
        &self.linear
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Number of free entries.
    pub fn free_entries(&self) -> usize {
        self.mask.iter().filter(|v| **v != 0.0).count()
    }

    pub fn objective(&self, phi: &Mat) -> f64 {
        let quad: f64 = self
            .terms
            .iter()
            .map(|(v, w)| trace_product(&(v * phi), &(w * phi.transpose())))
            .sum();
        quad + 2.0 * self.linear.dot(phi) + self.constant
    }

    /// Gradient restricted to the free entries (zero elsewhere).
    pub fn gradient(&self, phi: &Mat) -> Mat {
        let mut g = self.linear.clone();
        for (v, w) in &self.terms {
            g += v * phi * w;
        }
        (g * 2.0).component_mul(&self.mask)
    }

    /// Free entries in column-major order.
    fn free_indices(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for c in 0..self.mask.ncols() {
            for r in 0..self.mask.nrows() {
                if self.mask[(r, c)] != 0.0 {
                    out.push((r, c));
                }
            }
        }
        out
    }
}

/// Assemble agent `i`'s subproblem from its horizon error covariance `Σ_i`.
///
/// The disturbance statistics are the unconditional `μ_w`, `Σ_w`; the free
/// entries are the causal ones.
pub fn build_agent_subproblem(
    agent: usize,
    sigma_i: &Mat,
    ops: &HorizonOperators,
    cfg: &SynthesisConfig,
) -> Result<AgentSubproblem> {
    let d = ops.dims();
    check_weights(cfg, d)?;
    crate::linalg::check_shape(sigma_i, d.stacked_state(), d.stacked_state(), "Sigma_i")?;
    let (q, r, c) = (&cfg.q, &cfg.r, &ops.c);
    let mu = Mat::from_column_slice(ops.mu_w.len(), 1, ops.mu_w.as_slice());
    let s = &ops.sigma_w + &mu * mu.transpose();
    let p11s = &ops.p11 * &s * ops.p11.transpose();

    let v = ops.p12.transpose() * q * &ops.p12 + r;
    let w = c * (&p11s + sigma_i) * c.transpose();
    let linear = ops.p12.transpose() * q * &p11s * c.transpose();
    let constant = trace_product(q, &p11s);
    let mask = ops.masks(&crate::model::NetworkTopology::complete(d.agents)).causal;
    let mut sub = AgentSubproblem::from_terms(
        d,
        vec![(crate::linalg::symmetrize(&v), crate::linalg::symmetrize(&w))],
        linear,
        constant,
        mask,
        cfg.ridge,
    )?;
    sub.agent = Some(agent);
    Ok(sub)
}

/// Minimize the subproblem over its free entries by the normal equations.
///
/// The Hessian `Σ_k W_k ⊗ V_k` restricted to the free entries gets a ridge of
/// `ridge · tr/dim` before the Cholesky solve.
pub fn solve_agent_subproblem(sub: &AgentSubproblem) -> Result<PhiParameter> {
    let free = sub.free_indices();
    let f = free.len();
    let mut phi = Mat::zeros(sub.mask.nrows(), sub.mask.ncols());
    if f == 0 {
        return PhiParameter::new(phi, sub.dims);
    }
    let rows: Vec<Vec<f64>> = free
        .par_iter()
        .map(|&(a, b)| {
            free.iter()
                .map(|&(c, e)| sub.terms.iter().map(|(v, w)| v[(a, c)] * w[(e, b)]).sum())
                .collect()
        })
        .collect();
    let mut k = Mat::from_fn(f, f, |p, q| rows[p][q]);
    k = crate::linalg::symmetrize(&k);
    let tr = k.trace();
    let scale = if tr > 0.0 { tr / f as f64 } else { 1.0 };
    for p in 0..f {
        k[(p, p)] += sub.ridge * scale;
    }
    let rhs = crate::linalg::Vector::from_iterator(f, free.iter().map(|&(a, b)| -sub.linear[(a, b)]));
    let chol = k.cholesky().ok_or_else(|| {
        Error::NumericalFailure(format!(
            "normal equations of a {f}-entry subproblem are not positive definite; raise the ridge"
        ))
    })?;
    let sol = chol.solve(&rhs);
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("subproblem solution is not finite".into()));
    }
    for (p, &(a, b)) in free.iter().enumerate() {
        phi[(a, b)] = sol[p];
    }
    PhiParameter::new(phi, sub.dims)
}

/// Solve and map back: `ⁱF = h(Φ*)`.
pub fn solve_agent_law(sub: &AgentSubproblem, ops: &HorizonOperators) -> Result<ControlLaw> {
    Ok(h_map(&solve_agent_subproblem(sub)?, ops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{design_estimator, extract_horizon_covariances};
    use crate::horizon::{build_horizon, h_inverse};
    use crate::linalg::max_abs;
    use crate::model::NetworkTopology;
    use crate::scenarios;

    fn one_step() -> (crate::model::ValidatedInstance, HorizonOperators) {
        let inst = scenarios::scalar_single_agent(1, 1.0, 1.0, 1.0, 1.0).unwrap();
        let ops = build_horizon(&inst).unwrap();
        (inst, ops)
    }

    #[test]
    fn open_loop_cost_is_trace_of_p11_squared() {
        let (inst, ops) = one_step();
        let d = inst.dims();
        let covs = HorizonCovariances::zero(d);
        let rep = evaluate_global_cost(&ControlLaw::zeros(d), &covs, &ops, inst.config()).unwrap();
        assert!((rep.total - 3.0).abs() < 1e-14);
        assert!((rep.total - (ops.p11.transpose() * &ops.p11).trace()).abs() < 1e-14);
    }

    #[test]
    fn zero_state_weight_costs_nothing_open_loop() {
        let (inst, ops) = one_step();
        let d = inst.dims();
        let mut cfg = inst.config().clone();
        cfg.q = Mat::zeros(2, 2);
        let rep = evaluate_global_cost(&ControlLaw::zeros(d), &HorizonCovariances::zero(d), &ops, &cfg).unwrap();
        assert_eq!(rep.total, 0.0);
    }

    #[test]
    fn mean_term_scales_quadratically() {
        let (inst, mut ops) = one_step();
        let d = inst.dims();
        ops.sigma_w = Mat::zeros(2, 2);
        ops.mu_w = crate::linalg::Vector::from_vec(vec![1.0, -0.5]);
        let law = ControlLaw::zeros(d);
        let covs = HorizonCovariances::zero(d);
        let base = evaluate_global_cost(&law, &covs, &ops, inst.config()).unwrap().total;
        ops.mu_w *= 3.0;
        let scaled = evaluate_global_cost(&law, &covs, &ops, inst.config()).unwrap().total;
        assert!((scaled - 9.0 * base).abs() < 1e-12 * scaled);
    }

    #[test]
    fn components_sum_to_total() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::path(5)).unwrap();
        let ops = build_horizon(&inst).unwrap();
        let law = ControlLaw::static_gain(&(Mat::identity(5, 5) * -0.5), inst.dims()).unwrap();
        let (_, cov) = design_estimator(&law, &inst).unwrap();
        let covs = extract_horizon_covariances(&cov);
        let rep = evaluate_global_cost(&law, &covs, &ops, inst.config()).unwrap();
        let by_source = rep.disturbance + rep.error + rep.cross + rep.mean;
        assert!((rep.total - by_source).abs() <= 1e-9 * rep.total);
        assert!((rep.total - rep.state_cost - rep.input_cost).abs() <= 1e-9 * rep.total);
        assert!(rep.total > 0.0 && rep.error >= 0.0 && rep.disturbance >= 0.0);
    }

    #[test]
    fn one_step_subproblem_gives_minus_half() {
        let (inst, ops) = one_step();
        let zero = Mat::zeros(2, 2);
        let sub = build_agent_subproblem(0, &zero, &ops, inst.config()).unwrap();
        assert_eq!(sub.free_entries(), 1);
        let phi = solve_agent_subproblem(&sub).unwrap();
        assert!((phi.matrix()[(0, 0)] + 0.5).abs() < 1e-10);
        let law = h_map(&phi, &ops);
        assert!((law.matrix()[(0, 0)] + 0.5).abs() < 1e-10);
        // (x0 + u0)² + u0² + x0² + w0 terms at u0 = −x0/2: 1/2 + 1 + 1
        assert!((sub.objective(phi.matrix()) - 2.5).abs() < 1e-9);
    }

    #[test]
    fn zero_state_weight_gives_zero_phi() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::ring(5)).unwrap();
        let ops = build_horizon(&inst).unwrap();
        let mut cfg = inst.config().clone();
        cfg.q = Mat::zeros(cfg.q.nrows(), cfg.q.ncols());
        let sigma = Mat::identity(30, 30);
        let sub = build_agent_subproblem(2, &sigma, &ops, &cfg).unwrap();
        assert_eq!(sub.free_entries(), 375);
        let phi = solve_agent_subproblem(&sub).unwrap();
        assert!(max_abs(phi.matrix()) < 1e-12);
    }

    #[test]
    fn zero_noise_selects_zero_phi() {
        let (inst, mut ops) = one_step();
        ops.sigma_w = Mat::zeros(2, 2);
        let sub = build_agent_subproblem(0, &Mat::zeros(2, 2), &ops, inst.config()).unwrap();
        let phi = solve_agent_subproblem(&sub).unwrap();
        assert_eq!(max_abs(phi.matrix()), 0.0);
        assert_eq!(sub.objective(phi.matrix()), 0.0);
        assert_eq!(sub.objective(&Mat::from_element(1, 1, 4.0)), 0.0);
    }

    #[test]
    fn agent_view_matches_subproblem_on_five_agents() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::path(5)).unwrap();
        let ops = build_horizon(&inst).unwrap();
        let law = ControlLaw::static_gain(&(Mat::identity(5, 5) * -0.3), inst.dims()).unwrap();
        let (_, cov) = design_estimator(&law, &inst).unwrap();
        let covs = extract_horizon_covariances(&cov);
        for i in 0..5 {
            let sub = build_agent_subproblem(i, covs.agent(i), &ops, inst.config()).unwrap();
            let direct = agent_view_cost(&law, covs.agent(i), &ops, inst.config()).unwrap();
            let convex = sub.objective(h_inverse(&law, &ops).matrix());
            assert!((direct - convex).abs() <= 1e-9 * direct.max(1.0));
        }
    }

    #[test]
    fn solution_is_stationary_and_beats_zero() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::path(5)).unwrap();
        let ops = build_horizon(&inst).unwrap();
        let (_, cov) = design_estimator(&ControlLaw::zeros(inst.dims()), &inst).unwrap();
        let covs = extract_horizon_covariances(&cov);
        let sub = build_agent_subproblem(3, covs.agent(3), &ops, inst.config()).unwrap();
        let phi = solve_agent_subproblem(&sub).unwrap();
        let best = sub.objective(phi.matrix());
        assert!(best <= sub.objective(&Mat::zeros(25, 25)));
        let g = sub.gradient(phi.matrix());
        assert!(g.norm() <= 1e-6 * (1.0 + best.abs()), "gradient norm {}", g.norm());
    }
}
