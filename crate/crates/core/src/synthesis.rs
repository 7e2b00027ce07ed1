//! The outer co-design loop: estimator design, per-agent control design,
//! mixing, evaluation.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::control::{build_agent_subproblem, evaluate_global_cost, solve_agent_law, CostReport};
use crate::error::{Error, Result};
use crate::estimator::{design_estimator, extract_horizon_covariances, EstimatorGains};
use crate::horizon::{agent_projector, build_horizon, ControlLaw};
use crate::model::{StopMode, ValidatedInstance};

/// `F = Σ_i 𝓜_i ⁱF`: agent `i`'s input rows come from `ⁱF`.
pub fn mix_gains(agent_laws: &[ControlLaw]) -> Result<ControlLaw> {
    let first = agent_laws
        .first()
        .ok_or_else(|| Error::InvalidParameter("no agent laws to mix".into()))?;
    let d = first.dims();
    if agent_laws.len() != d.agents {
        return Err(Error::DimensionMismatch(format!(
            "{} agent laws for {} agents",
            agent_laws.len(),
            d.agents
        )));
    }
    if let Some(bad) = agent_laws.iter().find(|l| l.dims() != d) {
        return Err(Error::DimensionMismatch(format!(
            "agent law sized for {:?}, expected {d:?}",
            bad.dims()
        )));
    }
    let mixed = agent_laws
        .iter()
        .enumerate()
        .fold(crate::linalg::Mat::zeros(d.stacked_input(), d.stacked_estimate()), |acc, (i, l)| {
            acc + agent_projector(d, i) * l.matrix()
        });
    ControlLaw::new(mixed, d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvergenceDecision {
    Continue,
    Converged,
    IterationCap,
}

impl ConvergenceDecision {
    pub fn should_stop(self) -> bool {
        self != ConvergenceDecision::Continue
    }
}

/// Stopping rule on the cost history `J^(1), J^(2), …`.
pub fn check_convergence(costs: &[f64], eps: f64, mode: StopMode, n_max: usize) -> ConvergenceDecision {
    if let [.., prev, last] = costs {
        let scale = match mode {
            StopMode::Relative => prev.abs().max(1.0),
            StopMode::Absolute => 1.0,
        };
        if (last - prev).abs() <= eps * scale {
            return ConvergenceDecision::Converged;
        }
    }
    if costs.len() >= n_max {
        ConvergenceDecision::IterationCap
    } else {
        ConvergenceDecision::Continue
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    /// Starts at 1.
    pub iteration: usize,
    pub law: ControlLaw,
    pub gains: EstimatorGains,
    pub cost: CostReport,
    /// `J^(l) − J^(l−1)`, absent for the first record.
    pub delta: Option<f64>,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SynthesisHistory {
    records: Vec<IterationRecord>,
}

impl SynthesisHistory {
    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn costs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.cost.total).collect()
    }

    /// Index of the cheapest record; the earliest wins ties.
    pub fn best(&self) -> Option<&IterationRecord> {
        self.records
            .iter()
            .fold(None, |best: Option<&IterationRecord>, r| match best {
                Some(b) if b.cost.total <= r.cost.total => Some(b),
                _ => Some(r),
            })
    }

    fn push(&mut self, mut record: IterationRecord) {
        record.iteration = self.records.len() + 1;
        record.delta = self.records.last().map(|p| record.cost.total - p.cost.total);
        self.records.push(record);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthesisResult {
    pub law: ControlLaw,
    pub gains: EstimatorGains,
    pub cost: CostReport,
    pub best_iteration: usize,
    pub stop: ConvergenceDecision,
    pub history: SynthesisHistory,
}

/// Alternate estimator and control design from `F^(0) = 0` until the cost
/// settles or `n_max` iterates are stored; return the cheapest iterate.
pub fn run_synthesis(inst: &ValidatedInstance) -> Result<SynthesisResult> {
    let cfg = inst.config();
    if cfg.n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    if !(cfg.eps_stop > 0.0) {
        return Err(Error::InvalidParameter(format!("eps_stop must be positive, got {}", cfg.eps_stop)));
    }
    let d = inst.dims();
    let ops = build_horizon(inst)?;
    let (_, mut cov) = design_estimator(&ControlLaw::zeros(d), inst).map_err(|e| e.at_iteration(1))?;
    let mut history = SynthesisHistory::default();

    let stop = loop {
        let l = history.len() + 1;
        let started = Instant::now();
        let mut step = || -> Result<IterationRecord> {
            let covs = extract_horizon_covariances(&cov);
            let laws = (0..d.agents)
                .into_par_iter()
                .map(|i| {
                    let sub = build_agent_subproblem(i, covs.agent(i), &ops, cfg)?;
                    solve_agent_law(&sub, &ops)
                })
                .collect::<Result<Vec<_>>>()?;
            let mixed = mix_gains(&laws)?;
            let (gains, next_cov) = design_estimator(&mixed, inst)?;
            let cost = evaluate_global_cost(&mixed, &extract_horizon_covariances(&next_cov), &ops, cfg)?;
            if !cost.total.is_finite() {
                return Err(Error::NumericalFailure("cost is not finite".into()));
            }
            cov = next_cov;
            Ok(IterationRecord {
                iteration: l,
                law: mixed,
                gains,
                cost,
                delta: None,
                elapsed: Duration::ZERO,
            })
        };
        let mut record = step().map_err(|e| e.at_iteration(l))?;
        record.elapsed = started.elapsed();
        history.push(record);
        log::debug!("iteration {l}: J = {}", history.costs()[l - 1]);
        let decision = check_convergence(&history.costs(), cfg.eps_stop, cfg.stop_mode, cfg.n_max);
        if decision.should_stop() {
            break decision;
        }
    };

    let best = history.best().expect("at least one iterate").clone();
    Ok(SynthesisResult {
        law: best.law,
        gains: best.gains,
        cost: best.cost,
        best_iteration: best.iteration,
        stop,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::model::{Dims, NetworkTopology};
    use crate::scenarios;

    #[test]
    fn mixing_selects_agent_rows() {
        let d = Dims::new(2, 1, 1, 1);
        let a = ControlLaw::new(Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]), d).unwrap();
        let b = ControlLaw::new(Mat::from_row_slice(2, 2, &[5.0, 6.0, 7.0, 8.0]), d).unwrap();
        let mixed = mix_gains(&[a.clone(), b]).unwrap();
        assert_eq!(mixed.matrix(), &Mat::from_row_slice(2, 2, &[1.0, 2.0, 7.0, 8.0]));
        assert_eq!(mix_gains(&[a.clone(), a.clone()]).unwrap(), a);
        let again = mix_gains(&[mixed.clone(), mixed.clone()]).unwrap();
        assert_eq!(again, mixed);
        assert!(mix_gains(&[a]).is_err());
    }

    #[test]
    fn three_agent_mix_concatenates_rows() {
        let d = Dims::new(3, 1, 2, 2);
        let laws: Vec<ControlLaw> = (0..3)
            .map(|i| {
                let m = Mat::from_fn(12, 6, |r, c| if c / 3 <= r / 6 { (i * 100 + r * 6 + c) as f64 } else { 0.0 });
                ControlLaw::new(m, d).unwrap()
            })
            .collect();
        let mixed = mix_gains(&laws).unwrap();
        for r in 0..12 {
            let owner = (r % 6) / 2;
            assert_eq!(mixed.matrix().row(r), laws[owner].matrix().row(r));
        }
    }

    #[test]
    fn convergence_rule() {
        let (eps, rel) = (1e-6, StopMode::Relative);
        assert_eq!(check_convergence(&[10.0, 10.0], eps, rel, 50), ConvergenceDecision::Converged);
        assert_eq!(check_convergence(&[10.0, 5.0], eps, rel, 50), ConvergenceDecision::Continue);
        assert_eq!(check_convergence(&[10.0], eps, rel, 50), ConvergenceDecision::Continue);
        assert_eq!(check_convergence(&[10.0], eps, rel, 1), ConvergenceDecision::IterationCap);
        assert_eq!(check_convergence(&[1e6, 1e6 + 0.5], eps, rel, 50), ConvergenceDecision::Converged);
        assert_eq!(
            check_convergence(&[1e6, 1e6 + 0.5], eps, StopMode::Absolute, 50),
            ConvergenceDecision::Continue
        );
    }

    #[test]
    fn zero_noise_stops_at_second_iterate() {
        let inst = scenarios::scalar_single_agent(3, 1.0, 0.0, 1.0, 0.0).unwrap();
        let res = run_synthesis(&inst).unwrap();
        assert_eq!(res.history.costs(), vec![0.0, 0.0]);
        assert_eq!(res.stop, ConvergenceDecision::Converged);
        assert_eq!(res.best_iteration, 1);
    }

    #[test]
    fn best_iterate_is_history_minimum() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::path(5)).unwrap();
        let res = run_synthesis(&inst).unwrap();
        let costs = res.history.costs();
        assert!(costs.len() <= 50);
        let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(res.cost.total, min);
        assert!(costs.iter().all(|c| *c >= 0.0 && c.is_finite()));
        for (k, r) in res.history.records().iter().enumerate() {
            assert_eq!(r.iteration, k + 1);
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::ring(5)).unwrap();
        let a = run_synthesis(&inst).unwrap();
        let b = run_synthesis(&inst).unwrap();
        assert_eq!(a.history.costs(), b.history.costs());
        assert_eq!(a.law, b.law);
    }

    #[test]
    fn single_iterate_cap() {
        let inst = scenarios::five_agent_consensus(NetworkTopology::path(5)).unwrap();
        let mut cfg = inst.config().clone();
        cfg.n_max = 1;
        let res = run_synthesis(&inst.with_config(cfg).unwrap()).unwrap();
        assert_eq!(res.history.len(), 1);
        assert_eq!(res.stop, ConvergenceDecision::IterationCap);
    }
}
