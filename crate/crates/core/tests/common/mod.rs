#![allow(dead_code)]

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use distctl::{
    validate_model, Dims, MasModel, Mat, MeasurementNoise, NetworkTopology, ProcessNoise, SynthesisConfig,
    ValidatedInstance, Vector,
};
use rand::Rng;

pub fn scalar(v: f64) -> Mat {
    Mat::from_element(1, 1, v)
}

/// Scalar agents, per-agent noise levels, random PSD state weight.
pub fn random_instance(rng: &mut impl Rng, agents: usize, horizon: usize, topo: NetworkTopology) -> ValidatedInstance {
    let dims = Dims::new(agents, 1, 1, horizon);
    let model = MasModel {
        a: scalar(rng.gen_range(0.5..1.3)),
        b: scalar(rng.gen_range(0.5..1.5)),
        dims,
        process_noise: ProcessNoise::PerAgent((0..agents).map(|_| scalar(rng.gen_range(0.3..2.0))).collect()),
        measurement_noise: MeasurementNoise::PerPair(
            (0..agents)
                .map(|_| (0..agents).map(|_| scalar(rng.gen_range(0.3..2.0))).collect())
                .collect(),
        ),
        initial_mean: Vector::from_fn(agents, |_, _| rng.gen_range(-1.0..1.0)),
        initial_cov: Mat::identity(agents, agents) * rng.gen_range(0.5..2.0),
        initial_joint_cov: None,
    };
    let s = dims.stacked_state();
    let l = Mat::from_fn(s, s, |_, _| rng.gen_range(-1.0..1.0));
    let q = &l * l.transpose() / s as f64;
    let r = Mat::identity(dims.stacked_input(), dims.stacked_input()) * rng.gen_range(0.5..2.0);
    validate_model(model, topo, SynthesisConfig::new(q, r)).unwrap()
}

pub fn random_topology(rng: &mut impl Rng, agents: usize) -> NetworkTopology {
    let links: Vec<_> = (0..agents)
        .flat_map(|i| (i + 1..agents).map(move |j| (i, j)))
        .filter(|_| rng.gen_bool(0.6))
        .collect();
    NetworkTopology::from_links(agents, &links, true, true).unwrap()
}

struct Objective<F: Fn(&[f64]) -> f64>(F);

impl<F: Fn(&[f64]) -> f64> CostFunction for Objective<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, argmin::core::Error> {
        Ok((self.0)(p))
    }
}

/// Nelder–Mead, restarted from the incumbent until a restart stops helping.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64 + Copy, x0: Vec<f64>, step: f64) -> (Vec<f64>, f64) {
    let mut best = x0;
    let mut best_cost = f(&best);
    for _ in 0..40 {
        let mut simplex = vec![best.clone()];
        for k in 0..best.len() {
            let mut v = best.clone();
            v[k] += step;
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex).with_sd_tolerance(1e-14).unwrap();
        let res = Executor::new(Objective(f), solver)
            .configure(|s| s.max_iters(20_000))
            .run()
            .unwrap();
        let cost = res.state().best_cost;
        let gain = best_cost - cost;
        if cost < best_cost {
            best = res.state().best_param.clone().unwrap();
            best_cost = cost;
        }
        if gain <= 1e-13 * best_cost.abs().max(1.0) {
            break;
        }
    }
    (best, best_cost)
}
