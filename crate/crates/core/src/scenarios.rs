//! Ready-made instances used by tests, benches and the CLI defaults.

use crate::error::Result;
use crate::linalg::{Mat, Vector};
use crate::model::{
    validate_model, Dims, MasModel, MeasurementNoise, NetworkTopology, ProcessNoise,
    SynthesisConfig, ValidatedInstance,
};

/// Five scalar integrators (`A = B = 1`) with unit process noise, a noisier
/// sensor on agent 4, horizon 5, and a stage cost that penalizes disagreement
/// between agents: `Q = I_6 ⊗ (5 I_5 − 1 1ᵀ)`, `R = I_25`.
///
/// The initial state is `N(0, I_5)`.
pub fn five_agent_consensus(topology: NetworkTopology) -> Result<ValidatedInstance> {
    let agents = 5;
    let dims = Dims::new(agents, 1, 1, 5);
    let scalar = |v: f64| Mat::from_element(1, 1, v);
    let model = MasModel {
        a: scalar(1.0),
        b: scalar(1.0),
        dims,
        process_noise: ProcessNoise::Constant(scalar(1.0)),
        measurement_noise: MeasurementNoise::PerTarget(
            [1.0, 1.0, 1.0, 2.0, 1.0].iter().map(|v| scalar(*v)).collect(),
        ),
        initial_mean: Vector::zeros(agents),
        initial_cov: Mat::identity(agents, agents),
        initial_joint_cov: None,
    };
    let q_stage = Mat::identity(agents, agents) * 5.0 - Mat::from_element(agents, agents, 1.0);
    let config = SynthesisConfig::from_stage_weights(dims, &q_stage, &Mat::identity(agents, agents));
    validate_model(model, topology, config)
}

/// Single scalar agent measuring itself: `x(t+1) = a x(t) + u(t) + w(t)`,
/// `Θ = theta`, `Ξ = xi`, `Σ0 = sigma0`, unit weights.
pub fn scalar_single_agent(
    horizon: usize,
    a: f64,
    theta: f64,
    xi: f64,
    sigma0: f64,
) -> Result<ValidatedInstance> {
    let dims = Dims::new(1, 1, 1, horizon);
    let scalar = |v: f64| Mat::from_element(1, 1, v);
    let model = MasModel {
        a: scalar(a),
        b: scalar(1.0),
        dims,
        process_noise: ProcessNoise::Constant(scalar(theta)),
        measurement_noise: MeasurementNoise::Constant(scalar(xi)),
        initial_mean: Vector::zeros(1),
        initial_cov: scalar(sigma0),
        initial_joint_cov: None,
    };
    let mut config = SynthesisConfig::from_stage_weights(dims, &scalar(1.0), &scalar(1.0));
    config.allow_singular_process_noise = theta == 0.0;
    validate_model(model, NetworkTopology::isolated(1), config)
}
