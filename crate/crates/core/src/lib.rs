//! Distributed estimation and control synthesis for networked multi-agent systems.

pub mod config;
pub mod control;
pub mod error;
pub mod estimator;
pub mod horizon;
pub mod linalg;
pub mod model;
pub mod scenarios;
pub mod simulate;
pub mod stability;
pub mod synthesis;

pub use config::{load_config, parse_config, TopologySpec};
pub use error::{Error, Result};
pub use estimator::{
    build_error_operators, design_estimator, extract_horizon_covariances, online_update,
    AgentBelief, ClosedLoopErrorOperators, EstimatorGains, HorizonCovariances,
    JointErrorCovariance,
};
pub use horizon::{
    apply_mask, build_horizon, h_inverse, h_map, ControlLaw, HorizonOperators, MaskKind,
    PhiParameter, SparsityMask,
};
pub use linalg::{Mat, Vector};
pub use model::{
    validate_model, Dims, MasModel, MeasurementNoise, NetworkTopology, ProcessNoise, StopMode,
    SynthesisConfig, ValidatedInstance, ValidationWarning,
};
pub use control::{
    agent_view_cost, build_agent_subproblem, evaluate_global_cost, solve_agent_law,
    solve_agent_subproblem, AgentSubproblem, CostReport,
};
pub use synthesis::{
    check_convergence, mix_gains, run_synthesis, ConvergenceDecision, IterationRecord,
    SynthesisHistory, SynthesisResult,
};
pub use simulate::{
    baseline_fully_connected, baseline_topology_restricted, baseline_topology_restricted_with,
    measurement_feedback_cost, monte_carlo,
    rollout, rollout_with_noise, sample_noise, topology_sweep, topology_sweep_over, BatchStats, Controller,
    NoiseRealization, RestrictedBaseline, Rollout, SweepRow,
};
pub use stability::{
    lyapunov_decrement_check, observability_check, propagate_affine_map, verify_affine_identity,
    AffineMapState, LyapunovEntry, ObservabilityReport, StaticGain,
};
