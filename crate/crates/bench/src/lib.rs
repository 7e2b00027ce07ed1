//! Fixtures shared by the benchmarks.

use distctl::{scenarios, ControlLaw, Mat, NetworkTopology, ValidatedInstance};

/// The five-agent consensus instance on a path graph.
pub fn five_agent_path() -> ValidatedInstance {
    scenarios::five_agent_consensus(NetworkTopology::path(5)).expect("built-in scenario")
}

/// `u_i = −k ⁱx̂_i` at every step, a cheap stabilizing starting law.
pub fn diagonal_law(inst: &ValidatedInstance, k: f64) -> ControlLaw {
    let d = inst.dims();
    let gain = Mat::from_fn(d.mas_input(), d.mas_state(), |r, c| if r == c { -k } else { 0.0 });
    ControlLaw::static_gain(&gain, d).expect("square diagonal gain")
}
