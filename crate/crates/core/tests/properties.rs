mod common;

use common::{random_instance, random_topology};
use distctl::{
    build_horizon, check_convergence, design_estimator, evaluate_global_cost, extract_horizon_covariances,
    h_inverse, h_map, mix_gains, ControlLaw, ConvergenceDecision, Dims, Mat, PhiParameter, StopMode,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn causal(rng: &mut impl Rng, d: Dims, scale: f64) -> Mat {
    let (np, nn) = (d.mas_input(), d.mas_state());
    Mat::from_fn(d.stacked_input(), d.stacked_estimate(), |r, c| {
        if c / nn <= r / np {
            rng.gen_range(-scale..scale)
        } else {
            0.0
        }
    })
}

fn max_abs(m: &Mat) -> f64 {
    m.amax()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn h_map_round_trips(seed in any::<u64>(), agents in 1usize..4, horizon in 1usize..5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let topo = random_topology(&mut rng, agents);
        let inst = random_instance(&mut rng, agents, horizon, topo);
        let ops = build_horizon(&inst).unwrap();
        let d = inst.dims();
        let phi = PhiParameter::new(causal(&mut rng, d, 1.0), d).unwrap();
        let back = h_inverse(&h_map(&phi, &ops), &ops);
        prop_assert!(max_abs(&(back.matrix() - phi.matrix())) <= 1e-9 * max_abs(phi.matrix()).max(1.0));
        let law = ControlLaw::new(causal(&mut rng, d, 1.0), d).unwrap();
        let again = h_map(&h_inverse(&law, &ops), &ops);
        prop_assert!(max_abs(&(again.matrix() - law.matrix())) <= 1e-9 * max_abs(law.matrix()).max(1.0));
    }

    #[test]
    fn mixing_identical_laws_is_identity(seed in any::<u64>(), agents in 1usize..5, horizon in 1usize..5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = Dims::new(agents, 1, 1, horizon);
        let law = ControlLaw::new(causal(&mut rng, d, 2.0), d).unwrap();
        let mixed = mix_gains(&vec![law.clone(); agents]).unwrap();
        prop_assert_eq!(mixed.matrix(), law.matrix());
    }

    #[test]
    fn mixing_takes_each_agents_own_rows(seed in any::<u64>(), agents in 1usize..5, horizon in 1usize..4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = Dims::new(agents, 1, 1, horizon);
        let laws: Vec<ControlLaw> = (0..agents).map(|_| ControlLaw::new(causal(&mut rng, d, 1.0), d).unwrap()).collect();
        let mixed = mix_gains(&laws).unwrap();
        for r in 0..d.stacked_input() {
            // Scalar inputs: row `r` belongs to agent `r mod N`.
            prop_assert_eq!(mixed.matrix().row(r), laws[r % agents].matrix().row(r));
        }
        let twice = mix_gains(&vec![mixed.clone(); agents]).unwrap();
        prop_assert_eq!(twice, mixed);
    }

    #[test]
    fn error_covariances_are_symmetric_psd(seed in any::<u64>(), agents in 1usize..4, horizon in 1usize..5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let topo = random_topology(&mut rng, agents);
        let inst = random_instance(&mut rng, agents, horizon, topo);
        let d = inst.dims();
        let law = ControlLaw::new(causal(&mut rng, d, 0.8), d).unwrap();
        let (gains, cov) = design_estimator(&law, &inst).unwrap();
        for i in 0..agents {
            for t in 0..=horizon {
                let s = cov.agent(i, t);
                let scale = max_abs(&s).max(1.0);
                prop_assert!(max_abs(&(&s - s.transpose())) <= 1e-10 * scale);
                let min = s.clone().symmetric_eigen().eigenvalues.min();
                prop_assert!(min >= -1e-9 * scale, "agent {} t {}: {}", i, t, min);
                prop_assert!(max_abs(&(gains.agent_covariance(i, t) - &s)) <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn cost_is_nonnegative_and_components_add_up(seed in any::<u64>(), agents in 1usize..4, horizon in 1usize..5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let topo = random_topology(&mut rng, agents);
        let inst = random_instance(&mut rng, agents, horizon, topo);
        let d = inst.dims();
        let ops = build_horizon(&inst).unwrap();
        let law = ControlLaw::new(causal(&mut rng, d, 0.8), d).unwrap();
        let (_, cov) = design_estimator(&law, &inst).unwrap();
        let c = evaluate_global_cost(&law, &extract_horizon_covariances(&cov), &ops, inst.config()).unwrap();
        let tol = 1e-10 * c.total.abs().max(1.0);
        prop_assert!(c.total >= -tol);
        prop_assert!(c.disturbance >= -tol && c.error >= -tol && c.mean >= -tol);
        prop_assert!((c.state_cost + c.input_cost - c.total).abs() <= tol);
        prop_assert!((c.disturbance + c.error + c.cross + c.mean - c.total).abs() <= tol);
    }

    #[test]
    fn stopping_rule_depends_only_on_the_tail(
        costs in prop::collection::vec(0.0f64..100.0, 0..12),
        prefix in prop::collection::vec(0.0f64..100.0, 0..12),
        eps in 1e-9f64..1.0,
        n_max in 1usize..20,
        relative in any::<bool>(),
    ) {
        let mode = if relative { StopMode::Relative } else { StopMode::Absolute };
        let first = check_convergence(&costs, eps, mode, n_max);
        prop_assert_eq!(first, check_convergence(&costs, eps, mode, n_max));

        if costs.len() >= 2 {
            let mut replaced = prefix.clone();
            replaced.truncate(costs.len() - 2);
            replaced.resize(costs.len() - 2, 1.0);
            replaced.extend_from_slice(&costs[costs.len() - 2..]);
            prop_assert_eq!(first, check_convergence(&replaced, eps, mode, n_max));
        }
        if costs.len() >= n_max {
            prop_assert!(first.should_stop());
        }
        if costs.len() < 2 && costs.len() < n_max {
            prop_assert_eq!(first, ConvergenceDecision::Continue);
        }
        if let [.., a, b] = costs[..] {
            let scale = if relative { a.abs().max(1.0) } else { 1.0 };
            prop_assert_eq!(first == ConvergenceDecision::Converged, (b - a).abs() <= eps * scale);
        }
    }
}
