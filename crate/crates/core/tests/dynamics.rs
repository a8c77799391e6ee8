mod support;

use spikefem_core::faults::FaultRealization;
use spikefem_core::harness::{relative_error, trial_seed, SINGLE_RUN_TAG};
use spikefem_core::*;

fn paper_system() -> FemSystem {
    let mesh = build_unit_square_mesh(17).unwrap();
    assemble(&mesh, evaluate_rhs).unwrap()
}

#[test]
fn step_matches_dense_weight_formulation() {
    let report = support::dense_oracle::compare_random_cases(50, 7);
    assert!(report.max_deviation <= 1e-12, "max deviation {}", report.max_deviation);
    assert!(report.multi_spike_cases >= 5, "{} of {} cases fired more than one spike", report.multi_spike_cases, report.cases);
}

#[test]
fn readout_replays_from_spike_log() {
    let system = paper_system();
    let cfg = NetworkConfig { t_total: 2.0, ..Default::default() };
    let net = build_network(&system, &cfg).unwrap();
    let spec = FaultSpec { ablation_p: 0.2, drop_p: 0.5 };
    let faults = FaultRealization::new(net.n_neurons(), spec, 11).unwrap();
    let mut sim = Simulator::new(&net, faults, true);
    let n_steps = cfg.n_steps();
    for _ in 0..n_steps {
        sim.step().unwrap();
    }

    let decay = 1.0 - cfg.lambda_d * cfg.dt;
    let mut x = vec![0.0; net.readout.n_dofs()];
    let events = &sim.spike_log().unwrap().events;
    let mut e = 0;
    for step in 0..n_steps {
        while e < events.len() && events[e].step == step {
            let k = events[e].neuron;
            if events[e].delivered {
                x[net.readout.row(k)] += net.readout.value(k);
            }
            e += 1;
        }
        x.iter_mut().for_each(|v| *v *= decay);
    }
    assert_eq!(e, events.len());
    for (a, b) in x.iter().zip(&sim.state.x_hat) {
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn spikes_only_above_threshold_and_never_from_ablated() {
    let system = paper_system();
    let cfg = NetworkConfig { t_total: 2.0, ..Default::default() };
    let net = build_network(&system, &cfg).unwrap();
    let faults = FaultRealization::new(net.n_neurons(), FaultSpec { ablation_p: 0.3, drop_p: 0.3 }, 5).unwrap();
    let mut sim = Simulator::new(&net, faults, true);
    let mut decisions = 0;
    for _ in 0..cfg.n_steps() {
        sim.step().unwrap();
        for &(k, v) in sim.last_decisions() {
            assert!(v > net.thresholds[k]);
            assert!(!sim.faults.is_ablated(k));
            decisions += 1;
        }
    }
    assert!(decisions > 0);
    let log = sim.spike_log().unwrap();
    assert_eq!(log.events.len(), decisions);
    let mut seen = std::collections::HashSet::new();
    for ev in &log.events {
        assert!(!sim.faults.is_ablated(ev.neuron));
        assert!(seen.insert((ev.step, ev.neuron)), "duplicate event");
    }
    for (k, v) in sim.state.v.iter().enumerate() {
        if sim.faults.is_ablated(k) {
            assert_eq!(*v, 0.0);
        }
    }
}

#[test]
fn runs_are_deterministic_and_zero_faults_match_none() {
    let system = paper_system();
    let cfg = NetworkConfig { t_total: 3.0, ..Default::default() };
    let net = build_network(&system, &cfg).unwrap();
    let seed = trial_seed(1, SINGLE_RUN_TAG, 0, 0);
    let a = sim::run(&net, FaultSpec::NONE, seed, true).unwrap();
    let b = sim::run(&net, FaultSpec { ablation_p: 0.0, drop_p: 0.0 }, seed, true).unwrap();
    assert_eq!(a, b);
    let c = sim::run(&net, FaultSpec { ablation_p: 0.3, drop_p: 0.2 }, seed, true).unwrap();
    let d = sim::run(&net, FaultSpec { ablation_p: 0.3, drop_p: 0.2 }, seed, true).unwrap();
    assert_eq!(c, d);
    let e = sim::run(&net, FaultSpec { ablation_p: 0.3, drop_p: 0.2 }, seed + 1, true).unwrap();
    assert_ne!(c.ablation_mask, e.ablation_mask);
}

#[test]
fn unperturbed_run_converges_and_respects_residual_bound() {
    let system = paper_system();
    let net = build_network(&system, &NetworkConfig::default()).unwrap();
    let cfg = &net.config;
    let faults = FaultRealization::new(net.n_neurons(), FaultSpec::NONE, 0).unwrap();
    let mut sim = Simulator::new(&net, faults, false);
    let checkpoints = [5.0, 10.0, 20.0].map(|t: f64| (t / cfg.dt).round() as usize);
    let mut errors = Vec::new();
    for s in 1..=cfg.n_steps() {
        sim.step().unwrap();
        if checkpoints.contains(&s) {
            errors.push(relative_error(&sim.state.x_hat, &net.reference).unwrap());
        }
    }
    assert_eq!(errors.len(), 3);
    for w in errors.windows(2) {
        assert!(w[1] <= 1.1 * w[0], "error envelope {errors:?}");
    }

    let trial = sim::run(&net, FaultSpec::NONE, 0, false).unwrap();
    let residual = residual_norm(&system.a, &trial.x_decoded, &system.b).unwrap();
    let bound = 3.0 * net.gamma() * system.a.norm_inf() * (system.n_dofs() as f64).sqrt();
    assert!(residual <= bound, "residual {residual} > {bound}");
    assert!(trial.relative_error.unwrap() <= 0.05);
}

#[test]
fn fully_ablated_network_has_unit_error() {
    let system = paper_system();
    let cfg = NetworkConfig { t_total: 0.5, ..Default::default() };
    let net = build_network(&system, &cfg).unwrap();
    let trial = sim::run(&net, FaultSpec { ablation_p: 1.0, drop_p: 0.0 }, 3, true).unwrap();
    assert!(trial.x_decoded.iter().all(|&x| x == 0.0));
    assert_eq!(trial.relative_error, Some(1.0));
    assert_eq!(trial.spike_count_total, 0);
    assert_eq!(trial.mean_rate_surviving, None);
}

#[test]
fn zero_load_never_spikes() {
    let mesh = build_unit_square_mesh(9).unwrap();
    let system = assemble(&mesh, |_, _| 0.0).unwrap();
    let cfg = NetworkConfig { t_total: 1.0, ..Default::default() };
    let net = build_network(&system, &cfg).unwrap();
    assert_eq!(net.gamma(), cfg.eta);
    let trial = sim::run(&net, FaultSpec::NONE, 0, true).unwrap();
    assert_eq!(trial.spike_count_total, 0);
    assert!(trial.spike_log.unwrap().events.is_empty());
    assert_eq!(trial.relative_error, None);
}
