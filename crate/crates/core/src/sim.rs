//! Clocked simulation of the spike-coding network.
//!
//! One step of length `dt`:
//!
//! 1. every surviving neuron integrates `−λ_d·v + Γᵀ(b + (λ_d·I − A)·x̂)`;
//! 2. within each DOF, neurons above threshold spike one at a time in order of
//!    decreasing voltage, each at most once per step, and each re-checked
//!    against its threshold after the earlier spikes of that step;
//! 3. a spike may be lost to the drop model;
//! 4. the emitter resets by γ² whether or not the spike was delivered;
//! 5. a delivered spike inhibits its siblings through ΓᵀΓ and adds its Γ
//!    column to the readout;
//! 6. the readout decays by `(1 − λ_d·dt)`.
//!
//! Voltage ties are resolved round-robin per DOF so that identical siblings
//! share the load.

use alloc::vec::Vec;

use crate::encoder::Network;
use crate::error::{Error, Result};
use crate::faults::{FaultRealization, FaultSpec};
use crate::harness::relative_error;

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub v: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub t: f64,
    pub step_index: usize,
    /// Tie-breaking cursor per DOF and sign, indexed `2 * dof + (sign < 0)`.
    pub turn: Vec<usize>,
}

impl SimState {
    pub fn at_rest(net: &Network<'_>) -> Self {
        Self {
            v: alloc::vec![0.0; net.n_neurons()],
            x_hat: alloc::vec![0.0; net.readout.n_dofs()],
            t: 0.0,
            step_index: 0,
            turn: alloc::vec![0; 2 * net.readout.n_dofs()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpikeEvent {
    pub step: usize,
    pub neuron: usize,
    pub delivered: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpikeLog {
    pub events: Vec<SpikeEvent>,
}

impl SpikeLog {
    pub fn delivered_count(&self) -> usize {
        self.events.iter().filter(|e| e.delivered).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepReport {
    pub emitted: usize,
    pub delivered: usize,
}

pub struct Simulator<'a, 'n> {
    net: &'a Network<'n>,
    pub state: SimState,
    pub faults: FaultRealization,
    drive: Vec<f64>,
    fired: Vec<bool>,
    decisions: Vec<(usize, f64)>,
    log: Option<SpikeLog>,
    spikes_total: u64,
    spikes_delivered: u64,
}

impl<'a, 'n> Simulator<'a, 'n> {
    pub fn new(net: &'a Network<'n>, faults: FaultRealization, keep_log: bool) -> Self {
        Self::with_state(net, SimState::at_rest(net), faults, keep_log)
    }

    pub fn with_state(net: &'a Network<'n>, mut state: SimState, faults: FaultRealization, keep_log: bool) -> Self {
        let m = net.n_neurons();
        assert_eq!(state.v.len(), m, "state voltage length");
        assert_eq!(state.x_hat.len(), net.readout.n_dofs(), "state readout length");
        assert_eq!(faults.ablation_mask.len(), m, "ablation mask length");
        for (v, &dead) in state.v.iter_mut().zip(&faults.ablation_mask) {
            if dead {
                *v = 0.0;
            }
        }
        Self {
            net,
            state,
            faults,
            drive: alloc::vec![0.0; net.readout.n_dofs()],
            fired: alloc::vec![false; m],
            decisions: Vec::new(),
            log: keep_log.then(SpikeLog::default),
            spikes_total: 0,
            spikes_delivered: 0,
        }
    }

    pub fn network(&self) -> &Network<'n> {
        self.net
    }

    /// Neurons that spiked in the last step with their voltage at the moment
    /// of the decision.
    pub fn last_decisions(&self) -> &[(usize, f64)] {
        &self.decisions
    }

    pub fn spike_log(&self) -> Option<&SpikeLog> {
        self.log.as_ref()
    }

    pub fn spike_counts(&self) -> (u64, u64) {
        (self.spikes_total, self.spikes_delivered)
    }

    pub fn step(&mut self) -> Result<StepReport> {
        let net = self.net;
        let cfg = &net.config;
        let (lambda, dt) = (cfg.lambda_d, cfg.dt);
        let readout = &net.readout;
        let system = net.system;
        let st = &mut self.state;
        let step = st.step_index;

        system.a.mul_vec_into(&st.x_hat, &mut self.drive);
        for ((d, &b), &x) in self.drive.iter_mut().zip(&system.b).zip(&st.x_hat) {
            *d = b + lambda * x - *d;
        }
        for k in 0..readout.n_neurons() {
            if !self.faults.is_ablated(k) {
                let v = &mut st.v[k];
                *v += dt * (-lambda * *v + readout.value(k) * self.drive[readout.row(k)]);
            }
        }

        self.decisions.clear();
        let npm = readout.npm();
        let mut report = StepReport::default();
        for i in 0..readout.n_dofs() {
            let group = readout.neurons_of(i);
            let base = group.start;
            self.fired[group.clone()].fill(false);
            loop {
                let mut best: Option<(usize, f64, usize)> = None;
                for k in group.clone() {
                    if self.fired[k] || self.faults.is_ablated(k) {
                        continue;
                    }
                    let margin = st.v[k] - net.thresholds[k];
                    if margin <= 0.0 {
                        continue;
                    }
                    let cursor = st.turn[2 * i + readout.sign_slot(k)];
                    let rank = (k - base + npm - cursor) % npm;
                    if best.is_none_or(|(_, m, r)| margin > m || (margin == m && rank < r)) {
                        best = Some((k, margin, rank));
                    }
                }
                let Some((k, _, _)) = best else { break };

                self.fired[k] = true;
                self.decisions.push((k, st.v[k]));
                let wk = readout.value(k);
                st.v[k] -= wk * wk;
                let delivered = !self.faults.drop_spike();
                if delivered {
                    for j in group.clone() {
                        if j != k && !self.faults.is_ablated(j) {
                            st.v[j] -= readout.value(j) * wk;
                        }
                    }
                    st.x_hat[i] += wk;
                    report.delivered += 1;
                }
                report.emitted += 1;
                st.turn[2 * i + readout.sign_slot(k)] = (k - base + 1) % npm;
                if let Some(log) = self.log.as_mut() {
                    log.events.push(SpikeEvent { step, neuron: k, delivered });
                }
            }
        }

        let decay = 1.0 - lambda * dt;
        for x in &mut st.x_hat {
            *x *= decay;
        }
        if st.v.iter().chain(&st.x_hat).any(|v| !v.is_finite()) {
            return Err(Error::NumericalDivergence { step });
        }

        st.step_index += 1;
        st.t = st.step_index as f64 * dt;
        self.spikes_total += report.emitted as u64;
        self.spikes_delivered += report.delivered as u64;
        Ok(report)
    }
}

/// Running mean of readout snapshots.
#[derive(Debug, Clone)]
pub struct WindowAverage {
    mean: Vec<f64>,
    count: usize,
}

impl WindowAverage {
    pub fn new(n: usize) -> Self {
        Self { mean: alloc::vec![0.0; n], count: 0 }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let w = 1.0 / self.count as f64;
        for (m, &v) in self.mean.iter_mut().zip(x) {
            *m += (v - *m) * w;
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn into_mean(self) -> Vec<f64> {
        self.mean
    }
}

/// Time average of readout snapshots (zero vector if there are none).
pub fn decode<'s>(snapshots: impl IntoIterator<Item = &'s [f64]>, n: usize) -> Vec<f64> {
    let mut avg = WindowAverage::new(n);
    for s in snapshots {
        avg.push(s);
    }
    avg.into_mean()
}

/// Spikes (delivered or not) per surviving neuron per unit time.
pub fn mean_firing_rate(log: &SpikeLog, ablation_mask: &[bool], duration: f64) -> Result<f64> {
    if !(duration > 0.0) {
        return Err(crate::error::invalid("duration must be positive"));
    }
    let surviving = ablation_mask.iter().filter(|&&a| !a).count();
    if surviving == 0 {
        return Err(Error::UndefinedRate);
    }
    let spikes = log.events.iter().filter(|e| !ablation_mask[e.neuron]).count();
    Ok(spikes as f64 / (surviving as f64 * duration))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub faults: FaultSpec,
    pub x_decoded: Vec<f64>,
    /// Readout after the last step.
    pub x_final: Vec<f64>,
    /// `None` when the reference solution is zero.
    pub relative_error: Option<f64>,
    pub spike_count_total: u64,
    pub spike_count_delivered: u64,
    /// `None` when every neuron was ablated.
    pub mean_rate_surviving: Option<f64>,
    pub ablation_mask: Vec<bool>,
    pub spike_log: Option<SpikeLog>,
}

impl TrialResult {
    pub fn n_surviving(&self) -> usize {
        self.ablation_mask.iter().filter(|&&a| !a).count()
    }
}

/// One trial from rest: ablation drawn before the first step, drops drawn per
/// step, decoded over the trailing window.
pub fn run(net: &Network<'_>, faults: FaultSpec, seed: u64, keep_log: bool) -> Result<TrialResult> {
    let realization = FaultRealization::new(net.n_neurons(), faults, seed)?;
    run_with(net, realization, seed, keep_log)
}

/// As [`run`] with an explicit fault realisation.
pub fn run_with(net: &Network<'_>, faults: FaultRealization, seed: u64, keep_log: bool) -> Result<TrialResult> {
    let spec = faults.spec;
    let mut sim = Simulator::new(net, faults, keep_log);
    let n_steps = net.config.n_steps();
    let first_window_step = n_steps - net.config.window_steps();
    let mut avg = WindowAverage::new(net.readout.n_dofs());
    for s in 0..n_steps {
        sim.step()?;
        if s >= first_window_step {
            avg.push(&sim.state.x_hat);
        }
    }

    let duration = n_steps as f64 * net.config.dt;
    let surviving = sim.faults.surviving();
    let (total, delivered) = sim.spike_counts();
    let x_decoded = avg.into_mean();
    Ok(TrialResult {
        seed,
        faults: spec,
        relative_error: relative_error(&x_decoded, &net.reference).ok(),
        x_decoded,
        x_final: sim.state.x_hat,
        spike_count_total: total,
        spike_count_delivered: delivered,
        mean_rate_surviving: (surviving > 0).then(|| total as f64 / (surviving as f64 * duration)),
        ablation_mask: sim.faults.ablation_mask,
        spike_log: sim.log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{build_network, GammaSetting, NetworkConfig};
    use crate::fem::FemSystem;
    use crate::sparse::CsrMatrix;
    use alloc::vec;

    fn scalar_system(b: f64) -> FemSystem {
        FemSystem::from_parts(CsrMatrix::from_dense(1, 1, &[2.0]), vec![b]).unwrap()
    }

    fn scalar_config() -> NetworkConfig {
        NetworkConfig { npm: 2, gamma: GammaSetting::Fixed(0.1), ..Default::default() }
    }

    #[test]
    fn silent_without_drive() {
        let sys = scalar_system(0.0);
        let net = build_network(&sys, &scalar_config()).unwrap();
        let mut sim = Simulator::new(&net, FaultRealization::new(2, FaultSpec::NONE, 1).unwrap(), true);
        for _ in 0..1000 {
            assert_eq!(sim.step().unwrap(), StepReport::default());
        }
        assert_eq!(sim.state.v, vec![0.0, 0.0]);
        assert_eq!(sim.state.x_hat, vec![0.0]);
        assert!((sim.state.t - 1.0).abs() < 1e-12);
        assert!(sim.spike_log().unwrap().events.is_empty());
    }

    #[test]
    fn scalar_system_reaches_fixed_point() {
        let sys = scalar_system(4.0);
        let net = build_network(&sys, &scalar_config()).unwrap();
        let res = run(&net, FaultSpec::NONE, 5, false).unwrap();
        // Oracle: the conventional solution of 2x = 4.
        assert_eq!(net.reference, vec![2.0]);
        assert!((res.x_decoded[0] - 2.0).abs() <= 5.0 * 0.1, "{:?}", res.x_decoded);
        assert!(res.relative_error.unwrap() <= 0.25);
    }

    #[test]
    fn fully_ablated_network_stays_at_zero() {
        let sys = scalar_system(4.0);
        let net = build_network(&sys, &scalar_config()).unwrap();
        let spec = FaultSpec { ablation_p: 1.0, drop_p: 0.0 };
        let mut sim = Simulator::new(&net, FaultRealization::new(2, spec, 3).unwrap(), false);
        for _ in 0..2000 {
            sim.step().unwrap();
            assert_eq!(sim.state.x_hat, vec![0.0]);
            assert_eq!(sim.state.v, vec![0.0, 0.0]);
        }
        let res = run(&net, spec, 3, false).unwrap();
        assert_eq!(res.x_decoded, vec![0.0]);
        assert_eq!(res.relative_error, Some(1.0));
        assert_eq!(res.mean_rate_surviving, None);
    }

    #[test]
    fn divergence_is_reported() {
        let sys = FemSystem::from_parts(CsrMatrix::from_dense(1, 1, &[2.0]), vec![f64::MAX]).unwrap();
        let cfg = NetworkConfig { gamma: GammaSetting::Fixed(1e300), ..scalar_config() };
        let net = build_network(&sys, &cfg).unwrap();
        let err = run(&net, FaultSpec::NONE, 0, false).unwrap_err();
        assert!(matches!(err, Error::NumericalDivergence { .. }), "{err:?}");
    }

    #[test]
    fn decode_averages() {
        let c = [0.1, -0.3, 7.7];
        let snaps = vec![c.as_slice(); 1234];
        assert_eq!(decode(snaps, 3), c.to_vec());
        assert_eq!(decode(core::iter::empty(), 2), vec![0.0, 0.0]);
        let a = [1.0, 2.0];
        let b = [3.0, 6.0];
        assert_eq!(decode([a.as_slice(), b.as_slice()], 2), vec![2.0, 4.0]);
    }

    #[test]
    fn firing_rate_arithmetic() {
        let mask = vec![false; 10];
        assert_eq!(mean_firing_rate(&SpikeLog::default(), &mask, 20.0).unwrap(), 0.0);
        let log = SpikeLog {
            events: (0..100).map(|s| SpikeEvent { step: s, neuron: s % 10, delivered: true }).collect(),
        };
        assert_eq!(mean_firing_rate(&log, &mask, 20.0).unwrap(), 0.5);
        assert_eq!(mean_firing_rate(&log, &[true; 10], 20.0), Err(Error::UndefinedRate));
        assert!(mean_firing_rate(&log, &mask, 0.0).is_err());
    }

    #[test]
    fn dropped_spikes_still_reset() {
        let sys = scalar_system(4.0);
        let net = build_network(&sys, &scalar_config()).unwrap();
        let spec = FaultSpec { ablation_p: 0.0, drop_p: 1.0 };
        let res = run(&net, spec, 1, true).unwrap();
        assert!(res.spike_count_total > 0);
        assert_eq!(res.spike_count_delivered, 0);
        assert_eq!(res.x_decoded, vec![0.0]);
        assert!(res.spike_log.unwrap().events.iter().all(|e| !e.delivered));
    }
}
