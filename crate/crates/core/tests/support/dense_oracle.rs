//! Dense neuron-space reference step for the spiking network: filtered spike
//! trains `r` with x̂ = Γr, slow weights Γᵀ(λI − A)Γ and fast weights ΓᵀΓ.

use spikefem_core::encoder::GammaSetting;
use spikefem_core::faults::FaultRealization;
use spikefem_core::{build_network, CsrMatrix, FaultSpec, FemSystem, NetworkConfig, SimState, Simulator};

/// Uniform draws from a splitmix64 stream, independent of the crate's RNG.
pub struct Uniform(u64);

impl Uniform {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next(&mut self, lo: f64, hi: f64) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        lo + (hi - lo) * ((z >> 11) as f64 / (1u64 << 53) as f64)
    }
}

fn mul(a: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    (0..rows).map(|r| (0..cols).map(|c| a[r * cols + c] * x[c]).sum()).collect()
}

fn transpose(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut t = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = a[r * cols + c];
        }
    }
    t
}

fn matmul(a: &[f64], b: &[f64], n: usize, k: usize, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..m {
            out[i * m + j] = (0..k).map(|l| a[i * k + l] * b[l * m + j]).sum();
        }
    }
    out
}

pub struct DenseNetwork {
    pub n: usize,
    pub npm: usize,
    pub lambda: f64,
    pub dt: f64,
    pub gamma: Vec<f64>,
    pub omega_slow: Vec<f64>,
    pub omega_fast: Vec<f64>,
    pub drive: Vec<f64>,
    pub thresholds: Vec<f64>,
}

impl DenseNetwork {
    /// `gamma` is the row-major N × M readout.
    pub fn new(a: &[f64], b: &[f64], gamma: Vec<f64>, npm: usize, lambda: f64, dt: f64) -> Self {
        let n = b.len();
        let m = n * npm;
        let gt = transpose(&gamma, n, m);
        let mut leak = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                leak[i * n + j] = if i == j { lambda } else { 0.0 } - a[i * n + j];
            }
        }
        let omega_slow = matmul(&gt, &matmul(&leak, &gamma, n, n, m), m, n, m);
        let omega_fast = matmul(&gt, &gamma, m, n, m);
        let thresholds = (0..m).map(|k| omega_fast[k * m + k] / 2.0).collect();
        let drive = mul(&gt, m, n, b);
        Self { n, npm, lambda, dt, gamma, omega_slow, omega_fast, drive, thresholds }
    }

    pub fn readout(&self, r: &[f64]) -> Vec<f64> {
        mul(&self.gamma, self.n, self.n * self.npm, r)
    }

    /// Euler voltage update, greedy per-node spiking (largest margin first,
    /// each neuron at most once), fast-weight inhibition, then trace decay.
    /// Returns the number of spikes.
    pub fn step(&self, v: &mut [f64], r: &mut [f64]) -> usize {
        let m = self.n * self.npm;
        let slow = mul(&self.omega_slow, m, m, r);
        for k in 0..m {
            v[k] += self.dt * (-self.lambda * v[k] + self.drive[k] + slow[k]);
        }
        let mut spikes = 0;
        for node in 0..self.n {
            let mut fired = vec![false; m];
            loop {
                let best = (node * self.npm..(node + 1) * self.npm)
                    .filter(|&k| !fired[k] && v[k] > self.thresholds[k])
                    .max_by(|&p, &q| (v[p] - self.thresholds[p]).total_cmp(&(v[q] - self.thresholds[q])));
                let Some(k) = best else { break };
                fired[k] = true;
                for j in 0..m {
                    v[j] -= self.omega_fast[j * m + k];
                }
                r[k] += 1.0;
                spikes += 1;
            }
        }
        for rk in r.iter_mut() {
            *rk *= 1.0 - self.lambda * self.dt;
        }
        spikes
    }
}

pub struct OracleReport {
    pub cases: usize,
    pub max_deviation: f64,
    pub multi_spike_cases: usize,
}

/// Random 3-DOF SPD systems with npm = 2: one simulator step from a random
/// state against one dense step.
pub fn compare_random_cases(cases: usize, seed: u64) -> OracleReport {
    let (n, npm) = (3, 2);
    let mut rng = Uniform::new(seed);
    let mut report = OracleReport { cases, max_deviation: 0.0, multi_spike_cases: 0 };
    for _ in 0..cases {
        let q: Vec<f64> = (0..n * n).map(|_| rng.next(-1.0, 1.0)).collect();
        let mut a = matmul(&transpose(&q, n, n), &q, n, n, n);
        for i in 0..n {
            a[i * n + i] += 1.0;
        }
        let b: Vec<f64> = (0..n).map(|_| rng.next(-2.0, 2.0)).collect();
        let system = FemSystem::from_parts(CsrMatrix::from_dense(n, n, &a), b.clone()).unwrap();
        let cfg = NetworkConfig { npm, gamma: GammaSetting::Fixed(0.3), lambda_d: 0.7, dt: 0.01, ..Default::default() };
        let net = build_network(&system, &cfg).unwrap();
        let m = net.n_neurons();
        let dense = DenseNetwork::new(&a, &b, net.readout.to_dense(), npm, cfg.lambda_d, cfg.dt);

        let mut r: Vec<f64> = (0..m).map(|_| rng.next(0.0, 3.0)).collect();
        let mut v: Vec<f64> = (0..m).map(|_| rng.next(-0.1, 0.25)).collect();
        let mut state = SimState::at_rest(&net);
        state.v = v.clone();
        state.x_hat = dense.readout(&r);

        let faults = FaultRealization::new(m, FaultSpec::NONE, 0).unwrap();
        let mut sim = Simulator::with_state(&net, state, faults, false);
        let emitted = sim.step().unwrap().emitted;
        let dense_spikes = dense.step(&mut v, &mut r);
        assert_eq!(emitted, dense_spikes);
        if emitted >= 2 {
            report.multi_spike_cases += 1;
        }
        let x = dense.readout(&r);
        let dev_v = sim.state.v.iter().zip(&v).map(|(p, q)| (p - q).abs());
        let dev_x = sim.state.x_hat.iter().zip(&x).map(|(p, q)| (p - q).abs());
        report.max_deviation = dev_v.chain(dev_x).fold(report.max_deviation, f64::max);
    }
    report
}
