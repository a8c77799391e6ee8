//! Embedding of a linear system into a spike-coding network.
//!
//! Every degree of freedom owns `npm` neurons. Neuron `k` reads out into row
//! `k / npm` of the `N × M` readout matrix Γ with weight `±γ`; the first half
//! of a node's neurons carry `+γ`, the second half `−γ` (alternating for odd
//! `npm`). The recurrent weights
//!
//! ```text
//! Ω_slow = Γᵀ(λ_d·I − A)Γ      Ω_fast = ΓᵀΓ
//! ```
//!
//! are never materialised: the simulator applies `Ω_slow` through the
//! `N`-dimensional readout and `Ω_fast` as within-node inhibition, since
//! `ΓᵀΓ` only couples neurons that share a DOF.

use alloc::vec::Vec;

use crate::cg::{cg_estimate, cg_solve, CgConfig};
use crate::error::{invalid, Result};
use crate::fem::FemSystem;

/// Iterations of the coarse solve used for γ calibration.
pub const CALIBRATION_CG_ITERATIONS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaSetting {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    pub npm: usize,
    pub gamma: GammaSetting,
    /// Readout decay rate λ_d.
    pub lambda_d: f64,
    pub dt: f64,
    pub t_total: f64,
    /// Trailing fraction of the run averaged into the decoded solution.
    pub decode_window: f64,
    /// γ = eta · (coarse solution scale) when `gamma` is `Auto`.
    pub eta: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            npm: 16,
            gamma: GammaSetting::Auto,
            lambda_d: 0.01,
            dt: 1e-3,
            t_total: 20.0,
            decode_window: 0.25,
            eta: 0.05,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.npm == 0 {
            return Err(invalid("network.npm must be >= 1"));
        }
        if let GammaSetting::Fixed(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(invalid("network.gamma must be positive"));
            }
        }
        for (name, v) in [("network.lambda_d", self.lambda_d), ("network.dt", self.dt), ("network.t_total", self.t_total)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(alloc::format!("{name} must be positive")));
            }
        }
        if !(self.dt * self.lambda_d < 0.1) {
            return Err(invalid("network.dt * network.lambda_d must be < 0.1"));
        }
        if self.t_total < self.dt {
            return Err(invalid("network.t_total must cover at least one step"));
        }
        if !(self.decode_window > 0.0 && self.decode_window <= 1.0) {
            return Err(invalid("network.decode_window must be in (0, 1]"));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(invalid("network.eta must be in (0, 1)"));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        libm::round(self.t_total / self.dt) as usize
    }

    pub fn window_steps(&self) -> usize {
        let n = self.n_steps();
        (libm::round(self.decode_window * n as f64) as usize).clamp(1, n)
    }
}

/// The readout matrix Γ: one signed entry of magnitude γ per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Readout {
    n_dofs: usize,
    npm: usize,
    gamma: f64,
    positive: Vec<bool>,
}

pub fn build_gamma(n_dofs: usize, npm: usize, gamma: f64) -> Result<Readout> {
    if n_dofs == 0 || npm == 0 {
        return Err(invalid("readout needs n_dofs >= 1 and npm >= 1"));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(invalid("readout magnitude must be positive"));
    }
    let positive = (0..n_dofs * npm)
        .map(|k| {
            let slot = k % npm;
            if npm.is_multiple_of(2) { slot < npm / 2 } else { slot.is_multiple_of(2) }
        })
        .collect();
    Ok(Readout { n_dofs, npm, gamma, positive })
}

impl Readout {
    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_neurons(&self) -> usize {
        self.positive.len()
    }

    pub fn npm(&self) -> usize {
        self.npm
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// DOF that neuron `k` reads out into.
    #[inline]
    pub fn row(&self, k: usize) -> usize {
        k / self.npm
    }

    /// `+1.0` or `-1.0`.
    #[inline]
    pub fn sign(&self, k: usize) -> f64 {
        if self.positive[k] { 1.0 } else { -1.0 }
    }

    /// 0 for positive columns, 1 for negative.
    #[inline]
    pub fn sign_slot(&self, k: usize) -> usize {
        usize::from(!self.positive[k])
    }

    /// The single nonzero of column `k`.
    #[inline]
    pub fn value(&self, k: usize) -> f64 {
        self.sign(k) * self.gamma
    }

    /// Neuron ids belonging to DOF `i`.
    pub fn neurons_of(&self, i: usize) -> core::ops::Range<usize> {
        i * self.npm..(i + 1) * self.npm
    }

    /// `Γ · s` for a per-neuron vector.
    pub fn apply(&self, s: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.n_dofs];
        for (k, &sk) in s.iter().enumerate() {
            out[self.row(k)] += self.value(k) * sk;
        }
        out
    }

    /// `Γᵀ · y` for a per-DOF vector.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        (0..self.n_neurons()).map(|k| self.value(k) * y[self.row(k)]).collect()
    }

    /// Dense row-major `N × M` copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let m = self.n_neurons();
        let mut d = alloc::vec![0.0; self.n_dofs * m];
        for k in 0..m {
            d[self.row(k) * m + k] = self.value(k);
        }
        d
    }
}

/// γ from a 25-iteration CG estimate of the solution scale.
///
/// A zero right-hand side returns `eta` itself: the network never spikes, so
/// any positive value is valid.
pub fn calibrate_gamma(system: &FemSystem, eta: f64) -> Result<f64> {
    if system.n_dofs() == 0 {
        return Err(invalid("cannot calibrate on an empty system"));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid("eta must be in (0, 1)"));
    }
    if system.b.iter().all(|&v| v == 0.0) {
        return Ok(eta);
    }
    let estimate = cg_estimate(&system.a, &system.b, CALIBRATION_CG_ITERATIONS)?;
    let scale = estimate.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid("coarse solution estimate vanished for a nonzero right-hand side"));
    }
    Ok(eta * scale)
}

/// A spiking network embedding one linear system.
#[derive(Debug, Clone)]
pub struct Network<'a> {
    pub system: &'a FemSystem,
    pub readout: Readout,
    pub thresholds: Vec<f64>,
    /// Config with γ resolved to a fixed value.
    pub config: NetworkConfig,
    /// Conventional-solver solution of the embedded system.
    pub reference: Vec<f64>,
}

pub fn build_network<'a>(system: &'a FemSystem, config: &NetworkConfig) -> Result<Network<'a>> {
    config.validate()?;
    let n = system.n_dofs();
    if n == 0 || system.a.n_rows() != n || system.a.n_cols() != n {
        return Err(invalid("system matrix and right-hand side disagree in size"));
    }
    let gamma = match config.gamma {
        GammaSetting::Fixed(g) => g,
        GammaSetting::Auto => calibrate_gamma(system, config.eta)?,
    };
    let readout = build_gamma(n, config.npm, gamma)?;
    let thresholds = alloc::vec![0.5 * gamma * gamma; readout.n_neurons()];
    let reference = cg_solve(&system.a, &system.b, &CgConfig::default())?.x;
    Ok(Network {
        system,
        readout,
        thresholds,
        config: NetworkConfig { gamma: GammaSetting::Fixed(gamma), ..*config },
        reference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkSummary {
    pub n_dofs: usize,
    pub n_neurons: usize,
    pub npm: usize,
    pub gamma: f64,
    pub lambda_d: f64,
    pub threshold_min: f64,
    pub threshold_max: f64,
}

impl Network<'_> {
    pub fn gamma(&self) -> f64 {
        self.readout.gamma()
    }

    pub fn n_neurons(&self) -> usize {
        self.readout.n_neurons()
    }

    pub fn summary(&self) -> NetworkSummary {
        let (lo, hi) = self
            .thresholds
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)));
        NetworkSummary {
            n_dofs: self.readout.n_dofs(),
            n_neurons: self.n_neurons(),
            npm: self.readout.npm(),
            gamma: self.gamma(),
            lambda_d: self.config.lambda_d,
            threshold_min: lo,
            threshold_max: hi,
        }
    }
}
