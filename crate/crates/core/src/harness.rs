//! Fault sweeps, trial seeds, rasters and per-node error fields.

use alloc::vec::Vec;

use rand::seq::index;

use crate::encoder::Network;
use crate::error::{invalid, Error, Result};
use crate::faults::{trial_rng, FaultKind, FaultRealization, FaultSpec};
use crate::mesh::Mesh;
use crate::sim::{self, SpikeLog, TrialResult};

/// `‖x − x_ref‖₂ / ‖x_ref‖₂`.
pub fn relative_error(x: &[f64], x_ref: &[f64]) -> Result<f64> {
    if x.len() != x_ref.len() {
        return Err(invalid("relative error of vectors with different lengths"));
    }
    let num: f64 = x.iter().zip(x_ref).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = x_ref.iter().map(|b| b * b).sum();
    if den == 0.0 {
        return Err(Error::UndefinedErrorMetric);
    }
    Ok(libm::sqrt(num) / libm::sqrt(den))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream tag for seeds that do not belong to a sweep.
pub const SINGLE_RUN_TAG: u64 = 0;

pub fn kind_tag(kind: FaultKind) -> u64 {
    match kind {
        FaultKind::Ablation => 1,
        FaultKind::Drop => 2,
    }
}

/// Seed of one trial, a hash of `(master_seed, stream, p_index, trial_index)`.
pub fn trial_seed(master_seed: u64, stream: u64, p_index: usize, trial: usize) -> u64 {
    [stream, p_index as u64, trial as u64].iter().fold(splitmix64(master_seed), |h, &v| splitmix64(h ^ v))
}

/// Scalar outcome of one successful sweep trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    pub relative_error: f64,
    pub spikes_total: u64,
    pub spikes_delivered: u64,
    pub mean_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub fault_kind: FaultKind,
    pub npm: usize,
    pub p_index: usize,
    pub p: f64,
    pub trial: usize,
    pub seed: u64,
    pub outcome: Result<TrialMetrics>,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        self.outcome.is_err()
    }
}

/// One trial of a sweep, identified by its grid position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialJob {
    pub p_index: usize,
    pub p: f64,
    pub trial: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub kind: FaultKind,
    pub p_values: Vec<f64>,
    pub n_trials: usize,
    pub master_seed: u64,
}

impl SweepPlan {
    pub fn new(kind: FaultKind, p_values: Vec<f64>, n_trials: usize, master_seed: u64) -> Result<Self> {
        if p_values.is_empty() {
            return Err(invalid("sweep needs at least one p value"));
        }
        if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(invalid(alloc::format!("p value {p} outside [0, 1]")));
        }
        if n_trials == 0 {
            return Err(invalid("n_trials must be >= 1"));
        }
        Ok(Self { kind, p_values, n_trials, master_seed })
    }

    /// Jobs in `(p_index, trial)` order.
    pub fn jobs(&self) -> Vec<TrialJob> {
        let tag = kind_tag(self.kind);
        self.p_values
            .iter()
            .enumerate()
            .flat_map(|(p_index, &p)| {
                (0..self.n_trials).map(move |trial| TrialJob {
                    p_index,
                    p,
                    trial,
                    seed: trial_seed(self.master_seed, tag, p_index, trial),
                })
            })
            .collect()
    }

    pub fn run_job(&self, net: &Network<'_>, job: &TrialJob) -> TrialRecord {
        let outcome = sim::run(net, self.kind.spec(job.p), job.seed, false).and_then(|r| {
            Ok(TrialMetrics {
                relative_error: r.relative_error.ok_or(Error::UndefinedErrorMetric)?,
                spikes_total: r.spike_count_total,
                spikes_delivered: r.spike_count_delivered,
                mean_rate: r.mean_rate_surviving,
            })
        });
        TrialRecord {
            fault_kind: self.kind,
            npm: net.readout.npm(),
            p_index: job.p_index,
            p: job.p,
            trial: job.trial,
            seed: job.seed,
            outcome,
        }
    }

    /// Aggregates records (any order) into per-p statistics.
    pub fn summarize(&self, npm: usize, mut records: Vec<TrialRecord>) -> SweepResult {
        records.sort_by_key(|r| (r.p_index, r.trial));
        let points = self
            .p_values
            .iter()
            .enumerate()
            .map(|(p_index, &p)| {
                let mine = records.iter().filter(|r| r.p_index == p_index);
                let errors: Vec<f64> =
                    mine.clone().filter_map(|r| r.outcome.as_ref().ok().map(|m| m.relative_error)).collect();
                let failed = mine.filter(|r| r.failed()).count();
                SweepPoint::from_errors(p, errors, failed)
            })
            .collect();
        SweepResult { fault_kind: self.kind, npm, points, trials: records }
    }

    /// Runs every job sequentially.
    pub fn run(&self, net: &Network<'_>) -> SweepResult {
        let records = self.jobs().iter().map(|j| self.run_job(net, j)).collect();
        self.summarize(net.readout.npm(), records)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub p: f64,
    /// Relative errors of the successful trials, in trial order.
    pub errors: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over `√n_ok`.
    pub sem: f64,
    pub failed: usize,
}

impl SweepPoint {
    pub fn from_errors(p: f64, errors: Vec<f64>, failed: usize) -> Self {
        let n = errors.len();
        let (mean, sem) = match n {
            0 => (f64::NAN, f64::NAN),
            1 => (errors[0], 0.0),
            _ => {
                let mean = errors.iter().sum::<f64>() / n as f64;
                let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1) as f64;
                (mean, libm::sqrt(var) / libm::sqrt(n as f64))
            }
        };
        Self { p, errors, mean, sem, failed }
    }

    pub fn n_ok(&self) -> usize {
        self.errors.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub fault_kind: FaultKind,
    pub npm: usize,
    pub points: Vec<SweepPoint>,
    /// Per-trial records ordered by `(p_index, trial)`.
    pub trials: Vec<TrialRecord>,
}

impl SweepResult {
    pub fn p_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p).collect()
    }

    pub fn failed_trials(&self) -> usize {
        self.points.iter().map(|p| p.failed).sum()
    }

    pub fn point(&self, p: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|pt| pt.p == p)
    }
}

pub fn ablation_sweep(net: &Network<'_>, p_values: &[f64], n_trials: usize, master_seed: u64) -> Result<SweepResult> {
    Ok(SweepPlan::new(FaultKind::Ablation, p_values.to_vec(), n_trials, master_seed)?.run(net))
}

pub fn drop_sweep(net: &Network<'_>, p_values: &[f64], n_trials: usize, master_seed: u64) -> Result<SweepResult> {
    Ok(SweepPlan::new(FaultKind::Drop, p_values.to_vec(), n_trials, master_seed)?.run(net))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterRow {
    pub neuron_id: usize,
    pub time: f64,
    pub delivered: bool,
}

/// Events of `k` uniformly sampled neurons, by neuron id then time.
pub fn raster_extract(log: &SpikeLog, k: usize, m_neurons: usize, dt: f64, seed: u64) -> Result<Vec<RasterRow>> {
    if k > m_neurons {
        return Err(invalid(alloc::format!("raster of {k} neurons requested from {m_neurons}")));
    }
    let mut rng = trial_rng(seed);
    let mut chosen = alloc::vec![false; m_neurons];
    for id in index::sample(&mut rng, m_neurons, k) {
        chosen[id] = true;
    }
    let mut rows: Vec<RasterRow> = log
        .events
        .iter()
        .filter(|e| chosen[e.neuron])
        .map(|e| RasterRow { neuron_id: e.neuron, time: e.step as f64 * dt, delivered: e.delivered })
        .collect();
    rows.sort_by_key(|r| r.neuron_id);
    Ok(rows)
}

/// The sampled neuron ids themselves, ascending.
pub fn raster_sample(k: usize, m_neurons: usize, seed: u64) -> Result<Vec<usize>> {
    if k > m_neurons {
        return Err(invalid(alloc::format!("raster of {k} neurons requested from {m_neurons}")));
    }
    let mut ids = index::sample(&mut trial_rng(seed), m_neurons, k).into_vec();
    ids.sort_unstable();
    Ok(ids)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorFieldRow {
    pub node_id: usize,
    pub x: f64,
    pub y: f64,
    pub neurofem: f64,
    pub reference: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorField {
    pub rows: Vec<ErrorFieldRow>,
}

impl ErrorField {
    pub fn from_solution(mesh: &Mesh, net: &Network<'_>, x: &[f64]) -> Self {
        let rows = net
            .system
            .dof_to_node
            .iter()
            .enumerate()
            .map(|(dof, &node)| {
                let n = &mesh.nodes[node];
                ErrorFieldRow {
                    node_id: node,
                    x: n.x,
                    y: n.y,
                    neurofem: x[dof],
                    reference: net.reference[dof],
                    difference: x[dof] - net.reference[dof],
                }
            })
            .collect();
        Self { rows }
    }

    pub fn max_abs_difference(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.difference.abs()))
    }

    /// Share of the total squared error carried by the `ceil(fraction·n)` nodes
    /// with the largest `|difference|`.
    pub fn top_share(&self, fraction: f64) -> f64 {
        let mut sq: Vec<f64> = self.rows.iter().map(|r| r.difference * r.difference).collect();
        let total: f64 = sq.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        sq.sort_by(|a, b| b.total_cmp(a));
        let top = (libm::ceil(fraction * sq.len() as f64) as usize).min(sq.len());
        sq[..top].iter().sum::<f64>() / total
    }
}

/// Runs one trial and tabulates the decoded solution against the reference.
pub fn error_field(mesh: &Mesh, net: &Network<'_>, faults: FaultSpec, seed: u64) -> Result<(ErrorField, TrialResult)> {
    let trial = sim::run(net, faults, seed, false)?;
    Ok((ErrorField::from_solution(mesh, net, &trial.x_decoded), trial))
}

/// Runs one trial with an explicit fault realisation and tabulates it.
pub fn error_field_with(
    mesh: &Mesh,
    net: &Network<'_>,
    faults: FaultRealization,
    seed: u64,
) -> Result<(ErrorField, TrialResult)> {
    let trial = sim::run_with(net, faults, seed, false)?;
    Ok((ErrorField::from_solution(mesh, net, &trial.x_decoded), trial))
}
