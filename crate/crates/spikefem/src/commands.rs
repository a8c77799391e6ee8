use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;

use spikefem_core::harness::{kind_tag, raster_extract, trial_seed, ErrorField, SweepPlan, SINGLE_RUN_TAG};
use spikefem_core::{assemble, build_network, build_unit_square_mesh, sim, FaultKind, FemSystem, Mesh, Network, SweepResult};

use crate::config::RunConfig;
use crate::formats;
use crate::svg;

/// Seed stream for choosing raster neurons.
pub const RASTER_SAMPLE_TAG: u64 = 3;

/// Mesh and assembled system for a configuration.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: Mesh,
    pub system: FemSystem,
}

impl Problem {
    pub fn build(cfg: &RunConfig) -> Result<Self> {
        let mesh = build_unit_square_mesh(cfg.n_side)?;
        let rhs = cfg.rhs;
        let system = assemble(&mesh, |x, y| rhs.eval(x, y))?;
        Ok(Self { mesh, system })
    }

    pub fn network(&self, cfg: &RunConfig, npm: usize) -> Result<Network<'_>> {
        Ok(build_network(&self.system, &spikefem_core::NetworkConfig { npm, ..cfg.network })?)
    }
}

/// Runs a sweep's trials on `jobs` threads. The result does not depend on `jobs`.
pub fn run_sweep(net: &Network<'_>, plan: &SweepPlan, jobs: usize) -> Result<SweepResult> {
    let list = plan.jobs();
    let records = if jobs <= 1 {
        list.iter().map(|j| plan.run_job(net, j)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        pool.install(|| list.par_iter().map(|j| plan.run_job(net, j)).collect())
    };
    Ok(plan.summarize(net.readout.npm(), records))
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn prepare_dir(cfg: &RunConfig) -> Result<&Path> {
    let dir = cfg.output_dir.as_path();
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn manifest_entries(cfg: &RunConfig, command: &str) -> Vec<(String, String)> {
    let mut entries = vec![
        ("command".to_string(), command.to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
    ];
    for line in cfg.to_manifest_lines() {
        let (k, v) = line.split_once('=').expect("manifest line");
        entries.push((k.to_string(), v.to_string()));
    }
    entries
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub relative_error: Option<f64>,
    pub gamma: f64,
    pub seed: u64,
    pub files: Vec<PathBuf>,
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveReport> {
    let problem = Problem::build(cfg)?;
    let net = problem.network(cfg, cfg.network.npm)?;
    let seed = trial_seed(cfg.master_seed, SINGLE_RUN_TAG, 0, 0);
    let trial = sim::run(&net, cfg.faults, seed, false)?;
    let field = ErrorField::from_solution(&problem.mesh, &net, &trial.x_decoded);

    let dir = prepare_dir(cfg)?;
    let mut entries = manifest_entries(cfg, "solve");
    entries.push(("resolved.gamma".into(), net.gamma().to_string()));
    entries.push(("resolved.n_dofs".into(), net.readout.n_dofs().to_string()));
    entries.push(("resolved.n_neurons".into(), net.n_neurons().to_string()));
    entries.push(("resolved.seed".into(), seed.to_string()));
    entries.push(("result.relative_error".into(), trial.relative_error.map(|e| e.to_string()).unwrap_or_default()));
    entries.push(("result.spikes_total".into(), trial.spike_count_total.to_string()));
    entries.push(("result.spikes_delivered".into(), trial.spike_count_delivered.to_string()));

    let files = vec![
        write(dir, "solution.csv", &formats::solution_csv(&problem.mesh, &problem.system, &trial.x_decoded))?,
        write(dir, "reference.csv", &formats::solution_csv(&problem.mesh, &problem.system, &net.reference))?,
        write(dir, "error_field.csv", &formats::error_field_csv(&field))?,
        write(dir, "manifest.txt", &formats::manifest(&entries))?,
    ];
    Ok(SolveReport { relative_error: trial.relative_error, gamma: net.gamma(), seed, files })
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub results: Vec<SweepResult>,
    pub failed_trials: usize,
    pub files: Vec<PathBuf>,
}

pub fn cmd_sweep(cfg: &RunConfig, kind: FaultKind) -> Result<SweepReport> {
    let problem = Problem::build(cfg)?;
    let plan = SweepPlan::new(kind, cfg.sweep_grid(kind), cfg.n_trials, cfg.master_seed)?;
    let mut entries = manifest_entries(cfg, &format!("sweep {}", kind.name()));
    let mut results = Vec::new();
    for &npm in &cfg.npm_values {
        let net = problem.network(cfg, npm)?;
        entries.push((format!("resolved.gamma.npm{npm}"), net.gamma().to_string()));
        results.push(run_sweep(&net, &plan, cfg.jobs)?);
    }
    entries.push(("resolved.seed_stream".into(), kind_tag(kind).to_string()));
    for job in plan.jobs() {
        entries.push((format!("resolved.seed.p{}.trial{}", job.p_index, job.trial), job.seed.to_string()));
    }

    let dir = prepare_dir(cfg)?;
    let mut files = vec![
        write(dir, "sweep.csv", &formats::sweep_csv(&results))?,
        write(dir, "sweep_summary.csv", &formats::summary_csv(&results))?,
    ];
    if cfg.svg {
        let title = format!("{} sweep", kind.name());
        files.push(write(dir, "sweep_summary.svg", &svg::summary_plot(&results, &title))?);
    }
    files.push(write(dir, "manifest.txt", &formats::manifest(&entries))?);
    let failed_trials = results.iter().map(SweepResult::failed_trials).sum();
    Ok(SweepReport { results, failed_trials, files })
}

#[derive(Debug, Clone)]
pub struct RasterReport {
    pub rows: usize,
    pub spikes_total: u64,
    pub spikes_delivered: u64,
    pub files: Vec<PathBuf>,
}

pub fn cmd_raster(cfg: &RunConfig, write_spike_log: bool) -> Result<RasterReport> {
    let problem = Problem::build(cfg)?;
    let net = problem.network(cfg, cfg.network.npm)?;
    let seed = trial_seed(cfg.master_seed, SINGLE_RUN_TAG, 0, 0);
    let sample_seed = trial_seed(cfg.master_seed, RASTER_SAMPLE_TAG, 0, 0);
    let trial = sim::run(&net, cfg.faults, seed, true)?;
    let log = trial.spike_log.as_ref().expect("log retained");
    let rows = raster_extract(log, cfg.raster_k, net.n_neurons(), cfg.network.dt, sample_seed)?;

    let dir = prepare_dir(cfg)?;
    let mut entries = manifest_entries(cfg, "raster");
    entries.push(("resolved.gamma".into(), net.gamma().to_string()));
    entries.push(("resolved.seed".into(), seed.to_string()));
    entries.push(("resolved.raster_seed".into(), sample_seed.to_string()));
    let mut files = vec![write(dir, "raster.csv", &formats::raster_csv(&rows))?];
    if write_spike_log {
        files.push(write(dir, "spikes.csv", &formats::spike_log_csv(log))?);
    }
    files.push(write(dir, "manifest.txt", &formats::manifest(&entries))?);
    Ok(RasterReport {
        rows: rows.len(),
        spikes_total: trial.spike_count_total,
        spikes_delivered: trial.spike_count_delivered,
        files,
    })
}

/// Writes `nodes.csv` and `elements.csv`.
pub fn cmd_export_mesh(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mesh = build_unit_square_mesh(cfg.n_side)?;
    let dir = prepare_dir(cfg)?;
    Ok(vec![write(dir, "nodes.csv", &formats::nodes_csv(&mesh))?, write(dir, "elements.csv", &formats::elements_csv(&mesh))?])
}

/// Writes `A.mtx`, `b.txt` and `network.json`.
pub fn cmd_export_system(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let problem = Problem::build(cfg)?;
    let net = problem.network(cfg, cfg.network.npm)?;
    let dir = prepare_dir(cfg)?;
    Ok(vec![
        write(dir, "A.mtx", &formats::matrix_market(&problem.system.a))?,
        write(dir, "b.txt", &formats::vector_text(&problem.system.b))?,
        write(dir, "network.json", &formats::network_summary_json(&net.summary()))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_result_is_independent_of_thread_count() {
        let defaults = RunConfig::default();
        let cfg = RunConfig {
            n_side: 7,
            network: spikefem_core::NetworkConfig { t_total: 1.0, ..defaults.network },
            ..defaults
        };
        let problem = Problem::build(&cfg).unwrap();
        let net = problem.network(&cfg, 4).unwrap();
        let plan = SweepPlan::new(FaultKind::Ablation, vec![0.0, 0.3, 0.6], 3, 9).unwrap();
        let serial = run_sweep(&net, &plan, 1).unwrap();
        let parallel = run_sweep(&net, &plan, 3).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(formats::sweep_csv(&[serial]), formats::sweep_csv(&[parallel]));
    }
}
