use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use spikefem::commands::{cmd_export_mesh, cmd_export_system, cmd_raster, cmd_solve, cmd_sweep};
use spikefem::config::ConfigSources;
use spikefem_core::FaultKind;

/// `println!` that tolerates a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser, Debug)]
#[command(name = "spikefem", version, about = "Spiking-network Poisson solver and fault-injection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key = value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override any config key, e.g. `--set network.lambda_d=0.1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Output directory (output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweep trials (run.jobs).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Master seed (experiment.master_seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Neurons per mesh node for solve/raster (network.npm).
    #[arg(long, global = true)]
    npm: Option<usize>,

    /// Mesh nodes per side (mesh.n_side).
    #[arg(long, global = true)]
    n_side: Option<usize>,

    /// Trials per sweep point (experiment.n_trials).
    #[arg(long, global = true)]
    trials: Option<usize>,

    #[arg(long, global = true)]
    ablation_p: Option<f64>,

    #[arg(long, global = true)]
    drop_p: Option<f64>,

    /// Right-hand side: `paper` or `zero`.
    #[arg(long, global = true)]
    rhs: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One trial; writes decoded and reference solutions, error field and manifest.
    Solve,
    /// Fault-probability sweep for every configured npm.
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
    },
    /// One trial with the spike log retained; writes raster.csv.
    Raster {
        /// Neurons to sample (experiment.raster_k).
        #[arg(long)]
        k: Option<usize>,
        /// Also write the full spike log as spikes.csv.
        #[arg(long)]
        spike_log: bool,
    },
    /// Writes nodes.csv and elements.csv.
    ExportMesh,
    /// Writes A.mtx, b.txt and network.json.
    ExportSystem,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SweepKind {
    Ablate,
    Drop,
}

impl Cli {
    fn sources(&self) -> anyhow::Result<ConfigSources> {
        let mut overrides = Vec::new();
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| anyhow::anyhow!("--set expects KEY=VALUE, got `{kv}`"))?;
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut flag = |key: &str, v: Option<String>| {
            if let Some(v) = v {
                overrides.push((key.to_string(), v));
            }
        };
        flag("output.dir", self.out.as_ref().map(|p| p.display().to_string()));
        flag("run.jobs", self.jobs.map(|v| v.to_string()));
        flag("experiment.master_seed", self.seed.map(|v| v.to_string()));
        flag("network.npm", self.npm.map(|v| v.to_string()));
        flag("mesh.n_side", self.n_side.map(|v| v.to_string()));
        flag("experiment.n_trials", self.trials.map(|v| v.to_string()));
        flag("faults.ablation_p", self.ablation_p.map(|v| v.to_string()));
        flag("faults.drop_p", self.drop_p.map(|v| v.to_string()));
        flag("problem.rhs", self.rhs.clone());
        if let Command::Raster { k: Some(k), .. } = self.command {
            flag("experiment.raster_k", Some(k.to_string()));
        }
        Ok(ConfigSources { file: self.config.clone(), env: std::env::vars().collect(), overrides })
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let cfg = cli.sources()?.resolve()?;
    match cli.command {
        Command::Solve => {
            let report = cmd_solve(&cfg)?;
            match report.relative_error {
                Some(e) => say!("relative_error={e}"),
                None => say!("relative_error=undefined"),
            }
            say!("gamma={}", report.gamma);
            for f in &report.files {
                say!("wrote {}", f.display());
            }
            Ok(true)
        }
        Command::Sweep { kind } => {
            let kind = match kind {
                SweepKind::Ablate => FaultKind::Ablation,
                SweepKind::Drop => FaultKind::Drop,
            };
            let report = cmd_sweep(&cfg, kind)?;
            for res in &report.results {
                for pt in &res.points {
                    say!("{} npm={} p={} mean_error={} sem={} n_ok={}", kind.name(), res.npm, pt.p, pt.mean, pt.sem, pt.n_ok());
                }
            }
            for f in &report.files {
                say!("wrote {}", f.display());
            }
            if report.failed_trials > 0 {
                eprintln!("{} trial(s) diverged", report.failed_trials);
            }
            Ok(report.failed_trials == 0)
        }
        Command::Raster { spike_log, .. } => {
            let report = cmd_raster(&cfg, spike_log)?;
            say!("raster_rows={} spikes_total={} spikes_delivered={}", report.rows, report.spikes_total, report.spikes_delivered);
            for f in &report.files {
                say!("wrote {}", f.display());
            }
            Ok(true)
        }
        Command::ExportMesh => {
            for f in cmd_export_mesh(&cfg)? {
                say!("wrote {}", f.display());
            }
            Ok(true)
        }
        Command::ExportSystem => {
            for f in cmd_export_system(&cfg)? {
                say!("wrote {}", f.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
