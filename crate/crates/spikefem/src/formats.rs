//! Text renderings of meshes, systems, spike logs and sweep results.
//!
//! Every function returns the full file body so callers can write it in one
//! go. Floats use Rust's shortest round-trip formatting, which keeps the
//! output byte-stable for identical inputs.

use std::fmt::Write;

use spikefem_core::encoder::NetworkSummary;
use spikefem_core::harness::{ErrorField, RasterRow, SweepResult};
use spikefem_core::{CsrMatrix, FemSystem, Mesh, SpikeLog};

fn line(out: &mut String, args: std::fmt::Arguments<'_>) {
    out.write_fmt(args).expect("writing to a String");
    out.push('\n');
}

macro_rules! row {
    ($out:expr, $($arg:tt)*) => { line($out, format_args!($($arg)*)) };
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn nodes_csv(mesh: &Mesh) -> String {
    let mut out = String::from("id,x,y,boundary\n");
    for n in &mesh.nodes {
        row!(&mut out, "{},{},{},{}", n.id, n.x, n.y, n.on_boundary as u8);
    }
    out
}

pub fn elements_csv(mesh: &Mesh) -> String {
    let mut out = String::from("id,n0,n1,n2\n");
    for (id, e) in mesh.elements.iter().enumerate() {
        let [a, b, c] = e.node_ids;
        row!(&mut out, "{id},{a},{b},{c}");
    }
    out
}

/// Matrix Market coordinate format, 1-based indices, general storage.
pub fn matrix_market(a: &CsrMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    row!(&mut out, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz());
    for r in 0..a.n_rows() {
        for (c, v) in a.row(r) {
            row!(&mut out, "{} {} {:e}", r + 1, c + 1, v);
        }
    }
    out
}

/// One value per line.
pub fn vector_text(v: &[f64]) -> String {
    let mut out = String::new();
    for x in v {
        row!(&mut out, "{x:e}");
    }
    out
}

pub fn network_summary_json(s: &NetworkSummary) -> String {
    format!(
        "{{\n  \"N\": {},\n  \"M\": {},\n  \"npm\": {},\n  \"gamma\": {:e},\n  \"lambda_d\": {:e},\n  \"threshold_min\": {:e},\n  \"threshold_max\": {:e}\n}}\n",
        s.n_dofs, s.n_neurons, s.npm, s.gamma, s.lambda_d, s.threshold_min, s.threshold_max
    )
}

pub fn spike_log_csv(log: &SpikeLog) -> String {
    let mut out = String::from("step,neuron_id,delivered\n");
    for e in &log.events {
        row!(&mut out, "{},{},{}", e.step, e.neuron, e.delivered as u8);
    }
    out
}

/// `node_id,x,y,value` for a per-DOF vector.
pub fn solution_csv(mesh: &Mesh, system: &FemSystem, values: &[f64]) -> String {
    let mut out = String::from("node_id,x,y,value\n");
    for (&node, v) in system.dof_to_node.iter().zip(values) {
        let n = &mesh.nodes[node];
        row!(&mut out, "{},{},{},{}", node, n.x, n.y, v);
    }
    out
}

pub fn error_field_csv(field: &ErrorField) -> String {
    let mut out = String::from("node_id,x,y,neurofem,reference,difference\n");
    for r in &field.rows {
        row!(&mut out, "{},{},{},{},{},{}", r.node_id, r.x, r.y, r.neurofem, r.reference, r.difference);
    }
    out
}

pub fn raster_csv(rows: &[RasterRow]) -> String {
    let mut out = String::from("neuron_id,time,delivered\n");
    for r in rows {
        row!(&mut out, "{},{},{}", r.neuron_id, r.time, r.delivered as u8);
    }
    out
}

pub const SWEEP_HEADER: &str =
    "fault_kind,npm,p,trial,seed,relative_error,spikes_total,spikes_delivered,mean_rate,failed\n";
pub const SUMMARY_HEADER: &str = "fault_kind,npm,p,mean_error,sem,n_ok\n";

/// Per-trial rows of several sweeps; failed trials leave the metric columns empty.
pub fn sweep_csv(results: &[SweepResult]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    for res in results {
        for t in &res.trials {
            let kind = t.fault_kind.name();
            match &t.outcome {
                Ok(m) => row!(
                    &mut out,
                    "{kind},{},{},{},{},{},{},{},{},0",
                    t.npm,
                    t.p,
                    t.trial,
                    t.seed,
                    m.relative_error,
                    m.spikes_total,
                    m.spikes_delivered,
                    opt_f64(m.mean_rate)
                ),
                Err(_) => row!(&mut out, "{kind},{},{},{},{},,,,,1", t.npm, t.p, t.trial, t.seed),
            }
        }
    }
    out
}

pub fn summary_csv(results: &[SweepResult]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    for res in results {
        for pt in &res.points {
            row!(&mut out, "{},{},{},{},{},{}", res.fault_kind.name(), res.npm, pt.p, pt.mean, pt.sem, pt.n_ok());
        }
    }
    out
}

/// `key=value` lines.
pub fn manifest(entries: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in entries {
        row!(&mut out, "{k}={v}");
    }
    out
}
