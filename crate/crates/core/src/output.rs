//! Byte-reproducible CSV and JSON rendering of trajectories, sweep tables,
//! and convergence reports.
//!
//! CSV files start with `#`-prefixed metadata lines (tool version, config
//! hash, config echo, resolved window, axis descriptions), then one
//! column-header line, then data rows. Nothing in a file depends on when or
//! where it ran: identical configs render identical bytes. Numbers use the
//! shortest decimal form that parses back to the same binary64 value.
//!
//! The JSON variant mirrors the CSV column names through a `columns` array
//! with row arrays in the same order; failed sweep points carry `null`.

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{PropagatorKind, ResolvedRun, RunConfig};
use crate::convergence::ConvergenceReport;
use crate::dynamics::{StateTrajectory, TimeWindow, WindowPolicy};
use crate::observables::partition_at;
use crate::sweep::SweepResult;

pub const TRAJECTORY_COLUMNS: [&str; 7] = [
    "t",
    "F1",
    "F2",
    "p_modes",
    "p_continuum",
    "p_vacuum",
    "norm",
];

pub const CONVERGENCE_COLUMNS: [&str; 4] = ["check", "setting", "F", "diff"];

/// Everything the metadata header carries.
#[derive(Debug, Clone)]
pub struct RunInfo {
    pub tool: String,
    pub config_hash: String,
    pub config_toml: String,
    pub preset: Option<String>,
    pub propagator: PropagatorKind,
    /// Window derivation; auto windows are recomputed per sweep point.
    pub policy: WindowPolicy,
    /// Resolved window of the base point.
    pub window: TimeWindow,
}

impl RunInfo {
    pub fn new(config: &RunConfig, run: &ResolvedRun) -> Self {
        Self {
            tool: format!("cstirap {}", env!("CARGO_PKG_VERSION")),
            config_hash: config.hash(),
            config_toml: config.to_toml(),
            preset: run.preset.clone(),
            propagator: run.propagator,
            policy: run.window,
            window: run.base_window(),
        }
    }

    fn window_line(&self) -> String {
        let base = format!(
            "t_start={} t_end={}",
            fmt(self.window.t_start),
            fmt(self.window.t_end)
        );
        match self.policy {
            WindowPolicy::Auto { widths } => {
                format!(
                    "# window: auto ±(τ/2 + {}·T), base point {base}",
                    fmt(widths)
                )
            }
            WindowPolicy::Fixed(_) => format!("# window: {base}"),
        }
    }

    fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("# {}", self.tool),
            format!("# config-hash: {}", self.config_hash),
        ];
        if let Some(preset) = &self.preset {
            lines.push(format!("# preset: {preset}"));
        }
        lines.push(format!("# propagator: {}", self.propagator.name()));
        lines.push(self.window_line());
        lines.push("# config:".to_string());
        for line in self.config_toml.lines() {
            lines.push(format!("#   {line}"));
        }
        lines
    }

    fn json_meta(&self) -> Vec<(&'static str, Value)> {
        let window = match self.policy {
            WindowPolicy::Auto { widths } => json!({
                "policy": "auto",
                "widths": widths,
                "t_start": self.window.t_start,
                "t_end": self.window.t_end,
            }),
            WindowPolicy::Fixed(_) => json!({
                "policy": "fixed",
                "t_start": self.window.t_start,
                "t_end": self.window.t_end,
            }),
        };
        vec![
            ("tool", json!(self.tool)),
            ("config_hash", json!(self.config_hash)),
            ("preset", json!(self.preset)),
            ("propagator", json!(self.propagator.name())),
            ("window", window),
            ("config", json!(self.config_toml)),
        ]
    }
}

/// Shortest round-trip decimal form of a binary64 value: fixed-point or
/// scientific, whichever needs fewer characters (fixed on ties).
fn fmt(x: f64) -> String {
    let fixed = format!("{x}");
    let scientific = format!("{x:e}");
    if scientific.len() < fixed.len() {
        scientific
    } else {
        fixed
    }
}

/// The seven trajectory columns at each sample.
fn trajectory_row(traj: &StateTrajectory, i: usize) -> [f64; 7] {
    let p = partition_at(traj, i);
    [
        traj.times()[i],
        p.spin1,
        p.spin2,
        p.modes,
        p.continuum,
        p.vacuum,
        traj.total_weight(i),
    ]
}

pub fn render_trajectory_csv(info: &RunInfo, traj: &StateTrajectory) -> String {
    let mut out = String::new();
    for line in info.header_lines() {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str(&TRAJECTORY_COLUMNS.join(","));
    out.push('\n');
    for i in 0..traj.len() {
        let row = trajectory_row(traj, i);
        let cells: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn render_trajectory_json(info: &RunInfo, traj: &StateTrajectory) -> String {
    let rows: Vec<Value> = (0..traj.len())
        .map(|i| json!(trajectory_row(traj, i).to_vec()))
        .collect();
    let mut doc = serde_json::Map::new();
    for (k, v) in info.json_meta() {
        doc.insert(k.to_string(), v);
    }
    doc.insert("columns".to_string(), json!(TRAJECTORY_COLUMNS));
    doc.insert("rows".to_string(), Value::Array(rows));
    pretty(&Value::Object(doc))
}

fn sweep_columns(result: &SweepResult) -> Vec<String> {
    let mut cols: Vec<String> = result
        .axes
        .iter()
        .map(|a| a.param.key().to_string())
        .collect();
    cols.push("F".to_string());
    cols.push("converged".to_string());
    cols
}

fn sweep_axis_lines(result: &SweepResult) -> Vec<String> {
    result
        .axes
        .iter()
        .enumerate()
        .map(|(i, a)| {
            format!(
                "# axis{}: param={} min={} max={} count={}",
                i + 1,
                a.param.key(),
                fmt(a.min),
                fmt(a.max),
                a.count
            )
        })
        .collect()
}

pub fn render_sweep_csv(info: &RunInfo, result: &SweepResult) -> String {
    let mut out = String::new();
    for line in info.header_lines() {
        out.push_str(&line);
        out.push('\n');
    }
    for line in sweep_axis_lines(result) {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str(&sweep_columns(result).join(","));
    out.push('\n');
    for point in &result.points {
        let mut cells: Vec<String> = point.coords.iter().map(|&c| fmt(c)).collect();
        match point.fidelity {
            Some(f) => {
                cells.push(fmt(f));
                cells.push("1".to_string());
            }
            None => {
                cells.push("NaN".to_string());
                cells.push("0".to_string());
            }
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn render_sweep_json(info: &RunInfo, result: &SweepResult) -> String {
    #[derive(Serialize)]
    struct PointError {
        row: usize,
        message: String,
    }

    let rows: Vec<Value> = result
        .points
        .iter()
        .map(|p| {
            let mut row: Vec<Value> = p.coords.iter().map(|&c| json!(c)).collect();
            row.push(p.fidelity.map_or(Value::Null, |f| json!(f)));
            row.push(json!(if p.converged() { 1 } else { 0 }));
            Value::Array(row)
        })
        .collect();
    let errors: Vec<PointError> = result
        .points
        .iter()
        .enumerate()
        .filter_map(|(row, p)| {
            p.error.as_ref().map(|message| PointError {
                row,
                message: message.clone(),
            })
        })
        .collect();
    let partitions: Option<Vec<Value>> =
        result
            .points
            .iter()
            .any(|p| p.partition.is_some())
            .then(|| {
                result
                    .points
                    .iter()
                    .map(|p| {
                        p.partition.map_or(Value::Null, |q| {
                            json!({
                                "spin1": q.spin1,
                                "spin2": q.spin2,
                                "modes": q.modes,
                                "continuum": q.continuum,
                                "vacuum": q.vacuum,
                            })
                        })
                    })
                    .collect()
            });

    let mut doc = serde_json::Map::new();
    for (k, v) in info.json_meta() {
        doc.insert(k.to_string(), v);
    }
    doc.insert(
        "axes".to_string(),
        serde_json::to_value(&result.axes).expect("axes serialize"),
    );
    doc.insert("columns".to_string(), json!(sweep_columns(result)));
    doc.insert("rows".to_string(), Value::Array(rows));
    doc.insert(
        "errors".to_string(),
        serde_json::to_value(errors).expect("errors serialize"),
    );
    if let Some(parts) = partitions {
        doc.insert("partitions".to_string(), Value::Array(parts));
    }
    pretty(&Value::Object(doc))
}

pub fn render_convergence_csv(info: &RunInfo, report: &ConvergenceReport) -> String {
    let mut out = String::new();
    for line in info.header_lines() {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str(&CONVERGENCE_COLUMNS.join(","));
    out.push('\n');
    for e in &report.entries {
        let diff = e.difference.map_or(String::new(), fmt);
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.check,
            fmt(e.setting),
            fmt(e.fidelity),
            diff
        ));
    }
    for v in &report.verdicts {
        out.push_str(&format!(
            "# verdict: {} {} = {} (threshold {}) {}\n",
            v.check,
            v.description,
            fmt(v.difference),
            fmt(v.threshold),
            if v.pass { "PASS" } else { "FAIL" }
        ));
    }
    out
}

pub fn render_convergence_json(info: &RunInfo, report: &ConvergenceReport) -> String {
    let mut doc = serde_json::Map::new();
    for (k, v) in info.json_meta() {
        doc.insert(k.to_string(), v);
    }
    doc.insert("columns".to_string(), json!(CONVERGENCE_COLUMNS));
    doc.insert(
        "rows".to_string(),
        serde_json::to_value(&report.entries).expect("entries serialize"),
    );
    doc.insert(
        "verdicts".to_string(),
        serde_json::to_value(&report.verdicts).expect("verdicts serialize"),
    );
    pretty(&Value::Object(doc))
}

fn pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json renders");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;
    use crate::dynamics::evolve_pure;
    use crate::sweep::{run_sweep, SweepOptions};

    fn info_for(text: &str) -> (RunInfo, ResolvedRun) {
        let cfg = parse_config(text).unwrap();
        let run = cfg.resolve().unwrap();
        (RunInfo::new(&cfg, &run), run)
    }

    #[test]
    fn trajectory_csv_shape() {
        let (info, run) = info_for("[params]\ndstep = 0.25\n[integrator]\nsamples = 8\n");
        let sys = run.params.build_hamiltonian().unwrap();
        let traj = evolve_pure(&sys, run.base_window(), &run.integrator).unwrap();
        let csv = render_trajectory_csv(&info, &traj);

        let lines: Vec<&str> = csv.lines().collect();
        let header_idx = lines.iter().position(|l| !l.starts_with('#')).unwrap();
        assert_eq!(
            lines[header_idx],
            "t,F1,F2,p_modes,p_continuum,p_vacuum,norm"
        );
        assert_eq!(lines.len() - header_idx - 1, 8);
        // initial condition row
        let first: Vec<&str> = lines[header_idx + 1].split(',').collect();
        assert_eq!(first[1], "1");
        assert_eq!(first[2], "0");
        assert!(lines.iter().any(|l| l.starts_with("# config-hash: ")));
    }

    #[test]
    fn rendering_is_deterministic() {
        let (info, run) = info_for("[params]\ndstep = 0.5\n[integrator]\nsamples = 4\n");
        let sys = run.params.build_hamiltonian().unwrap();
        let a = render_trajectory_csv(
            &info,
            &evolve_pure(&sys, run.base_window(), &run.integrator).unwrap(),
        );
        let b = render_trajectory_csv(
            &info,
            &evolve_pure(&sys, run.base_window(), &run.integrator).unwrap(),
        );
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_csv_marks_failed_points() {
        let (info, run) = info_for(
            "[params]\ndstep = 0.25\n[integrator]\nsamples = 2\n\n[[sweep.axes]]\nparam = \"dstep\"\nmin = 0.25\nmax = 0.3\ncount = 2\n",
        );
        let result = run_sweep(
            &run.params,
            &run.axes,
            &SweepOptions {
                integrator: run.integrator.clone(),
                ..Default::default()
            },
        )
        .unwrap();
        let csv = render_sweep_csv(&info, &result);
        let lines: Vec<&str> = csv.lines().collect();
        let header_idx = lines.iter().position(|l| !l.starts_with('#')).unwrap();
        assert_eq!(lines[header_idx], "dstep,F,converged");
        assert!(lines[header_idx + 1].ends_with(",1"));
        assert_eq!(lines[header_idx + 2], "0.3,NaN,0");
        assert!(lines.iter().any(|l| l.starts_with("# axis1: param=dstep")));
    }

    #[test]
    fn sweep_json_uses_null_for_failures() {
        let (info, run) = info_for(
            "[params]\ndstep = 0.25\n[integrator]\nsamples = 2\n\n[[sweep.axes]]\nparam = \"dstep\"\nmin = 0.25\nmax = 0.3\ncount = 2\n",
        );
        let result = run_sweep(
            &run.params,
            &run.axes,
            &SweepOptions {
                integrator: run.integrator.clone(),
                ..Default::default()
            },
        )
        .unwrap();
        let doc: Value = serde_json::from_str(&render_sweep_json(&info, &result)).unwrap();
        assert_eq!(doc["columns"], json!(["dstep", "F", "converged"]));
        assert_eq!(doc["rows"][1][1], Value::Null);
        assert_eq!(doc["rows"][1][2], json!(0));
        assert_eq!(doc["errors"][0]["row"], json!(1));
    }

    #[test]
    fn float_formatting_round_trips() {
        for v in [
            0.1,
            1.0 / 3.0,
            12.4 / 31.0,
            1e-15,
            38.75,
            -2.25,
            5.1e-53,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        // common values keep the plain form, extremes go scientific
        assert_eq!(fmt(0.5), "0.5");
        assert_eq!(fmt(1.0), "1");
        assert_eq!(fmt(1e-15), "1e-15");
    }
}
