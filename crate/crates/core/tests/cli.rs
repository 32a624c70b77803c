//! End-to-end checks of the `cstirap` binary: exit codes, file shapes, and
//! byte-level reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cstirap(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cstirap"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect())
        .collect()
}

#[test]
fn evolve_preset_writes_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = cstirap(
        &["evolve", "--preset", "fig2b-eta2-1.5", "-o", "trace.csv"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 256);

    // first row is the initial condition, last row the completed transfer
    let first = &rows[0];
    assert_eq!(first[1], 1.0, "F1(t_start)");
    assert_eq!(first[2], 0.0, "F2(t_start)");
    let last = rows.last().unwrap();
    assert!(last[2] >= 0.95, "final F2 = {}", last[2]);

    // lossless run: sector populations resolve unity, vacuum stays empty
    for row in &rows {
        let sum = row[1] + row[2] + row[3] + row[4];
        assert!((sum - 1.0).abs() < 1e-8);
        assert!(row[5].abs() < 1e-8, "p_vacuum = {}", row[5]);
    }
}

#[test]
fn evolve_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = cstirap(
            &["evolve", "--preset", "fig2c-detuning-5", "-o", name],
            dir.path(),
        );
        assert!(out.status.success());
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn evolve_rejects_sweep_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = cstirap(&["evolve", "--preset", "fig3", "-o", "x.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn missing_output_path_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = cstirap(&["evolve", "--preset", "fig2b-eta2-1.5"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("output"));
}

#[test]
fn config_syntax_and_validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("broken.toml"), "params = [unclosed\n").unwrap();
    let out = cstirap(&["evolve", "-c", "broken.toml", "-o", "x.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    fs::write(dir.path().join("bad.toml"), "[params]\ndstep = 0.3\n").unwrap();
    let out = cstirap(&["evolve", "-c", "bad.toml", "-o", "x.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dstep"));

    fs::write(dir.path().join("empty.toml"), "").unwrap();
    let out = cstirap(&["evolve", "-c", "empty.toml", "-o", "x.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn integration_failure_exits_two_and_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    // A micro-capped step cannot cross the window within the step budget.
    fs::write(
        dir.path().join("stuck.toml"),
        "[params]\ndstep = 2.0\n[integrator]\nmax_step = 1e-6\nsamples = 2\n",
    )
    .unwrap();
    let out = cstirap(&["evolve", "-c", "stuck.toml", "-o", "x.csv"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn sweep_grid_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("grid.toml"),
        "[params]\ndstep = 0.1\n[integrator]\nsamples = 2\n\
         [[sweep.axes]]\nparam = \"omega\"\nmin = 1.0\nmax = 3.0\ncount = 3\n\
         [[sweep.axes]]\nparam = \"g\"\nmin = 5.0\nmax = 10.0\ncount = 2\n",
    )
    .unwrap();
    for (name, workers) in [("w1.csv", "1"), ("wmax.csv", "0")] {
        let out = cstirap(
            &["sweep", "-c", "grid.toml", "-o", name, "--workers", workers],
            dir.path(),
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = fs::read(dir.path().join("w1.csv")).unwrap();
    let b = fs::read(dir.path().join("wmax.csv")).unwrap();
    assert_eq!(a, b);

    let rows = data_rows(&String::from_utf8(a).unwrap());
    assert_eq!(rows.len(), 6);
    for row in &rows {
        assert_eq!(row.len(), 4); // omega, g, F, converged
        assert_eq!(row[3], 1.0);
        assert!(row[2] >= 0.0 && row[2] <= 1.0 + 1e-8);
    }
}

#[test]
fn partially_failed_sweep_exits_three_but_writes_the_table() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("partial.toml"),
        "[params]\ndstep = 0.25\n[integrator]\nsamples = 2\n\
         [[sweep.axes]]\nparam = \"dstep\"\nmin = 0.25\nmax = 0.3\ncount = 2\n",
    )
    .unwrap();
    let out = cstirap(&["sweep", "-c", "partial.toml", "-o", "t.csv"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let tail: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(tail[1].split(',').next_back(), Some("1"));
    assert!(tail[2].contains("NaN"));
    assert_eq!(tail[2].split(',').next_back(), Some("0"));
}

#[test]
fn sweep_rejects_trace_configs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("point.toml"), "[params]\ndstep = 0.25\n").unwrap();
    let out = cstirap(&["sweep", "-c", "point.toml", "-o", "x.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn converge_reports_pass_for_a_fine_grid() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("point.toml"),
        "[params]\ndstep = 0.125\n[integrator]\nsamples = 2\n",
    )
    .unwrap();
    let out = cstirap(
        &["converge", "-c", "point.toml", "-o", "report.csv"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.matches("PASS").count(), 3, "{stdout}");

    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let rows: Vec<&str> = report.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "check,setting,F,diff");
    assert_eq!(rows.len(), 7); // header + three dstep rows + three window rows
    assert!(report.contains("# verdict: dstep"));
    assert!(report.contains("# verdict: window"));
}

#[test]
fn converge_writes_a_partial_report_when_integration_fails() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("stuck.toml"),
        "[params]\ndstep = 2.0\n[integrator]\nmax_step = 1e-6\nsamples = 2\n",
    )
    .unwrap();
    let out = cstirap(
        &["converge", "-c", "stuck.toml", "-o", "report.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    // the partial report is still written (here: no completed refinements)
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report.contains("check,setting,F,diff"));
}

#[test]
fn converge_flags_an_unconverged_single_mode_bath() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("coarse.toml"),
        "[params]\ndstep = 2.0\n[integrator]\nsamples = 2\n",
    )
    .unwrap();
    let out = cstirap(
        &["converge", "-c", "coarse.toml", "-o", "report.csv"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn presets_list_names_every_figure() {
    let dir = tempfile::tempdir().unwrap();
    let out = cstirap(&["presets"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in [
        "fig2b-eta2-0.5",
        "fig2c-detuning-10",
        "fig2d-gamma-1.5",
        "fig3",
        "fig4a",
        "fig4b",
        "fig5",
    ] {
        assert!(stdout.contains(name), "missing {name}");
    }
}

#[test]
fn json_format_mirrors_the_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "format = \"json\"\n[params]\ndstep = 0.25\n[integrator]\nsamples = 8\n",
    )
    .unwrap();
    let out = cstirap(
        &["evolve", "-c", "run.toml", "-o", "trace.json"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("trace.json")).unwrap()).unwrap();
    assert_eq!(
        doc["columns"],
        serde_json::json!([
            "t",
            "F1",
            "F2",
            "p_modes",
            "p_continuum",
            "p_vacuum",
            "norm"
        ])
    );
    assert_eq!(doc["rows"].as_array().unwrap().len(), 8);
    assert_eq!(doc["rows"][0][1], serde_json::json!(1.0));
    assert!(doc["config_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn lindblad_strategy_is_selectable_and_capped() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("dm.toml"),
        "propagator = \"lindblad\"\n[params]\ndstep = 0.25\n[integrator]\nsamples = 8\n",
    )
    .unwrap();
    let out = cstirap(&["evolve", "-c", "dm.toml", "-o", "dm.csv"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = data_rows(&fs::read_to_string(dir.path().join("dm.csv")).unwrap());
    // trace column: the density path keeps tr ρ = 1
    for row in &rows {
        assert!((row[6] - 1.0).abs() < 1e-8);
    }

    fs::write(
        dir.path().join("toobig.toml"),
        "propagator = \"lindblad\"\n[params]\ndstep = 0.01\n",
    )
    .unwrap();
    let out = cstirap(&["evolve", "-c", "toobig.toml", "-o", "x.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lindblad_max_modes"));
}
