//! `cstirap` — regenerate the figure-level data of the continuum-STIRAP
//! transfer model as reproducible CSV/JSON tables.
//!
//! Exit codes: 0 success, 1 configuration/usage error, 2 integration error,
//! 3 sweep with failed grid points.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cstirap::config::{parse_config, OutputFormat, PropagatorKind, ResolvedRun, RunConfig};
use cstirap::convergence::run_convergence;
use cstirap::dynamics::{propagator_by_name, InitialState};
use cstirap::output::{
    render_convergence_csv, render_convergence_json, render_sweep_csv, render_sweep_json,
    render_trajectory_csv, render_trajectory_json, RunInfo,
};
use cstirap::sweep::{figure_presets, run_sweep, SweepOptions};

const EXIT_CONFIG: u8 = 1;
const EXIT_INTEGRATION: u8 = 2;
const EXIT_PARTIAL_SWEEP: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cstirap",
    version,
    about = "Population transfer between two spins through a lossy structured continuum",
    after_help = "Every run is configured by a TOML document (see the README for the schema) \
                  or by a named preset; `cstirap presets` lists the presets."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML run configuration.
    #[arg(short, long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Use a named figure preset instead of a config file.
    #[arg(short, long)]
    preset: Option<String>,
    /// Output file; overrides the config's `output` key.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Output format; overrides the config's `format` key.
    #[arg(short, long, value_parser = parse_format)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one configured point and write the sampled time traces.
    Evolve(RunArgs),
    /// Run a 1D/2D parameter sweep and write the fidelity table.
    Sweep {
        #[command(flatten)]
        args: RunArgs,
        /// Worker threads (0 = all cores, 1 = serial); overrides the config.
        #[arg(short, long)]
        workers: Option<usize>,
    },
    /// Rerun one point at refined δ and wider windows and report the drifts.
    Converge(RunArgs),
    /// List the figure presets with their parameters.
    Presets,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        other => Err(format!("unknown format {other:?} (expected csv or json)")),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Evolve(args) => cmd_evolve(&args),
        Command::Sweep { args, workers } => cmd_sweep(&args, workers),
        Command::Converge(args) => cmd_converge(&args),
        Command::Presets => cmd_presets(),
    }
    .unwrap_or_else(|failure| {
        eprintln!("cstirap: {}", failure.message);
        ExitCode::from(failure.code)
    })
}

/// Print to stdout, treating a closed pipe (`… | head`) as a quiet success
/// instead of the default panic.
macro_rules! emit {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn integration(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INTEGRATION,
            message: message.into(),
        }
    }
}

struct Prepared {
    config: RunConfig,
    run: ResolvedRun,
    output: PathBuf,
    format: OutputFormat,
}

fn prepare(args: &RunArgs) -> Result<Prepared, Failure> {
    let config = match (&args.config, &args.preset) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| Failure::config(e.to_string()))?
        }
        (None, Some(name)) => RunConfig::for_preset(name),
        (None, None) => {
            return Err(Failure::config("either --config or --preset is required"));
        }
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    let run = config
        .resolve()
        .map_err(|e| Failure::config(e.to_string()))?;
    let format = args.format.unwrap_or(run.format);
    let output = args
        .output
        .clone()
        .or_else(|| run.output.clone())
        .ok_or_else(|| {
            Failure::config("no output path: pass --output or set `output` in the config")
        })?;
    Ok(Prepared {
        config,
        run,
        output,
        format,
    })
}

fn write_output(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

fn cmd_evolve(args: &RunArgs) -> Result<ExitCode, Failure> {
    let prepared = prepare(args)?;
    let run = &prepared.run;
    if run.is_sweep() {
        return Err(Failure::config(
            "this configuration defines a sweep; use `cstirap sweep` (or pick a trace preset)",
        ));
    }

    let sys = run
        .params
        .build_hamiltonian()
        .map_err(|e| Failure::config(e.to_string()))?;
    let propagator = propagator_by_name(run.propagator.name()).expect("registered strategy");
    let traj = propagator
        .propagate(
            &sys,
            &InitialState::Spin1,
            run.base_window(),
            &run.integrator,
        )
        .map_err(|e| Failure::integration(e.to_string()))?;

    let info = RunInfo::new(&prepared.config, run);
    let rendered = match prepared.format {
        OutputFormat::Csv => render_trajectory_csv(&info, &traj),
        OutputFormat::Json => render_trajectory_json(&info, &traj),
    };
    write_output(&prepared.output, &rendered)?;
    emit!(
        "wrote {} ({} samples, window [{}, {}], propagator {})",
        prepared.output.display(),
        traj.len(),
        info.window.t_start,
        info.window.t_end,
        run.propagator.name()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: &RunArgs, workers: Option<usize>) -> Result<ExitCode, Failure> {
    let prepared = prepare(args)?;
    let run = &prepared.run;
    if !run.is_sweep() {
        return Err(Failure::config(
            "this configuration has no sweep axes; use `cstirap evolve` or add [[sweep.axes]]",
        ));
    }
    if run.propagator == PropagatorKind::Lindblad {
        return Err(Failure::config(
            "sweeps run on the pure-state path; set propagator = \"pure\"",
        ));
    }

    let opts = SweepOptions {
        workers: workers.unwrap_or(run.workers),
        record_partition: run.record_partition,
        window: run.window,
        integrator: run.integrator.clone(),
    };
    let result =
        run_sweep(&run.params, &run.axes, &opts).map_err(|e| Failure::config(e.to_string()))?;

    let info = RunInfo::new(&prepared.config, run);
    let rendered = match prepared.format {
        OutputFormat::Csv => render_sweep_csv(&info, &result),
        OutputFormat::Json => render_sweep_json(&info, &result),
    };
    write_output(&prepared.output, &rendered)?;

    let failed = result.failed_points();
    emit!(
        "wrote {} ({} grid points, {failed} failed)",
        prepared.output.display(),
        result.grid_len()
    );
    if failed > 0 {
        eprintln!("cstirap: {failed} grid point(s) failed; see the converged column");
        return Ok(ExitCode::from(EXIT_PARTIAL_SWEEP));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_converge(args: &RunArgs) -> Result<ExitCode, Failure> {
    let prepared = prepare(args)?;
    let run = &prepared.run;
    if run.is_sweep() {
        return Err(Failure::config(
            "converge takes a single-point configuration, not a sweep",
        ));
    }

    let (report, error) = run_convergence(&run.params, &run.window, &run.integrator);
    let info = RunInfo::new(&prepared.config, run);
    let rendered = match prepared.format {
        OutputFormat::Csv => render_convergence_csv(&info, &report),
        OutputFormat::Json => render_convergence_json(&info, &report),
    };
    write_output(&prepared.output, &rendered)?;

    for v in &report.verdicts {
        emit!(
            "{}: {} = {} (threshold {}) {}",
            v.check,
            v.description,
            v.difference,
            v.threshold,
            if v.pass { "PASS" } else { "FAIL" }
        );
    }
    if let Some(err) = error {
        eprintln!("cstirap: study incomplete: {err}");
        return Ok(ExitCode::from(EXIT_INTEGRATION));
    }
    emit!("wrote {}", prepared.output.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_presets() -> Result<ExitCode, Failure> {
    emit!("{:<18} {:<6} summary / parameters", "name", "kind");
    for preset in figure_presets() {
        let kind = if preset.is_sweep() { "sweep" } else { "trace" };
        let p = &preset.params;
        emit!("{:<18} {:<6} {}", preset.name, kind, preset.summary);
        emit!(
            "{:<18} {:<6}   Δ={} g={} η₁={} η₂={} ω_c={} Ω={} T={} τ={} γ={} δ={}",
            "",
            "",
            p.detuning,
            p.spectral1.amplitude,
            p.spectral1.exponent,
            p.spectral2.exponent,
            p.spectral1.cutoff,
            p.pulses.peak,
            p.pulses.width,
            p.pulses.delay,
            p.loss_rate,
            p.dstep
        );
        for (i, axis) in preset.axes.iter().enumerate() {
            emit!(
                "{:<18} {:<6}   axis{}: {} from {} to {} in {} points",
                "",
                "",
                i + 1,
                axis.param.key(),
                axis.min,
                axis.max,
                axis.count
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
