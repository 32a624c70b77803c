//! Deterministic 1D/2D parameter sweeps over the model, reproducing the four
//! figure-level studies, with independent grid points fanned out over a
//! worker pool.
//!
//! Grid points are separate jobs; every result is written into a
//! preallocated, row-major table slot keyed by grid index, so the output is
//! bit-identical for any worker count. Failed points (for instance a δ
//! override that breaks the ω_c/δ integrality) are recorded in place and the
//! sweep keeps going.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{evolve_pure, IntegratorConfig, WindowPolicy};
use crate::model::ModelParams;
use crate::observables::{final_transfer_fidelity, partition_at, PopulationPartition};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SweepError {
    #[error("a sweep needs one or two axes, got {0}")]
    AxisCount(usize),
    #[error("sweep axes must name distinct parameters ({0} repeats)")]
    DuplicateParameter(&'static str),
    #[error("invalid axis over {param}: {reason}")]
    InvalidAxis { param: &'static str, reason: String },
}

/// The sweepable scalar parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    /// Pulse peak Ω.
    Omega,
    /// Spectral amplitude g (applied to both densities).
    G,
    /// Pulse peak separation τ.
    Tau,
    /// Pulse width T.
    Width,
    /// Common spin/mode frequency Δ.
    Detuning,
    /// Continuum loss rate γ.
    Gamma,
    /// Spectral exponent η₁.
    Eta1,
    /// Spectral exponent η₂.
    Eta2,
    /// Discretization step δ.
    Dstep,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 9] = [
        Self::Omega,
        Self::G,
        Self::Tau,
        Self::Width,
        Self::Detuning,
        Self::Gamma,
        Self::Eta1,
        Self::Eta2,
        Self::Dstep,
    ];

    /// Config/CSV key.
    pub fn key(&self) -> &'static str {
        match self {
            Self::Omega => "omega",
            Self::G => "g",
            Self::Tau => "tau",
            Self::Width => "width",
            Self::Detuning => "detuning",
            Self::Gamma => "gamma",
            Self::Eta1 => "eta1",
            Self::Eta2 => "eta2",
            Self::Dstep => "dstep",
        }
    }

    /// Override the named parameter on a copy of the base point.
    pub fn apply(&self, params: &mut ModelParams, value: f64) {
        match self {
            Self::Omega => params.pulses.peak = value,
            Self::G => {
                params.spectral1.amplitude = value;
                params.spectral2.amplitude = value;
            }
            Self::Tau => params.pulses.delay = value,
            Self::Width => params.pulses.width = value,
            Self::Detuning => params.detuning = value,
            Self::Gamma => params.loss_rate = value,
            Self::Eta1 => params.spectral1.exponent = value,
            Self::Eta2 => params.spectral2.exponent = value,
            Self::Dstep => params.dstep = value,
        }
    }
}

/// One linearly spaced sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: SweepParameter,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SweepAxis {
    pub fn new(
        param: SweepParameter,
        min: f64,
        max: f64,
        count: usize,
    ) -> Result<Self, SweepError> {
        let invalid = |reason: &str| SweepError::InvalidAxis {
            param: param.key(),
            reason: reason.to_string(),
        };
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(invalid(&format!(
                "min = {min} must be strictly below max = {max}"
            )));
        }
        if count < 2 {
            return Err(invalid("point count must be at least 2"));
        }
        Ok(Self {
            param,
            min,
            max,
            count,
        })
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        Self::new(self.param, self.min, self.max, self.count).map(|_| ())
    }

    /// The grid values, endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.count - 1) as f64;
        let mut v: Vec<f64> = (0..self.count)
            .map(|i| self.min + i as f64 * step)
            .collect();
        v[self.count - 1] = self.max;
        v
    }
}

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// Axis values of this point (one or two coordinates).
    pub coords: Vec<f64>,
    /// Final transfer efficiency F; `None` when the point failed.
    pub fidelity: Option<f64>,
    /// Full population split at t_end, when recording was requested.
    pub partition: Option<PopulationPartition>,
    /// Failure description for points that could not run.
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn converged(&self) -> bool {
        self.fidelity.is_some()
    }
}

/// Row-major table of final fidelities over the grid. For two axes, the first
/// axis is the slow (outer) index.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub base: ModelParams,
    pub axes: Vec<SweepAxis>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn grid_len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Point by per-axis indices (second index 0 for 1D sweeps).
    pub fn point(&self, i: usize, j: usize) -> &SweepPoint {
        let idx = match self.axes.len() {
            1 => i,
            2 => i * self.axes[1].count + j,
            _ => unreachable!("validated axis count"),
        };
        &self.points[idx]
    }

    pub fn fidelity(&self, i: usize, j: usize) -> Option<f64> {
        self.point(i, j).fidelity
    }

    pub fn failed_points(&self) -> usize {
        self.points.iter().filter(|p| !p.converged()).count()
    }
}

/// Execution knobs for one sweep.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Worker threads; 0 uses every core, 1 is the fully serial reference.
    pub workers: usize,
    /// Record the full population split at t_end per point.
    pub record_partition: bool,
    /// Window derivation per point (auto windows follow each point's τ and T).
    pub window: WindowPolicy,
    pub integrator: IntegratorConfig,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            workers: 0,
            record_partition: false,
            window: WindowPolicy::default(),
            integrator: IntegratorConfig {
                samples: 2,
                ..Default::default()
            },
        }
    }
}

/// Run the sweep: override the axis parameters at every grid point, propagate
/// with the pure-state path, and record F = F₂(t_end).
pub fn run_sweep(
    base: &ModelParams,
    axes: &[SweepAxis],
    opts: &SweepOptions,
) -> Result<SweepResult, SweepError> {
    if axes.is_empty() || axes.len() > 2 {
        return Err(SweepError::AxisCount(axes.len()));
    }
    for axis in axes {
        axis.validate()?;
    }
    if axes.len() == 2 && axes[0].param == axes[1].param {
        return Err(SweepError::DuplicateParameter(axes[0].param.key()));
    }

    let coords: Vec<Vec<f64>> = match axes {
        [a] => a.values().into_iter().map(|v| vec![v]).collect(),
        [a, b] => {
            let bv = b.values();
            a.values()
                .into_iter()
                .flat_map(|va| bv.iter().map(move |&vb| vec![va, vb]))
                .collect()
        }
        _ => unreachable!(),
    };

    let eval = |coord: &Vec<f64>| -> SweepPoint {
        let mut params = base.clone();
        for (axis, &value) in axes.iter().zip(coord.iter()) {
            axis.param.apply(&mut params, value);
        }
        match evaluate_point(&params, opts) {
            Ok((fidelity, partition)) => SweepPoint {
                coords: coord.clone(),
                fidelity: Some(fidelity),
                partition,
                error: None,
            },
            Err(message) => SweepPoint {
                coords: coord.clone(),
                fidelity: None,
                partition: None,
                error: Some(message),
            },
        }
    };

    let points: Vec<SweepPoint> = if opts.workers == 1 {
        coords.iter().map(eval).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .expect("sweep worker pool");
        pool.install(|| coords.par_iter().map(eval).collect())
    };

    Ok(SweepResult {
        base: base.clone(),
        axes: axes.to_vec(),
        points,
    })
}

fn evaluate_point(
    params: &ModelParams,
    opts: &SweepOptions,
) -> Result<(f64, Option<PopulationPartition>), String> {
    let sys = params.build_hamiltonian().map_err(|e| e.to_string())?;
    let window = opts.window.window_for(&params.pulses);
    let traj = evolve_pure(&sys, window, &opts.integrator).map_err(|e| e.to_string())?;
    let fidelity = final_transfer_fidelity(&traj);
    let partition = opts
        .record_partition
        .then(|| partition_at(&traj, traj.len() - 1));
    Ok((fidelity, partition))
}

/// One named figure-level study: a base parameter point plus, for grid
/// panels, the two axes to sweep. Trace panels (empty `axes`) are single
/// `evolve` runs.
#[derive(Debug, Clone)]
pub struct FigurePreset {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: ModelParams,
    pub axes: Vec<SweepAxis>,
}

impl FigurePreset {
    pub fn is_sweep(&self) -> bool {
        !self.axes.is_empty()
    }
}

fn grid(param: SweepParameter, min: f64, max: f64, count: usize) -> SweepAxis {
    SweepAxis::new(param, min, max, count).expect("preset axis")
}

/// The named parameter studies. Base point everywhere: g = 10, η₁ = η₂ = 1.5,
/// ω_c = 2, Ω = 2, T = 2, τ = 2, Δ = 0, γ = 0, δ = ω_c/200; each preset keeps
/// that point except for the quantity it varies. Grid ranges are chosen so
/// the reference values (Ω ∈ {1, 2, 5, 10}, g ∈ {10, 40}, γ ∈ {0, 0.5, 1,
/// 1.5}) land on exact grid points at the default 32×32 resolution.
pub fn figure_presets() -> Vec<FigurePreset> {
    let base = ModelParams::baseline();
    let with_eta2 = |eta2: f64| {
        let mut p = base.clone();
        p.spectral2.exponent = eta2;
        p
    };
    let with_detuning = |detuning: f64| ModelParams {
        detuning,
        ..base.clone()
    };
    let with_gamma = |loss_rate: f64| ModelParams {
        loss_rate,
        ..base.clone()
    };

    vec![
        FigurePreset {
            name: "fig2b-eta2-1.5",
            summary: "time traces, symmetric couplings (η₁ = η₂ = 1.5)",
            params: with_eta2(1.5),
            axes: vec![],
        },
        FigurePreset {
            name: "fig2b-eta2-1.0",
            summary: "time traces, asymmetric couplings (η₂ = 1, ohmic target side)",
            params: with_eta2(1.0),
            axes: vec![],
        },
        FigurePreset {
            name: "fig2b-eta2-0.5",
            summary: "time traces, asymmetric couplings (η₂ = 0.5, sub-ohmic target side)",
            params: with_eta2(0.5),
            axes: vec![],
        },
        FigurePreset {
            name: "fig2c-detuning-0",
            summary: "time traces on resonance (Δ = 0)",
            params: with_detuning(0.0),
            axes: vec![],
        },
        FigurePreset {
            name: "fig2c-detuning-5",
            summary: "time traces detuned above the band (Δ = 5)",
            params: with_detuning(5.0),
            axes: vec![],
        },
        FigurePreset {
            name: "fig2c-detuning-10",
            summary: "time traces far off resonance (Δ = 10)",
            params: with_detuning(10.0),
            axes: vec![],
        },
        FigurePreset {
            name: "fig2d-gamma-0",
            summary: "time traces without loss",
            params: with_gamma(0.0),
            axes: vec![],
        },
        FigurePreset {
            name: "fig2d-gamma-0.5",
            summary: "time traces with moderate loss (γ = 0.5)",
            params: with_gamma(0.5),
            axes: vec![],
        },
        FigurePreset {
            name: "fig2d-gamma-1",
            summary: "time traces with strong loss (γ = 1)",
            params: with_gamma(1.0),
            axes: vec![],
        },
        FigurePreset {
            name: "fig2d-gamma-1.5",
            summary: "time traces with stronger loss (γ = 1.5)",
            params: with_gamma(1.5),
            axes: vec![],
        },
        FigurePreset {
            name: "fig3",
            summary: "final transfer vs pulse peak Ω and coupling amplitude g",
            params: base.clone(),
            axes: vec![
                grid(SweepParameter::Omega, 0.5, 16.0, 32),
                grid(SweepParameter::G, 1.25, 40.0, 32),
            ],
        },
        FigurePreset {
            name: "fig4a",
            summary: "final transfer vs pulse peak Ω and peak separation τ",
            params: base.clone(),
            axes: vec![
                grid(SweepParameter::Omega, 1.0, 10.0, 32),
                grid(SweepParameter::Tau, 1.0, 8.0, 32),
            ],
        },
        FigurePreset {
            name: "fig4b",
            summary: "final transfer vs peak separation τ and width T at Ω = 2",
            params: base.clone(),
            axes: vec![
                grid(SweepParameter::Tau, 1.0, 8.0, 32),
                grid(SweepParameter::Width, 1.0, 5.0, 32),
            ],
        },
        FigurePreset {
            name: "fig5",
            summary: "final transfer vs coupling amplitude g and loss rate γ",
            params: base,
            axes: vec![
                grid(SweepParameter::G, 1.25, 40.0, 32),
                grid(SweepParameter::Gamma, 0.0, 1.55, 32),
            ],
        },
    ]
}

/// Preset lookup by name.
pub fn find_preset(name: &str) -> Option<FigurePreset> {
    figure_presets().into_iter().find(|p| p.name == name)
}
