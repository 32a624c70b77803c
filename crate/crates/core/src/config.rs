//! The run configuration document: a single TOML file (or string) that picks
//! either a named figure preset or an explicit parameter point, the
//! propagation strategy, window/integrator overrides, an optional sweep
//! section, and the output destination.
//!
//! Unknown keys are rejected everywhere. The full schema, with defaults:
//!
//! ```toml
//! preset = "fig3"              # exclusive with [params]
//! propagator = "pure"          # "pure" | "lindblad"
//! output = "fig3.csv"          # optional; the CLI -o flag overrides it
//! format = "csv"               # "csv" | "json"
//! lindblad_max_modes = 64      # N cap for the density-matrix path
//!
//! [params]                     # exclusive with preset; keys all optional
//! detuning = 0.0               # Δ
//! g = 10.0                     # spectral amplitude (both densities)
//! g2 = 10.0                    # optional override for the second density
//! eta1 = 1.5                   # η₁
//! eta2 = 1.5                   # η₂
//! omega_c = 2.0                # cutoff ω_c
//! omega = 2.0                  # pulse peak Ω
//! width = 2.0                  # pulse width T
//! tau = 2.0                    # peak-to-peak separation τ
//! gamma = 0.0                  # loss rate γ
//! dstep = 0.01                 # δ; defaults to omega_c / 200
//!
//! [window]                     # either widths or both explicit bounds
//! widths = 5.0                 # t = ±(τ/2 + widths·T)
//! #t_start = -11.0
//! #t_end = 11.0
//!
//! [integrator]
//! rtol = 1e-9
//! atol = 1e-12
//! #initial_step = 1e-3
//! #max_step = 1.0              # defaults to T/2
//! samples = 256
//!
//! [sweep]
//! workers = 0                  # 0 = all cores, 1 = serial reference
//! record_partition = false
//! [[sweep.axes]]               # forbidden together with a preset
//! param = "omega"              # omega|g|tau|width|detuning|gamma|eta1|eta2|dstep
//! min = 1.0
//! max = 10.0
//! count = 32
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dynamics::{IntegratorConfig, TimeWindow, WindowPolicy};
use crate::model::{ModelError, ModelParams, PulsePair, SpectralDensity};
use crate::sweep::{find_preset, SweepAxis, SweepError, SweepParameter};

pub const DEFAULT_LINDBLAD_MAX_MODES: usize = 64;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ConfigError {
    #[error("config syntax error: {message}")]
    Syntax { message: String },
    #[error("config must choose exactly one of `preset` or `[params]`, found both")]
    ConflictingSources,
    #[error("config must choose one of `preset` or `[params]`, found neither")]
    MissingSources,
    #[error("unknown preset {name:?}; `cstirap presets` lists the available ones")]
    UnknownPreset { name: String },
    #[error("a preset fixes its own grid; remove the [[sweep.axes]] entries")]
    PresetWithExplicitAxes,
    #[error("[window] must set either `widths` or both `t_start` and `t_end`, not a mixture")]
    WindowOverspecified,
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },
    #[error(
        "the lindblad propagator is capped at N = {cap} bath modes to bound memory \
         (requested N = {modes}); raise `lindblad_max_modes` to override"
    )]
    LindbladTooLarge { modes: usize, cap: usize },
}

impl From<ModelError> for ConfigError {
    fn from(err: ModelError) -> Self {
        let field = match &err {
            ModelError::InvalidParameter { name, .. } => (*name).to_string(),
            ModelError::FrequencyOutOfDomain { .. } => "omega".to_string(),
            ModelError::NonIntegralModeCount { .. } => "dstep".to_string(),
            ModelError::MismatchedCutoffs { .. } => "omega_c".to_string(),
        };
        ConfigError::Validation {
            field,
            reason: err.to_string(),
        }
    }
}

impl From<SweepError> for ConfigError {
    fn from(err: SweepError) -> Self {
        ConfigError::Validation {
            field: "sweep.axes".to_string(),
            reason: err.to_string(),
        }
    }
}

/// Which propagation strategy the run selects from the registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropagatorKind {
    #[default]
    Pure,
    Lindblad,
}

impl PropagatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Pure => "pure",
            Self::Lindblad => "lindblad",
        }
    }
}

/// Output file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

fn default_g() -> f64 {
    10.0
}
fn default_eta() -> f64 {
    1.5
}
fn default_omega_c() -> f64 {
    2.0
}
fn default_omega() -> f64 {
    2.0
}
fn default_width() -> f64 {
    2.0
}
fn default_tau() -> f64 {
    2.0
}
fn default_lindblad_cap() -> usize {
    DEFAULT_LINDBLAD_MAX_MODES
}

/// Explicit physics point. Every key is optional; the defaults are the
/// reference operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default)]
    pub detuning: f64,
    #[serde(default = "default_g")]
    pub g: f64,
    /// Amplitude of the second spectral density, when it differs from `g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<f64>,
    #[serde(default = "default_eta")]
    pub eta1: f64,
    #[serde(default = "default_eta")]
    pub eta2: f64,
    #[serde(default = "default_omega_c")]
    pub omega_c: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dstep: Option<f64>,
}

impl Default for ParamsSection {
    fn default() -> Self {
        Self {
            detuning: 0.0,
            g: default_g(),
            g2: None,
            eta1: default_eta(),
            eta2: default_eta(),
            omega_c: default_omega_c(),
            omega: default_omega(),
            width: default_width(),
            tau: default_tau(),
            gamma: 0.0,
            dstep: None,
        }
    }
}

impl ParamsSection {
    pub fn to_model_params(&self) -> Result<ModelParams, ConfigError> {
        let params = ModelParams {
            detuning: self.detuning,
            spectral1: SpectralDensity {
                amplitude: self.g,
                exponent: self.eta1,
                cutoff: self.omega_c,
            },
            spectral2: SpectralDensity {
                amplitude: self.g2.unwrap_or(self.g),
                exponent: self.eta2,
                cutoff: self.omega_c,
            },
            pulses: PulsePair {
                peak: self.omega,
                width: self.width,
                delay: self.tau,
            },
            loss_rate: self.gamma,
            dstep: self.dstep.unwrap_or(self.omega_c / 200.0),
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

impl WindowSection {
    fn to_policy(&self) -> Result<WindowPolicy, ConfigError> {
        match (self.widths, self.t_start, self.t_end) {
            (None, None, None) => Ok(WindowPolicy::default()),
            (Some(w), None, None) => {
                if w > 0.0 {
                    Ok(WindowPolicy::Auto { widths: w })
                } else {
                    Err(ConfigError::Validation {
                        field: "window.widths".to_string(),
                        reason: "must be positive".to_string(),
                    })
                }
            }
            (None, Some(a), Some(b)) => {
                let window = TimeWindow::new(a, b).map_err(|e| ConfigError::Validation {
                    field: "window".to_string(),
                    reason: e.to_string(),
                })?;
                Ok(WindowPolicy::Fixed(window))
            }
            _ => Err(ConfigError::WindowOverspecified),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl IntegratorSection {
    fn to_config(&self) -> Result<IntegratorConfig, ConfigError> {
        let defaults = IntegratorConfig::default();
        let cfg = IntegratorConfig {
            rtol: self.rtol.unwrap_or(defaults.rtol),
            atol: self.atol.unwrap_or(defaults.atol),
            initial_step: self.initial_step,
            max_step: self.max_step,
            samples: self.samples.unwrap_or(defaults.samples),
        };
        cfg.validate().map_err(|e| ConfigError::Validation {
            field: "integrator".to_string(),
            reason: e.to_string(),
        })?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub param: SweepParameter,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// 0 = all cores, 1 = fully serial reference mode.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub record_partition: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<AxisSection>,
}

/// The parsed run document. `resolve` turns it into validated domain values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default)]
    pub propagator: PropagatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "default_lindblad_cap")]
    pub lindblad_max_modes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl RunConfig {
    /// Minimal config selecting a named preset.
    pub fn for_preset(name: &str) -> Self {
        Self {
            preset: Some(name.to_string()),
            lindblad_max_modes: default_lindblad_cap(),
            ..Default::default()
        }
    }

    /// Canonical serialized form (also the hashing input).
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical form, hex-encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        let mut out = String::with_capacity(64);
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn resolve(&self) -> Result<ResolvedRun, ConfigError> {
        let (params, preset_axes) = match (&self.preset, &self.params) {
            (Some(_), Some(_)) => return Err(ConfigError::ConflictingSources),
            (None, None) => return Err(ConfigError::MissingSources),
            (Some(name), None) => {
                let preset = find_preset(name)
                    .ok_or_else(|| ConfigError::UnknownPreset { name: name.clone() })?;
                (preset.params, preset.axes)
            }
            (None, Some(section)) => (section.to_model_params()?, Vec::new()),
        };

        let sweep = self.sweep.clone().unwrap_or_default();
        let axes: Vec<SweepAxis> = if self.preset.is_some() {
            if !sweep.axes.is_empty() {
                return Err(ConfigError::PresetWithExplicitAxes);
            }
            preset_axes
        } else {
            sweep
                .axes
                .iter()
                .map(|a| SweepAxis::new(a.param, a.min, a.max, a.count))
                .collect::<Result<_, _>>()?
        };

        let window = self.window.clone().unwrap_or_default().to_policy()?;
        let integrator = self.integrator.clone().unwrap_or_default().to_config()?;

        if self.propagator == PropagatorKind::Lindblad {
            let modes = params.mode_count()?;
            if modes > self.lindblad_max_modes {
                return Err(ConfigError::LindbladTooLarge {
                    modes,
                    cap: self.lindblad_max_modes,
                });
            }
        }

        Ok(ResolvedRun {
            params,
            axes,
            propagator: self.propagator,
            window,
            integrator,
            workers: sweep.workers,
            record_partition: sweep.record_partition,
            preset: self.preset.clone(),
            output: self.output.clone(),
            format: self.format,
        })
    }
}

/// Parse a config document, rejecting unknown keys; syntax errors carry the
/// parser's position report.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Syntax {
        message: e.to_string(),
    })
}

/// A validated run: physics point, axes (empty for trace runs), strategy, and
/// execution knobs.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub params: ModelParams,
    pub axes: Vec<SweepAxis>,
    pub propagator: PropagatorKind,
    pub window: WindowPolicy,
    pub integrator: IntegratorConfig,
    pub workers: usize,
    pub record_partition: bool,
    pub preset: Option<String>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ResolvedRun {
    pub fn is_sweep(&self) -> bool {
        !self.axes.is_empty()
    }

    /// The window this run's base point integrates over.
    pub fn base_window(&self) -> TimeWindow {
        self.window.window_for(&self.params.pulses)
    }
}
