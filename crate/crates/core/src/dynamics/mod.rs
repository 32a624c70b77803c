//! Time evolution of the single-excitation model.
//!
//! Two interchangeable propagation strategies sit behind the [`Propagator`]
//! trait and are selected by name at runtime:
//!
//! * `"pure"` — [`PureStatePropagator`], the production path. It integrates
//!   dψ/dt = −i·H_eff(t)·ψ with H_eff = H − i·diag(loss). Because every jump
//!   operator feeds the vacuum, the unnormalized sector state plus vacuum
//!   weight 1 − ‖ψ‖² reproduces the master equation exactly for this initial
//!   condition, at O(M) cost per derivative instead of O(M²) state.
//! * `"lindblad"` — [`LindbladPropagator`], the validation oracle. It
//!   integrates the full master equation
//!   dρ/dt = −i[H(t), ρ] + γ·Σ_j (2 b_j ρ b_j† − {b_j†b_j, ρ})
//!   on the (M+1)-dimensional sector ⊕ vacuum space.
//!
//! Both paths run the same adaptive Dormand–Prince 5(4) stepper
//! ([`dopri5`]) with dense output at the requested sample times. States are
//! never renormalized; norm/trace drift is part of the contract checked by
//! tests.

mod dopri5;
mod lindblad;
mod pure;

pub use dopri5::{Dopri5Options, IntegrationError};
pub use lindblad::LindbladPropagator;
pub use pure::PureStatePropagator;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Basis, HamiltonianSystem, PulsePair};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DynamicsError {
    #[error("invalid integrator configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error("invalid time window: t_start = {t_start} must precede t_end = {t_end}")]
    InvalidWindow { t_start: f64, t_end: f64 },
    #[error("initial state has dimension {got}, expected {expected}")]
    InitialStateDimension { got: usize, expected: usize },
    #[error("integration failed: {0}")]
    Integration(#[from] IntegrationError),
}

/// Truncated integration window; the infinite-time limits are represented by
/// ±(τ/2 + widths·T) with the default of five pulse widths, where the
/// envelopes are below 2e−11 of peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t_start: f64,
    pub t_end: f64,
}

impl TimeWindow {
    pub const DEFAULT_WIDTHS: f64 = 5.0;

    pub fn new(t_start: f64, t_end: f64) -> Result<Self, DynamicsError> {
        if t_start.is_finite() && t_end.is_finite() && t_start < t_end {
            Ok(Self { t_start, t_end })
        } else {
            Err(DynamicsError::InvalidWindow { t_start, t_end })
        }
    }

    /// Symmetric window ±(τ/2 + widths·T) for the given pulse pair.
    pub fn for_pulses(pulses: &PulsePair, widths: f64) -> Self {
        let half = 0.5 * pulses.delay + widths * pulses.width;
        Self {
            t_start: -half,
            t_end: half,
        }
    }

    pub fn span(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// How each run derives its window: recomputed from that run's pulse
/// parameters, or pinned to explicit endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowPolicy {
    Auto { widths: f64 },
    Fixed(TimeWindow),
}

impl Default for WindowPolicy {
    fn default() -> Self {
        Self::Auto {
            widths: TimeWindow::DEFAULT_WIDTHS,
        }
    }
}

impl WindowPolicy {
    pub fn window_for(&self, pulses: &PulsePair) -> TimeWindow {
        match *self {
            Self::Auto { widths } => TimeWindow::for_pulses(pulses, widths),
            Self::Fixed(window) => window,
        }
    }
}

/// Integrator knobs. Tolerances apply to the scaled RMS error norm; `samples`
/// is the number of equally spaced output times (endpoints included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: Option<f64>,
    /// Upper bound on the step; defaults to half the pulse width so the
    /// stepper cannot leap over the pulse turn-on from the quiet leading tail.
    pub max_step: Option<f64>,
    pub samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            initial_step: None,
            max_step: None,
            samples: 256,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |reason: &str| {
            Err(DynamicsError::InvalidConfig {
                reason: reason.to_string(),
            })
        };
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.rtol) || !positive(self.atol) {
            return bad("tolerances must be positive");
        }
        if self.samples < 2 {
            return bad("sample count must be at least 2");
        }
        if let Some(h) = self.initial_step {
            if !positive(h) {
                return bad("initial step must be positive");
            }
        }
        if let Some(h) = self.max_step {
            if !positive(h) {
                return bad("max step must be positive");
            }
        }
        Ok(())
    }

    pub(crate) fn dopri5_options(&self, pulses: &PulsePair) -> Dopri5Options {
        Dopri5Options {
            rtol: self.rtol,
            atol: self.atol,
            initial_step: self.initial_step,
            max_step: self.max_step.unwrap_or(0.5 * pulses.width),
            ..Dopri5Options::default()
        }
    }
}

/// Where the excitation starts. The canonical runs start on spin 1; the
/// mirrored symmetry check starts on spin 2; tests may supply any amplitude
/// vector over the sector basis (used as given, not renormalized).
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Spin1,
    Spin2,
    Custom(Array1<Complex64>),
}

impl InitialState {
    pub(crate) fn sector_vector(&self, basis: &Basis) -> Result<Array1<Complex64>, DynamicsError> {
        let m = basis.dim();
        let mut psi = Array1::zeros(m);
        match self {
            Self::Spin1 => psi[basis.spin1()] = Complex64::new(1.0, 0.0),
            Self::Spin2 => psi[basis.spin2()] = Complex64::new(1.0, 0.0),
            Self::Custom(v) => {
                if v.len() != m {
                    return Err(DynamicsError::InitialStateDimension {
                        got: v.len(),
                        expected: m,
                    });
                }
                psi.assign(v);
            }
        }
        Ok(psi)
    }
}

/// Per-sample state storage: sector amplitudes for the pure path, the
/// (M+1)×(M+1) density matrix (vacuum last) for the Lindblad path.
#[derive(Debug, Clone)]
pub enum TrajectoryData {
    Pure(Vec<Array1<Complex64>>),
    Density(Vec<Array2<Complex64>>),
}

/// Sampled states over the window, in basis order.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    basis: Basis,
    times: Vec<f64>,
    data: TrajectoryData,
}

impl StateTrajectory {
    pub(crate) fn new(basis: Basis, times: Vec<f64>, data: TrajectoryData) -> Self {
        Self { basis, times, data }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the sample at time `t` (nearest sample within a small slack
    /// of the sampling grid), or `None` when `t` misses every sample.
    pub fn sample_index_at(&self, t: f64) -> Option<usize> {
        let first = *self.times.first()?;
        let last = *self.times.last()?;
        let slack = 1e-9 * (last - first).max(1.0);
        let idx = match self
            .times
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(i) => {
                if i == 0 {
                    0
                } else if i >= self.times.len() {
                    self.times.len() - 1
                } else if (self.times[i] - t).abs() < (t - self.times[i - 1]).abs() {
                    i
                } else {
                    i - 1
                }
            }
        };
        ((self.times[idx] - t).abs() <= slack).then_some(idx)
    }

    /// Population of the basis state `state` at sample `i`: |ψ_state|² in the
    /// pure path, ρ[state, state] in the density path.
    pub fn population(&self, i: usize, state: usize) -> f64 {
        match &self.data {
            TrajectoryData::Pure(states) => states[i][state].norm_sqr(),
            TrajectoryData::Density(rhos) => rhos[i][[state, state]].re,
        }
    }

    /// Total in-sector weight: ‖ψ‖² (pure) or tr ρ (density, vacuum included).
    pub fn total_weight(&self, i: usize) -> f64 {
        match &self.data {
            TrajectoryData::Pure(states) => states[i].iter().map(|a| a.norm_sqr()).sum(),
            TrajectoryData::Density(rhos) => rhos[i].diag().iter().map(|d| d.re).sum(),
        }
    }

    /// Vacuum weight: 1 − ‖ψ‖² (pure) or the bookkeeping slot (density).
    pub fn vacuum_population(&self, i: usize) -> f64 {
        match &self.data {
            TrajectoryData::Pure(states) => {
                let norm_sq: f64 = states[i].iter().map(|a| a.norm_sqr()).sum();
                1.0 - norm_sq
            }
            TrajectoryData::Density(rhos) => {
                let v = self.basis.vacuum_index();
                rhos[i][[v, v]].re
            }
        }
    }

    pub fn amplitudes(&self, i: usize) -> Option<&Array1<Complex64>> {
        match &self.data {
            TrajectoryData::Pure(states) => Some(&states[i]),
            TrajectoryData::Density(_) => None,
        }
    }

    pub fn density_matrix(&self, i: usize) -> Option<&Array2<Complex64>> {
        match &self.data {
            TrajectoryData::Pure(_) => None,
            TrajectoryData::Density(rhos) => Some(&rhos[i]),
        }
    }
}

/// One time-evolution strategy. Implementations must be deterministic and
/// safe to run concurrently over shared immutable systems.
pub trait Propagator: Send + Sync {
    /// Registry key, e.g. `"pure"`.
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn propagate(
        &self,
        sys: &HamiltonianSystem,
        initial: &InitialState,
        window: TimeWindow,
        cfg: &IntegratorConfig,
    ) -> Result<StateTrajectory, DynamicsError>;
}

/// All registered propagation strategies.
pub fn propagators() -> Vec<Box<dyn Propagator>> {
    vec![Box::new(PureStatePropagator), Box::new(LindbladPropagator)]
}

/// Look a strategy up by its registry key.
pub fn propagator_by_name(name: &str) -> Option<Box<dyn Propagator>> {
    propagators().into_iter().find(|p| p.name() == name)
}

/// Canonical run of the fast path: excitation starts on spin 1.
pub fn evolve_pure(
    sys: &HamiltonianSystem,
    window: TimeWindow,
    cfg: &IntegratorConfig,
) -> Result<StateTrajectory, DynamicsError> {
    PureStatePropagator.propagate(sys, &InitialState::Spin1, window, cfg)
}

/// Canonical run of the master-equation oracle: ρ(t_start) = |spin1⟩⟨spin1|.
pub fn evolve_lindblad(
    sys: &HamiltonianSystem,
    window: TimeWindow,
    cfg: &IntegratorConfig,
) -> Result<StateTrajectory, DynamicsError> {
    LindbladPropagator.propagate(sys, &InitialState::Spin1, window, cfg)
}

/// Equally spaced sample times with exact endpoints.
pub(crate) fn sample_times(window: TimeWindow, samples: usize) -> Vec<f64> {
    let step = window.span() / (samples - 1) as f64;
    let mut times: Vec<f64> = (0..samples)
        .map(|i| window.t_start + i as f64 * step)
        .collect();
    times[samples - 1] = window.t_end;
    times
}
