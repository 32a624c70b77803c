//! Metrics read off a trajectory: the two transfer fidelities, the final
//! transfer efficiency, and the population split across spins, modes,
//! continuum, and vacuum.
//!
//! Both fidelities are diagonal matrix elements because the reference states
//! are basis states: F₁(t) = ⟨spin1|ρ(t)|spin1⟩ and F₂(t) = ⟨spin2|ρ(t)|spin2⟩
//! (|amplitude|² on the pure path). The headline figure of merit is
//! F = F₂(t_end), the window-truncated stand-in for F₂(∞).

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::StateTrajectory;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ObservablesError {
    #[error("t = {t} is not a sampled time of the trajectory window [{t_start}, {t_end}]")]
    TimeOutsideWindow { t: f64, t_start: f64, t_end: f64 },
}

/// Probability split over the documented basis groups at one sample. Each
/// component is a sum of nonnegative terms; together they resolve unity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PopulationPartition {
    pub spin1: f64,
    pub spin2: f64,
    /// a₁ + a₂ weight.
    pub modes: f64,
    /// Total bath weight.
    pub continuum: f64,
    pub vacuum: f64,
}

impl PopulationPartition {
    pub fn total(&self) -> f64 {
        self.spin1 + self.spin2 + self.modes + self.continuum + self.vacuum
    }
}

fn sample_index(traj: &StateTrajectory, t: f64) -> Result<usize, ObservablesError> {
    traj.sample_index_at(t)
        .ok_or_else(|| ObservablesError::TimeOutsideWindow {
            t,
            t_start: traj.times().first().copied().unwrap_or(f64::NAN),
            t_end: traj.times().last().copied().unwrap_or(f64::NAN),
        })
}

/// F₁(t): population remaining on the initial spin state.
pub fn fidelity_initial(traj: &StateTrajectory, t: f64) -> Result<f64, ObservablesError> {
    let i = sample_index(traj, t)?;
    Ok(fidelity_initial_at(traj, i))
}

/// F₂(t): population on the target spin state.
pub fn fidelity_target(traj: &StateTrajectory, t: f64) -> Result<f64, ObservablesError> {
    let i = sample_index(traj, t)?;
    Ok(fidelity_target_at(traj, i))
}

/// Population split at sampled time `t`.
pub fn population_partition(
    traj: &StateTrajectory,
    t: f64,
) -> Result<PopulationPartition, ObservablesError> {
    let i = sample_index(traj, t)?;
    Ok(partition_at(traj, i))
}

/// F₁ by sample index.
pub fn fidelity_initial_at(traj: &StateTrajectory, i: usize) -> f64 {
    traj.population(i, traj.basis().spin1())
}

/// F₂ by sample index.
pub fn fidelity_target_at(traj: &StateTrajectory, i: usize) -> f64 {
    traj.population(i, traj.basis().spin2())
}

/// Population split by sample index.
pub fn partition_at(traj: &StateTrajectory, i: usize) -> PopulationPartition {
    let basis = traj.basis();
    let mut continuum = 0.0;
    for j in 1..=basis.bath_modes() {
        continuum += traj.population(i, basis.bath(j));
    }
    PopulationPartition {
        spin1: traj.population(i, basis.spin1()),
        spin2: traj.population(i, basis.spin2()),
        modes: traj.population(i, basis.mode_a1()) + traj.population(i, basis.mode_a2()),
        continuum,
        vacuum: traj.vacuum_population(i),
    }
}

/// The headline transfer efficiency F = F₂(t_end).
pub fn final_transfer_fidelity(traj: &StateTrajectory) -> f64 {
    fidelity_target_at(traj, traj.len() - 1)
}
