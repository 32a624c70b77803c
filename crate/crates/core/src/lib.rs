//! Simulation of spin-to-spin population transfer through a shared, lossy,
//! structured bosonic continuum, driven by a delayed Gaussian pulse pair in
//! counter-intuitive (Stokes-before-pump) order — STIRAP with the single
//! intermediate level replaced by a band of modes.
//!
//! The crate provides, in ħ = 1 units throughout:
//!
//! * [`model`] — the discretized single-excitation Hamiltonian: power-law
//!   spectral densities with a hard cutoff, the fixed basis ordering, pulse
//!   envelopes, and per-mode loss.
//! * [`dynamics`] — two interchangeable propagators behind the
//!   [`dynamics::Propagator`] trait: the `"pure"` non-Hermitian fast path and
//!   the `"lindblad"` density-matrix oracle, both on an adaptive
//!   Dormand–Prince 5(4) stepper with dense output.
//! * [`observables`] — transfer fidelities F₁/F₂/F and the population split
//!   over spins, modes, continuum, and vacuum.
//! * [`sweep`] — deterministic 1D/2D parameter grids with a worker pool and
//!   the named figure presets.
//! * [`config`] + [`output`] — the TOML run schema and byte-reproducible
//!   CSV/JSON writers used by the `cstirap` binary.

pub mod config;
pub mod convergence;
pub mod dynamics;
pub mod model;
pub mod observables;
pub mod output;
pub mod sweep;

pub use dynamics::{
    evolve_lindblad, evolve_pure, propagator_by_name, propagators, IntegratorConfig, Propagator,
    StateTrajectory, TimeWindow, WindowPolicy,
};
pub use model::{Basis, HamiltonianSystem, ModelParams, PulsePair, SpectralDensity};
pub use observables::{
    fidelity_initial, fidelity_target, final_transfer_fidelity, population_partition,
    PopulationPartition,
};
pub use sweep::{
    figure_presets, find_preset, run_sweep, SweepAxis, SweepOptions, SweepParameter, SweepResult,
};
