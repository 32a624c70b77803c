//! Physical model: two spins, two bosonic modes, and a linearly discretized
//! bosonic continuum, restricted to the single-excitation sector.
//!
//! The chain is
//!
//! ```text
//!   spin1 --Ω_P(t)-- a₁ --g_{1,j}-- { b_j } --g_{2,j}-- a₂ --Ω_S(t)-- spin2
//! ```
//!
//! with all spin/mode levels at the common frequency Δ and bath oscillators at
//! ω_j = jδ, j = 1..N, N = ω_c/δ. Mode–continuum couplings follow power-law
//! spectral densities J_i(ω) = g·ω^{η_i} truncated at the cutoff ω_c, with
//! g_{i,j} = √(J_i(jδ)·δ). Everything is expressed in ħ = 1 units.
//!
//! The single-excitation basis ordering is fixed everywhere in this crate:
//!
//! ```text
//!   0       spin1        (|↑↓⟩, no bosons)
//!   1       mode a₁
//!   1+j     bath mode j  (j = 1..N)
//!   N+2     mode a₂
//!   N+3     spin2
//! ```
//!
//! for a sector dimension M = N+4. The vacuum (no excitation anywhere) is
//! tracked as the extra index M when a density matrix is used; the pure-state
//! path keeps it implicit as 1 − ‖ψ‖².

mod hamiltonian;

pub use hamiltonian::HamiltonianSystem;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bath mode count N = ω_c/δ must land on an integer within this absolute
/// slack, so binary rounding of e.g. 2.0/0.1 still counts as N = 20.
const MODE_COUNT_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("spectral density evaluated at ω = {omega} outside the domain ω > 0")]
    FrequencyOutOfDomain { omega: f64 },
    #[error("ω_c/δ = {ratio} is not a positive integer (ω_c = {omega_c}, δ = {dstep})")]
    NonIntegralModeCount {
        ratio: f64,
        omega_c: f64,
        dstep: f64,
    },
    #[error("spectral densities must share one cutoff: ω_c,1 = {first} vs ω_c,2 = {second}")]
    MismatchedCutoffs { first: f64, second: f64 },
}

fn require(cond: bool, name: &'static str, reason: &str) -> Result<(), ModelError> {
    if cond {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            reason: reason.to_string(),
        })
    }
}

/// Power-law coupling density J(ω) = g·ω^η for 0 < ω ≤ ω_c, zero above the
/// cutoff. η < 1 is sub-ohmic, η = 1 ohmic, η > 1 super-ohmic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    /// Overall amplitude g ≥ 0.
    pub amplitude: f64,
    /// Power-law exponent η > 0.
    pub exponent: f64,
    /// Hard cutoff ω_c > 0; J(ω) = 0 for ω > ω_c.
    pub cutoff: f64,
}

impl SpectralDensity {
    pub fn new(amplitude: f64, exponent: f64, cutoff: f64) -> Result<Self, ModelError> {
        require(
            amplitude >= 0.0 && amplitude.is_finite(),
            "amplitude",
            "must satisfy g ≥ 0",
        )?;
        require(
            exponent > 0.0 && exponent.is_finite(),
            "exponent",
            "must satisfy η > 0",
        )?;
        require(
            cutoff > 0.0 && cutoff.is_finite(),
            "cutoff",
            "must satisfy ω_c > 0",
        )?;
        Ok(Self {
            amplitude,
            exponent,
            cutoff,
        })
    }

    /// J(ω). Defined only for ω > 0; frequencies above the cutoff yield 0.
    pub fn evaluate(&self, omega: f64) -> Result<f64, ModelError> {
        if omega.is_nan() || omega <= 0.0 {
            return Err(ModelError::FrequencyOutOfDomain { omega });
        }
        if omega > self.cutoff {
            Ok(0.0)
        } else {
            Ok(self.amplitude * omega.powf(self.exponent))
        }
    }
}

/// Instantaneous values of the two drive envelopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSample {
    /// Ω_P(t), coupling spin1 ↔ a₁.
    pub pump: f64,
    /// Ω_S(t), coupling spin2 ↔ a₂.
    pub stokes: f64,
}

/// Delayed Gaussian pulse pair
///
/// ```text
///   Ω_P(t) = Ω·exp(−(t − τ/2)²/T²)
///   Ω_S(t) = Ω·exp(−(t + τ/2)²/T²)
/// ```
///
/// The Stokes pulse (on the initially empty side) peaks at −τ/2, *before* the
/// pump at +τ/2: the counter-intuitive ordering. `delay` is the full
/// peak-to-peak separation τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulsePair {
    /// Peak amplitude Ω ≥ 0 of both envelopes.
    pub peak: f64,
    /// Gaussian width T > 0.
    pub width: f64,
    /// Peak-to-peak separation τ ≥ 0.
    pub delay: f64,
}

impl PulsePair {
    pub fn new(peak: f64, width: f64, delay: f64) -> Result<Self, ModelError> {
        require(
            peak >= 0.0 && peak.is_finite(),
            "peak",
            "must satisfy Ω ≥ 0",
        )?;
        require(
            width > 0.0 && width.is_finite(),
            "width",
            "must satisfy T > 0",
        )?;
        require(
            delay >= 0.0 && delay.is_finite(),
            "delay",
            "must satisfy τ ≥ 0",
        )?;
        Ok(Self { peak, width, delay })
    }

    /// Both envelopes at time `t`.
    pub fn eval(&self, t: f64) -> PulseSample {
        let half = 0.5 * self.delay;
        let w2 = self.width * self.width;
        PulseSample {
            pump: self.peak * (-(t - half) * (t - half) / w2).exp(),
            stokes: self.peak * (-(t + half) * (t + half) / w2).exp(),
        }
    }
}

/// Every physical constant of one run. Immutable once built; cheap to clone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Common spin/mode frequency Δ (ω_{q,1} = ω_{q,2} = ω_{a,1} = ω_{a,2}).
    pub detuning: f64,
    /// J₁, coupling a₁ to the continuum.
    pub spectral1: SpectralDensity,
    /// J₂, coupling a₂ to the continuum. Must share the cutoff of `spectral1`.
    pub spectral2: SpectralDensity,
    pub pulses: PulsePair,
    /// Continuum particle-loss rate γ ≥ 0 (amplitude decay rate per bath mode).
    pub loss_rate: f64,
    /// Discretization step δ > 0; N = ω_c/δ must be a positive integer.
    pub dstep: f64,
}

impl ModelParams {
    /// The reference operating point used throughout: g = 10, η₁ = η₂ = 1.5,
    /// ω_c = 2, Ω = 2, T = 2, peak separation 2, Δ = 0, γ = 0, δ = ω_c/200.
    pub fn baseline() -> Self {
        let spectral = SpectralDensity {
            amplitude: 10.0,
            exponent: 1.5,
            cutoff: 2.0,
        };
        Self {
            detuning: 0.0,
            spectral1: spectral,
            spectral2: spectral,
            pulses: PulsePair {
                peak: 2.0,
                width: 2.0,
                delay: 2.0,
            },
            loss_rate: 0.0,
            dstep: 2.0 / 200.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        require(self.detuning.is_finite(), "detuning", "must be finite")?;
        SpectralDensity::new(
            self.spectral1.amplitude,
            self.spectral1.exponent,
            self.spectral1.cutoff,
        )?;
        SpectralDensity::new(
            self.spectral2.amplitude,
            self.spectral2.exponent,
            self.spectral2.cutoff,
        )?;
        PulsePair::new(self.pulses.peak, self.pulses.width, self.pulses.delay)?;
        require(
            self.loss_rate >= 0.0 && self.loss_rate.is_finite(),
            "loss_rate",
            "must satisfy γ ≥ 0",
        )?;
        require(
            self.dstep > 0.0 && self.dstep.is_finite(),
            "dstep",
            "must satisfy δ > 0",
        )?;
        if self.spectral1.cutoff != self.spectral2.cutoff {
            return Err(ModelError::MismatchedCutoffs {
                first: self.spectral1.cutoff,
                second: self.spectral2.cutoff,
            });
        }
        self.mode_count()?;
        Ok(())
    }

    /// N = ω_c/δ, rejecting non-integral ratios.
    pub fn mode_count(&self) -> Result<usize, ModelError> {
        let ratio = self.spectral1.cutoff / self.dstep;
        let rounded = ratio.round();
        if rounded < 1.0 || (ratio - rounded).abs() > MODE_COUNT_SLACK {
            return Err(ModelError::NonIntegralModeCount {
                ratio,
                omega_c: self.spectral1.cutoff,
                dstep: self.dstep,
            });
        }
        Ok(rounded as usize)
    }

    pub fn build_basis(&self) -> Result<Basis, ModelError> {
        self.validate()?;
        Ok(Basis::new(self.mode_count()?, self.dstep))
    }

    pub fn build_hamiltonian(&self) -> Result<HamiltonianSystem, ModelError> {
        HamiltonianSystem::build(self)
    }
}

/// Label of one single-excitation basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateLabel {
    Spin1,
    ModeA1,
    /// Bath oscillator j (1-based), at frequency jδ.
    Bath(usize),
    ModeA2,
    Spin2,
}

/// Index map of the single-excitation sector; see the module docs for the
/// fixed ordering. All matrices and output columns follow it.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    bath_modes: usize,
    dstep: f64,
}

impl Basis {
    pub fn new(bath_modes: usize, dstep: f64) -> Self {
        assert!(bath_modes >= 1, "basis requires at least one bath mode");
        Self { bath_modes, dstep }
    }

    /// N, the number of bath oscillators.
    pub fn bath_modes(&self) -> usize {
        self.bath_modes
    }

    /// Sector dimension M = N + 4.
    pub fn dim(&self) -> usize {
        self.bath_modes + 4
    }

    /// Bookkeeping slot for the vacuum in the density-matrix representation.
    pub fn vacuum_index(&self) -> usize {
        self.dim()
    }

    pub fn spin1(&self) -> usize {
        0
    }

    pub fn mode_a1(&self) -> usize {
        1
    }

    /// Index of bath oscillator j, j = 1..=N.
    pub fn bath(&self, j: usize) -> usize {
        assert!(
            j >= 1 && j <= self.bath_modes,
            "bath index j = {j} outside 1..={}",
            self.bath_modes
        );
        1 + j
    }

    pub fn mode_a2(&self) -> usize {
        self.bath_modes + 2
    }

    pub fn spin2(&self) -> usize {
        self.bath_modes + 3
    }

    /// ω_j = jδ.
    pub fn bath_frequency(&self, j: usize) -> f64 {
        assert!(j >= 1 && j <= self.bath_modes);
        j as f64 * self.dstep
    }

    pub fn dstep(&self) -> f64 {
        self.dstep
    }

    pub fn label(&self, index: usize) -> StateLabel {
        let n = self.bath_modes;
        match index {
            0 => StateLabel::Spin1,
            1 => StateLabel::ModeA1,
            i if i >= 2 && i < n + 2 => StateLabel::Bath(i - 1),
            i if i == n + 2 => StateLabel::ModeA2,
            i if i == n + 3 => StateLabel::Spin2,
            _ => panic!("index {index} outside basis of dimension {}", self.dim()),
        }
    }

    pub fn index(&self, label: StateLabel) -> usize {
        match label {
            StateLabel::Spin1 => self.spin1(),
            StateLabel::ModeA1 => self.mode_a1(),
            StateLabel::Bath(j) => self.bath(j),
            StateLabel::ModeA2 => self.mode_a2(),
            StateLabel::Spin2 => self.spin2(),
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = StateLabel> + '_ {
        (0..self.dim()).map(|i| self.label(i))
    }
}
