//! Single-excitation Hamiltonian: a real-symmetric static skeleton (diagonal
//! energies plus bath couplings) with exactly four time-dependent entries
//! driven by the pulse envelopes, and a per-state amplitude-loss vector.

use ndarray::Array2;
use num_complex::Complex64;

use super::{Basis, ModelError, ModelParams, PulsePair, PulseSample};

/// The discretized chain Hamiltonian in the single-excitation sector.
///
/// Diagonal energies are stored in the globally shifted form
/// (Δ, Δ, ω_1..ω_N, Δ, Δ): the constant offset only contributes a global
/// phase, and the shifted form keeps the vacuum at energy 0. The only
/// time-dependent entries are ⟨spin1|H|a₁⟩ = Ω_P(t) and ⟨a₂|H|spin2⟩ = Ω_S(t)
/// (plus transposes); everything else is fixed at construction.
#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    basis: Basis,
    /// Sector diagonal, length M.
    diagonal: Vec<f64>,
    /// g_{1,j} = √(J₁(jδ)·δ), length N.
    coupling1: Vec<f64>,
    /// g_{2,j} = √(J₂(jδ)·δ), length N.
    coupling2: Vec<f64>,
    pulses: PulsePair,
    /// Amplitude-decay rate per state: γ on bath entries, 0 elsewhere.
    loss: Vec<f64>,
    /// Subsystem-exchange conjugation: envelope roles swapped, so the
    /// spin1-side entry carries Ω_S and the spin2-side entry Ω_P.
    mirror: bool,
}

impl HamiltonianSystem {
    pub fn build(params: &ModelParams) -> Result<Self, ModelError> {
        let basis = params.build_basis()?;
        let n = basis.bath_modes();
        let m = basis.dim();

        let mut diagonal = vec![params.detuning; m];
        for j in 1..=n {
            diagonal[basis.bath(j)] = basis.bath_frequency(j);
        }

        let delta = params.dstep;
        let mut coupling1 = Vec::with_capacity(n);
        let mut coupling2 = Vec::with_capacity(n);
        for j in 1..=n {
            let omega = basis.bath_frequency(j);
            coupling1.push((params.spectral1.evaluate(omega)? * delta).sqrt());
            coupling2.push((params.spectral2.evaluate(omega)? * delta).sqrt());
        }

        let mut loss = vec![0.0; m];
        for j in 1..=n {
            loss[basis.bath(j)] = params.loss_rate;
        }

        Ok(Self {
            basis,
            diagonal,
            coupling1,
            coupling2,
            pulses: params.pulses,
            loss,
            mirror: false,
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn pulses(&self) -> &PulsePair {
        &self.pulses
    }

    /// Amplitude-decay rates by basis index.
    pub fn loss(&self) -> &[f64] {
        &self.loss
    }

    /// g_{1,j} by 0-based bath position (j−1).
    pub fn coupling1(&self) -> &[f64] {
        &self.coupling1
    }

    pub fn coupling2(&self) -> &[f64] {
        &self.coupling2
    }

    /// The subsystem-exchanged problem: bath couplings 1↔2 and envelope roles
    /// swapped. Conjugating by the permutation spin1↔spin2, a₁↔a₂ maps one
    /// system onto the other, so a run started from spin2 here reproduces the
    /// original run started from spin1 with the fidelity roles exchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            basis: self.basis.clone(),
            diagonal: self.diagonal.clone(),
            coupling1: self.coupling2.clone(),
            coupling2: self.coupling1.clone(),
            pulses: self.pulses,
            loss: self.loss.clone(),
            mirror: !self.mirror,
        }
    }

    /// Envelope values routed to the (spin1-side, spin2-side) entries.
    fn routed_pulses(&self, t: f64) -> (f64, f64) {
        let PulseSample { pump, stokes } = self.pulses.eval(t);
        if self.mirror {
            (stokes, pump)
        } else {
            (pump, stokes)
        }
    }

    /// The static part as a dense real-symmetric matrix (pulse entries zero).
    pub fn static_matrix(&self) -> Array2<f64> {
        let m = self.basis.dim();
        let mut h = Array2::zeros((m, m));
        for (i, &d) in self.diagonal.iter().enumerate() {
            h[[i, i]] = d;
        }
        let a1 = self.basis.mode_a1();
        let a2 = self.basis.mode_a2();
        for j in 1..=self.basis.bath_modes() {
            let b = self.basis.bath(j);
            h[[a1, b]] = self.coupling1[j - 1];
            h[[b, a1]] = self.coupling1[j - 1];
            h[[a2, b]] = self.coupling2[j - 1];
            h[[b, a2]] = self.coupling2[j - 1];
        }
        h
    }

    /// H(t): the static part with the four pulse entries filled in. Exactly
    /// Hermitian since every entry is real and assigned symmetrically.
    pub fn hamiltonian_at(&self, t: f64) -> Array2<Complex64> {
        let mut h = self.static_matrix().mapv(Complex64::from);
        let (side1, side2) = self.routed_pulses(t);
        let (s1, a1) = (self.basis.spin1(), self.basis.mode_a1());
        let (a2, s2) = (self.basis.mode_a2(), self.basis.spin2());
        h[[s1, a1]] = Complex64::from(side1);
        h[[a1, s1]] = Complex64::from(side1);
        h[[a2, s2]] = Complex64::from(side2);
        h[[s2, a2]] = Complex64::from(side2);
        h
    }

    /// H_eff(t) = H(t) − i·diag(loss): the non-Hermitian generator of the
    /// pure-state path. Its anti-Hermitian part is −iγ exactly on the bath
    /// diagonal.
    pub fn effective_hamiltonian_at(&self, t: f64) -> Array2<Complex64> {
        let mut h = self.hamiltonian_at(t);
        for (i, &rate) in self.loss.iter().enumerate() {
            h[[i, i]] -= Complex64::new(0.0, rate);
        }
        h
    }

    /// out = H(t)·ψ without materializing the matrix; O(M) per call.
    pub fn apply(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        self.apply_inner(t, psi, out, false);
    }

    /// out = (H(t) − i·diag(loss))·ψ; O(M) per call.
    pub fn apply_effective(&self, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
        self.apply_inner(t, psi, out, true);
    }

    fn apply_inner(&self, t: f64, psi: &[Complex64], out: &mut [Complex64], with_loss: bool) {
        let m = self.basis.dim();
        assert_eq!(psi.len(), m);
        assert_eq!(out.len(), m);
        let n = self.basis.bath_modes();
        let (side1, side2) = self.routed_pulses(t);
        let (s1, a1) = (self.basis.spin1(), self.basis.mode_a1());
        let (a2, s2) = (self.basis.mode_a2(), self.basis.spin2());

        out[s1] = self.diagonal[s1] * psi[s1] + side1 * psi[a1];
        let mut acc1 = Complex64::new(0.0, 0.0);
        let mut acc2 = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let b = 2 + j;
            let pb = psi[b];
            acc1 += self.coupling1[j] * pb;
            acc2 += self.coupling2[j] * pb;
            out[b] =
                self.coupling1[j] * psi[a1] + self.diagonal[b] * pb + self.coupling2[j] * psi[a2];
        }
        out[a1] = side1 * psi[s1] + self.diagonal[a1] * psi[a1] + acc1;
        out[a2] = acc2 + self.diagonal[a2] * psi[a2] + side2 * psi[s2];
        out[s2] = side2 * psi[a2] + self.diagonal[s2] * psi[s2];

        if with_loss {
            for (o, (&rate, &p)) in out.iter_mut().zip(self.loss.iter().zip(psi.iter())) {
                *o -= Complex64::new(0.0, rate) * p;
            }
        }
    }
}
