//! Validation oracle: full Lindblad master-equation propagation on the
//! single-excitation sector extended by an explicit vacuum slot.

use ndarray::{Array2, ArrayView2, ArrayViewMut2};
use num_complex::Complex64;

use super::{
    dopri5, sample_times, DynamicsError, InitialState, IntegratorConfig, Propagator,
    StateTrajectory, TimeWindow, TrajectoryData,
};
use crate::model::HamiltonianSystem;

/// Integrates dρ/dt = −i[H(t), ρ] + γ·Σ_j (2 b_j ρ b_j† − {b_j†b_j, ρ}) where
/// b_j maps bath mode j to the vacuum. ρ lives on the (M+1)-dimensional space
/// with the vacuum as the last index; H acts as H ⊕ 0. The Lindblad form
/// preserves the trace, so tr ρ = 1 is a solver diagnostic here.
pub struct LindbladPropagator;

impl Propagator for LindbladPropagator {
    fn name(&self) -> &'static str {
        "lindblad"
    }

    fn summary(&self) -> &'static str {
        "density-matrix master-equation oracle (O(M²) state, vacuum explicit)"
    }

    fn propagate(
        &self,
        sys: &HamiltonianSystem,
        initial: &InitialState,
        window: TimeWindow,
        cfg: &IntegratorConfig,
    ) -> Result<StateTrajectory, DynamicsError> {
        cfg.validate()?;
        TimeWindow::new(window.t_start, window.t_end)?;
        let basis = sys.basis().clone();
        let m = basis.dim();
        let d = m + 1;

        let psi0 = initial.sector_vector(&basis)?;
        let mut rho0 = Array2::<Complex64>::zeros((d, d));
        for i in 0..m {
            for j in 0..m {
                rho0[[i, j]] = psi0[i] * psi0[j].conj();
            }
        }

        let times = sample_times(window, cfg.samples);
        let opts = cfg.dopri5_options(sys.pulses());

        let gamma = bath_loss_rate(sys);
        let bath_range = 2..2 + basis.bath_modes();
        let vac = basis.vacuum_index();
        let mut h_full = Array2::<Complex64>::zeros((d, d));

        let raw = dopri5::integrate(
            |t, rho_flat, out_flat| {
                let rho = ArrayView2::from_shape((d, d), rho_flat).expect("square state");
                let mut out =
                    ArrayViewMut2::from_shape((d, d), out_flat).expect("square derivative");

                // −i[H, ρ] with H ⊕ 0 on the vacuum slot.
                let h = sys.hamiltonian_at(t);
                h_full.fill(Complex64::new(0.0, 0.0));
                for i in 0..m {
                    for j in 0..m {
                        h_full[[i, j]] = h[[i, j]];
                    }
                }
                let h_rho = h_full.dot(&rho);
                let rho_h = rho.dot(&h_full);
                let minus_i = Complex64::new(0.0, -1.0);
                for i in 0..d {
                    for j in 0..d {
                        out[[i, j]] = minus_i * (h_rho[[i, j]] - rho_h[[i, j]]);
                    }
                }

                if gamma > 0.0 {
                    // γ·Σ_j (2 b_j ρ b_j† − {b_j†b_j, ρ}): the anticommutator
                    // damps row and column j, the jump pumps ρ_jj into the
                    // vacuum slot.
                    let mut vac_gain = Complex64::new(0.0, 0.0);
                    for b in bath_range.clone() {
                        vac_gain += rho[[b, b]];
                        for x in 0..d {
                            out[[b, x]] -= gamma * rho[[b, x]];
                            out[[x, b]] -= gamma * rho[[x, b]];
                        }
                    }
                    out[[vac, vac]] += 2.0 * gamma * vac_gain;
                }
            },
            window.t_start,
            window.t_end,
            rho0.as_slice().expect("contiguous density matrix"),
            &times,
            &opts,
        )?;

        let rhos = raw
            .into_iter()
            .map(|flat| Array2::from_shape_vec((d, d), flat).expect("square sample"))
            .collect();
        Ok(StateTrajectory::new(
            basis,
            times,
            TrajectoryData::Density(rhos),
        ))
    }
}

/// The model applies one common loss rate to every bath mode.
fn bath_loss_rate(sys: &HamiltonianSystem) -> f64 {
    let basis = sys.basis();
    sys.loss()[basis.bath(1)]
}
