//! Fast production propagator: non-Hermitian pure-state evolution in the
//! single-excitation sector.

use ndarray::Array1;

use super::{
    dopri5, sample_times, DynamicsError, InitialState, IntegratorConfig, Propagator,
    StateTrajectory, TimeWindow, TrajectoryData,
};
use crate::model::HamiltonianSystem;

/// Integrates dψ/dt = −i·H(t)·ψ − diag(loss)·ψ over the sector basis. The
/// vacuum stays implicit: its weight is 1 − ‖ψ‖², which the jump operators
/// feed monotonically.
pub struct PureStatePropagator;

impl Propagator for PureStatePropagator {
    fn name(&self) -> &'static str {
        "pure"
    }

    fn summary(&self) -> &'static str {
        "non-Hermitian pure-state fast path (O(M) per derivative, vacuum implicit)"
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
        let psi0 = initial.sector_vector(&basis)?;

        let times = sample_times(window, cfg.samples);
        let opts = cfg.dopri5_options(sys.pulses());
        let mut h_psi = vec![num_complex::Complex64::new(0.0, 0.0); basis.dim()];
        let loss = sys.loss().to_vec();

        let raw = dopri5::integrate(
            |t, psi, out| {
                // dψ/dt = −i·(Hψ) − loss⊙ψ
                sys.apply(t, psi, &mut h_psi);
                for i in 0..out.len() {
                    let hp = h_psi[i];
                    let p = psi[i];
                    out[i] = num_complex::Complex64::new(
                        hp.im - loss[i] * p.re,
                        -hp.re - loss[i] * p.im,
                    );
                }
            },
            window.t_start,
            window.t_end,
            psi0.as_slice().expect("contiguous state"),
            &times,
            &opts,
        )?;

        let states = raw.into_iter().map(Array1::from_vec).collect();
        Ok(StateTrajectory::new(
            basis,
            times,
            TrajectoryData::Pure(states),
        ))
    }
}
