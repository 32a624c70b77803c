//! Refinement study behind the `converge` command: rerun one configured
//! point at δ, δ/2, δ/4 and at window half-spans of 5, 6, and 7 pulse widths,
//! and report the final transfer fidelities with their successive
//! differences. F must be independent of δ once δ is small enough, and the
//! Gaussian tails make the window study converge extremely fast.

use serde::Serialize;

use crate::dynamics::{evolve_pure, DynamicsError, IntegratorConfig, TimeWindow, WindowPolicy};
use crate::model::ModelParams;
use crate::observables::final_transfer_fidelity;

/// |F(δ) − F(δ/2)| must fall below this for the δ study to pass.
pub const DSTEP_TOLERANCE: f64 = 1e-3;
/// |F(widths 5) − F(widths 7)| must fall below this for the window study to pass.
pub const WINDOW_TOLERANCE: f64 = 1e-6;

const WINDOW_WIDTHS: [f64; 3] = [5.0, 6.0, 7.0];

/// One completed run of the study.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceEntry {
    /// `"dstep"` or `"window"`.
    pub check: &'static str,
    /// The δ value, or the window half-span in pulse widths.
    pub setting: f64,
    pub fidelity: f64,
    /// |F − F_previous| within the same check; absent on each first row.
    pub difference: Option<f64>,
}

/// Pass/fail line of one study against its pinned threshold.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceVerdict {
    pub check: &'static str,
    pub description: String,
    pub difference: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ConvergenceReport {
    pub entries: Vec<ConvergenceEntry>,
    pub verdicts: Vec<ConvergenceVerdict>,
}

impl ConvergenceReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Run the study. On integration failure the partial report computed so far
/// comes back alongside the error.
pub fn run_convergence(
    params: &ModelParams,
    window: &WindowPolicy,
    integrator: &IntegratorConfig,
) -> (ConvergenceReport, Option<DynamicsError>) {
    let mut report = ConvergenceReport::default();

    let fidelity_at = |params: &ModelParams, window: TimeWindow| -> Result<f64, DynamicsError> {
        let sys = params
            .build_hamiltonian()
            .map_err(|e| DynamicsError::InvalidConfig {
                reason: e.to_string(),
            })?;
        let traj = evolve_pure(&sys, window, integrator)?;
        Ok(final_transfer_fidelity(&traj))
    };

    // δ refinements under the configured window.
    let mut dstep_f = Vec::new();
    for divisor in [1.0, 2.0, 4.0] {
        let refined = ModelParams {
            dstep: params.dstep / divisor,
            ..params.clone()
        };
        let setting = refined.dstep;
        match fidelity_at(&refined, window.window_for(&refined.pulses)) {
            Ok(f) => {
                let difference = dstep_f.last().map(|prev: &f64| (f - prev).abs());
                report.entries.push(ConvergenceEntry {
                    check: "dstep",
                    setting,
                    fidelity: f,
                    difference,
                });
                dstep_f.push(f);
            }
            Err(e) => return (report, Some(e)),
        }
    }

    // Window refinements at the configured δ.
    let mut window_f = Vec::new();
    for widths in WINDOW_WIDTHS {
        let w = TimeWindow::for_pulses(&params.pulses, widths);
        match fidelity_at(params, w) {
            Ok(f) => {
                let difference = window_f.last().map(|prev: &f64| (f - prev).abs());
                report.entries.push(ConvergenceEntry {
                    check: "window",
                    setting: widths,
                    fidelity: f,
                    difference,
                });
                window_f.push(f);
            }
            Err(e) => return (report, Some(e)),
        }
    }

    let d01 = (dstep_f[1] - dstep_f[0]).abs();
    let d12 = (dstep_f[2] - dstep_f[1]).abs();
    report.verdicts.push(ConvergenceVerdict {
        check: "dstep",
        description: "|F(δ) − F(δ/2)|".to_string(),
        difference: d01,
        threshold: DSTEP_TOLERANCE,
        pass: d01 < DSTEP_TOLERANCE,
    });
    report.verdicts.push(ConvergenceVerdict {
        check: "dstep",
        description: "|F(δ/2) − F(δ/4)|".to_string(),
        difference: d12,
        threshold: DSTEP_TOLERANCE,
        pass: d12 < DSTEP_TOLERANCE,
    });
    let w57 = (window_f[2] - window_f[0]).abs();
    report.verdicts.push(ConvergenceVerdict {
        check: "window",
        description: "|F(5 widths) − F(7 widths)|".to_string(),
        difference: w57,
        threshold: WINDOW_TOLERANCE,
        pass: w57 < WINDOW_TOLERANCE,
    });

    (report, None)
}
