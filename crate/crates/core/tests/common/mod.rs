//! Shared helpers for the integration suites: an independent
//! matrix-exponential stepper (no code shared with the production
//! integrator) and a plain Jacobi eigensolver for positivity checks.
//!
//! Each integration target uses its own subset of these.
#![allow(dead_code)]

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use cstirap::model::HamiltonianSystem;

/// e^A by scaling-and-squaring with a Taylor series on the scaled matrix.
pub fn expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|j| (0..n).map(|i| a[[i, j]].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let scalings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.mapv(|z| z / 2f64.powi(scalings as i32));

    let mut result = Array2::<Complex64>::eye(n);
    let mut term = Array2::<Complex64>::eye(n);
    for k in 1..=60 {
        term = term.dot(&scaled) / Complex64::from(k as f64);
        result += &term;
        if term.iter().map(|z| z.norm()).sum::<f64>() < 1e-18 {
            break;
        }
    }
    for _ in 0..scalings {
        result = result.dot(&result);
    }
    result
}

/// Second-order midpoint-exponential propagation of dψ/dt = −i·H_eff(t)·ψ,
/// sampled at `times` (uniform grids only). Entirely independent of the
/// adaptive production path.
pub fn expm_propagate(
    sys: &HamiltonianSystem,
    psi0: &Array1<Complex64>,
    times: &[f64],
    substeps: usize,
) -> Vec<Array1<Complex64>> {
    let minus_i = Complex64::new(0.0, -1.0);
    let mut psi = psi0.clone();
    let mut out = vec![psi.clone()];
    for w in times.windows(2) {
        let h = (w[1] - w[0]) / substeps as f64;
        for s in 0..substeps {
            let mid = w[0] + (s as f64 + 0.5) * h;
            let generator = sys.effective_hamiltonian_at(mid).mapv(|z| minus_i * z * h);
            psi = expm(&generator).dot(&psi);
        }
        out.push(psi.clone());
    }
    out
}

/// Eigenvalues of a Hermitian complex matrix via the real symmetric
/// embedding [[X, −Y], [Y, X]] and cyclic Jacobi rotations. Each eigenvalue
/// of the input appears twice in the embedding; the returned list is the
/// full doubled set, sorted ascending.
pub fn hermitian_eigenvalues(h: &Array2<Complex64>) -> Vec<f64> {
    let n = h.nrows();
    let mut a = Array2::<f64>::zeros((2 * n, 2 * n));
    for i in 0..n {
        for j in 0..n {
            let z = h[[i, j]];
            a[[i, j]] = z.re;
            a[[i + n, j + n]] = z.re;
            a[[i, j + n]] = -z.im;
            a[[i + n, j]] = z.im;
        }
    }
    jacobi_eigenvalues(&mut a)
}

fn jacobi_eigenvalues(a: &mut Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[[i, j]] * a[[i, j]];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}
