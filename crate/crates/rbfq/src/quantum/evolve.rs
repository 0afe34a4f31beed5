//! Direct integration of the interpolating-Hamiltonian Schrödinger equation
//! `i d/dv |psi> = T H(f(v)) |psi>` with the matrices formed explicitly.

use crate::error::{Error, Result};
use crate::quantum::schedule::schedule_f;
use crate::quantum::state::{QuantumRegisterState, RegisterLayout};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// The two ends of the interpolation, as dense real matrices on the doubled
/// space (flag qubit times system register):
/// `H0 = sigma_x ⊗ P_perp` and `H1 = [[0, A P_perp], [P_perp A, 0]]`.
pub fn hamiltonian_pair(
    a_hat: &DMatrix<f64>,
    b: &DVector<f64>,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a_hat.nrows();
    let p_perp = DMatrix::identity(n, n) - b * b.transpose();
    let mut h0 = DMatrix::zeros(2 * n, 2 * n);
    h0.view_mut((0, n), (n, n)).copy_from(&p_perp);
    h0.view_mut((n, 0), (n, n)).copy_from(&p_perp);
    let ap = a_hat * &p_perp;
    let mut h1 = DMatrix::zeros(2 * n, 2 * n);
    h1.view_mut((0, n), (n, n)).copy_from(&ap);
    h1.view_mut((n, 0), (n, n)).copy_from(&ap.transpose());
    (h0, h1)
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Final state and diagnostics of one adiabatic run.
#[derive(Clone, Debug)]
pub struct AqcOutcome {
    pub state: QuantumRegisterState,
    /// Overlap with the solution-bearing null-space component |0>|c>.
    pub mu0: Complex64,
    /// Overlap with the orthogonal null-space component |1>|b>.
    pub mu1: Complex64,
    /// Largest per-step norm deviation before renormalization.
    pub drift: f64,
    pub kappa: f64,
}

/// Integrates from `|0>|b>` at v = 0 to v = 1 with classical RK4 and
/// per-step renormalization, tracking the norm drift as an integrator
/// health check.
///
/// The degenerate `kappa = 1` case (the matrix is the identity) falls back to
/// the linear schedule, which is the `kappa -> 1` limit of the closed form.
pub fn aqc_evolve(
    a_hat: &DMatrix<f64>,
    b: &DVector<f64>,
    t_total: f64,
    steps: usize,
    p: f64,
) -> Result<AqcOutcome> {
    let n = a_hat.nrows();
    if !n.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "system dimension {n} is not a power of two"
        )));
    }
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "matrix order {n} vs state length {}",
            b.len()
        )));
    }
    if t_total <= 0.0 || steps == 0 {
        return Err(Error::Parameter(
            "evolution needs positive time and at least one step".into(),
        ));
    }
    if (b.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Parameter(format!(
            "start state norm {} deviates from 1",
            b.norm()
        )));
    }

    let eig = a_hat.clone().symmetric_eigen();
    let lambda_min = eig.eigenvalues.min();
    if lambda_min <= 0.0 {
        return Err(Error::NotSpd(format!(
            "smallest eigenvalue {lambda_min:.3e} is not positive"
        )));
    }
    let kappa = eig.eigenvalues.max() / lambda_min;

    let (h0, h1) = hamiltonian_pair(a_hat, b);
    let h0c = to_complex(&h0);
    let h1c = to_complex(&h1);

    let schedule = |v: f64| -> Result<f64> {
        if kappa <= 1.0 + 1e-12 {
            Ok(v)
        } else {
            schedule_f(v, kappa, p)
        }
    };

    let mut psi: DVector<Complex64> = DVector::from_element(2 * n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        psi[i] = Complex64::new(b[i], 0.0);
    }

    let h = 1.0 / steps as f64;
    let minus_i_t = Complex64::new(0.0, -t_total);
    let deriv = |f: f64, v: &DVector<Complex64>| -> DVector<Complex64> {
        let hv = &h0c * v * Complex64::new(1.0 - f, 0.0) + &h1c * v * Complex64::new(f, 0.0);
        hv * minus_i_t
    };

    let mut drift = 0.0f64;
    for step in 0..steps {
        let v0 = step as f64 * h;
        let f0 = schedule(v0)?;
        let f_half = schedule(v0 + 0.5 * h)?;
        let f1 = schedule(v0 + h)?;
        let k1 = deriv(f0, &psi);
        let k2 = deriv(f_half, &(&psi + &k1 * Complex64::new(0.5 * h, 0.0)));
        let k3 = deriv(f_half, &(&psi + &k2 * Complex64::new(0.5 * h, 0.0)));
        let k4 = deriv(f1, &(&psi + &k3 * Complex64::new(h, 0.0)));
        psi += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
            * Complex64::new(h / 6.0, 0.0);
        let norm = psi.norm();
        drift = drift.max((norm - 1.0).abs());
        if drift > 1e-8 {
            return Err(Error::Simulation(format!(
                "integrator unitarity drift {drift:.3e} after step {step}; increase steps"
            )));
        }
        psi /= Complex64::new(norm, 0.0);
    }

    // Solution overlap against the normalized classical solution.
    let c = a_hat
        .clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::NotSpd("failed to factor the system matrix".into()))?;
    let c = &c / c.norm();
    let mut mu0 = Complex64::new(0.0, 0.0);
    let mut mu1 = Complex64::new(0.0, 0.0);
    for i in 0..n {
        mu0 += Complex64::new(c[i], 0.0) * psi[i];
        mu1 += Complex64::new(b[i], 0.0) * psi[n + i];
    }

    let layout = RegisterLayout {
        ancilla_qubits: 0,
        flag_qubits: 1,
        system_qubits: n.trailing_zeros() as usize,
    };
    Ok(AqcOutcome {
        state: QuantumRegisterState::new(psi, layout)?,
        mu0,
        mu1,
        drift,
        kappa,
    })
}
