//! The three-stage solver pipeline — adiabatic preparation, eigenstate
//! filtering, ancilla projection — plus the evaluation-matrix stage that
//! turns the coefficient state into the solution state.

use crate::assembly::dense_from_csc;
use crate::error::{Error, Result};
use crate::quantum::encode::block_encode_sparse;
use crate::quantum::evolve::{aqc_evolve, hamiltonian_pair};
use crate::quantum::filter::{apply_filter, FilterSpec};
use crate::quantum::schedule::{ScheduleSpec, C_T_DEFAULT, P_DEFAULT};
use crate::quantum::state::{QuantumRegisterState, RegisterLayout};
use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CscMatrix;
use num_complex::Complex64;
use serde::Serialize;

/// Success probabilities below this abort the run: amplitude amplification
/// at such levels would dominate every other cost.
pub const SUCCESS_FLOOR: f64 = 1e-4;

/// Query-equivalent accounting of one pipeline run.
#[derive(Clone, Debug, Serialize)]
pub struct ResourceLedger {
    /// Chebyshev half-degree of the filter stage.
    pub filter_degree: usize,
    /// Dimensionless evolution time T.
    pub evolution_time: f64,
    /// Integrator steps at full resolution.
    pub aqc_steps: usize,
    /// Uses of the H1 block encoding the filter stage would consume (two per
    /// recurrence degree).
    pub uh1_queries: usize,
    /// Amplitude-amplification repetitions to reach constant success.
    pub repetitions: usize,
    /// Richardson estimate of the integration error.
    pub integrator_budget: f64,
    pub kappa: f64,
    pub success_probability: f64,
}

/// Result of the full linear-system pipeline.
#[derive(Clone, Debug)]
pub struct QlsaOutcome {
    /// Normalized coefficient state over the padded system register.
    pub c_state: QuantumRegisterState,
    pub success_probability: f64,
    pub resources: ResourceLedger,
    /// Post-evolution overlap with the classical solution direction.
    pub mu0: Complex64,
}

fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Pads a normalized system matrix with an identity tail and the state with
/// zeros so registers are powers of two; the padding rows are exact fixed
/// points of the dynamics and carry no amplitude.
fn pad_system(a: &DMatrix<f64>, b: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let n = a.nrows();
    let p = next_pow2(n);
    if p == n {
        return (a.clone(), b.clone());
    }
    let mut ap = DMatrix::identity(p, p);
    ap.view_mut((0, 0), (n, n)).copy_from(a);
    let mut bp = DVector::zeros(p);
    bp.view_mut((0, 0), (n, 1)).copy_from(b);
    (ap, bp)
}

/// Solves `A_hat c = b` through adiabatic evolution plus eigenstate
/// filtering, simulated exactly, with `eps_l` the filter's suppression
/// target.
pub fn qlsa_solve(
    a_hat: &CscMatrix<f64>,
    b_state: &DVector<f64>,
    eps_l: f64,
) -> Result<QlsaOutcome> {
    if !(eps_l > 0.0 && eps_l < 0.5) {
        return Err(Error::Parameter(format!(
            "filter target {eps_l} outside (0, 1/2)"
        )));
    }
    let n = a_hat.nrows();
    if b_state.len() != n {
        return Err(Error::Dimension(format!(
            "matrix order {n} vs right-hand side length {}",
            b_state.len()
        )));
    }
    let s = next_pow2(
        (0..n)
            .map(|j| a_hat.col(j).nnz())
            .max()
            .unwrap_or(1)
            .max(1),
    );
    let (a_pad, b_pad) = pad_system(&dense_from_csc(a_hat), b_state);
    let p_dim = a_pad.nrows();

    let eig = a_pad.clone().symmetric_eigen();
    let lambda_min = eig.eigenvalues.min();
    if lambda_min <= 0.0 {
        return Err(Error::NotSpd(format!(
            "smallest eigenvalue {lambda_min:.3e} is not positive"
        )));
    }
    let lambda_max = eig.eigenvalues.max();
    if lambda_max > 1.0 + 1e-10 {
        return Err(Error::Parameter(format!(
            "matrix is not normalized: largest eigenvalue {lambda_max}"
        )));
    }
    let kappa = lambda_max / lambda_min;

    let integrator_tol = (1e-2 * eps_l).min(1e-6);
    let schedule = ScheduleSpec::new(kappa, P_DEFAULT, C_T_DEFAULT, integrator_tol)?;

    let full = aqc_evolve(&a_pad, &b_pad, schedule.t_total, schedule.steps, schedule.p)?;
    let half = aqc_evolve(
        &a_pad,
        &b_pad,
        schedule.t_total,
        schedule.steps / 2,
        schedule.p,
    )?;
    // Classical RK4 converges at fourth order, so the half-resolution
    // comparison over-estimates the fine-grid error by the factor 2^4 - 1.
    let eps_int = (&full.state.amplitudes - &half.state.amplitudes).norm() / 15.0;

    let spec = FilterSpec::for_system(s, kappa, eps_l)?;
    let (_, h1) = hamiltonian_pair(&a_pad, &b_pad);
    let h1_over_s = h1 / s as f64;
    let (filtered, prob_filter) = apply_filter(&h1_over_s, &spec, &full.state.amplitudes)?;

    // Project the flag qubit to |0>: the leading system-dimension block.
    let flag_zero = filtered.rows(0, p_dim).clone_owned();
    let p_flag = flag_zero.norm_squared();
    let success = prob_filter * p_flag;
    if success < SUCCESS_FLOOR {
        return Err(Error::Simulation(format!(
            "success probability {success:.3e} below the {SUCCESS_FLOOR:.0e} floor \
             (filter stage {prob_filter:.3e}, flag projection {p_flag:.3e}); \
             the filtered state retains too little of the solution component"
        )));
    }
    let c_state = QuantumRegisterState::new(
        &flag_zero / Complex64::new(p_flag.sqrt(), 0.0),
        RegisterLayout {
            ancilla_qubits: 0,
            flag_qubits: 0,
            system_qubits: p_dim.trailing_zeros() as usize,
        },
    )?;

    let resources = ResourceLedger {
        filter_degree: spec.degree_ell,
        evolution_time: schedule.t_total,
        aqc_steps: schedule.steps,
        uh1_queries: 2 * spec.degree_ell,
        repetitions: (1.0 / success.sqrt()).ceil() as usize,
        integrator_budget: eps_int,
        kappa,
        success_probability: success,
    };
    Ok(QlsaOutcome {
        c_state,
        success_probability: success,
        resources,
        mu0: full.mu0,
    })
}

/// Theoretical lower bound on the preparation success amplitude,
/// `(q/delta)^(2 tau - d) / (C s)`, squared to a probability.
pub fn preparation_probability_floor(
    tau: f64,
    d: usize,
    q: f64,
    delta: f64,
    c_scale: f64,
    s: usize,
) -> f64 {
    let amp = (q / delta).powf(2.0 * tau - d as f64) / (c_scale * s as f64);
    amp * amp
}

/// Applies the block-encoded evaluation dilation to `|0...0>|1>|c>`, projects
/// every ancilla and the dilation flag to zero, and renormalizes.
///
/// Returns the solution state over a power-of-two register (zero-padded when
/// the point count is not a power of two) and the exact success probability
/// `(|M_hat c| / s)^2`. When `floor` is given, probabilities below it are an
/// error.
pub fn prepare_solution_state(
    dilation: &CscMatrix<f64>,
    s_m: usize,
    c_state: &DVector<Complex64>,
    floor: Option<f64>,
) -> Result<(QuantumRegisterState, f64)> {
    let two_n = dilation.nrows();
    if two_n % 2 != 0 || dilation.ncols() != two_n {
        return Err(Error::Dimension(
            "dilation must be square with even order".into(),
        ));
    }
    let n = two_n / 2;
    if c_state.len() != n {
        return Err(Error::Dimension(format!(
            "coefficient state length {} vs dilation half-order {n}",
            c_state.len()
        )));
    }
    if (c_state.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Parameter("coefficient state not normalized".into()));
    }
    // Zero-pad the dilation to a power of two; padding rows stay untouched.
    let p2 = next_pow2(two_n);
    let dil_pad = if p2 == two_n {
        dilation.clone()
    } else {
        let mut coo = nalgebra_sparse::CooMatrix::new(p2, p2);
        for (i, j, v) in dilation.triplet_iter() {
            coo.push(i, j, *v);
        }
        CscMatrix::from(&coo)
    };
    let enc = block_encode_sparse(&dil_pad, s_m)?;

    // Input |0^(m+1)> ⊗ psi with psi = (0_n, c, 0_pad): the c block sits in
    // the dilation's second half.
    let dim = enc.u.nrows();
    let mut input = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    for i in 0..n {
        input[n + i] = c_state[i];
    }
    let uc = enc.u.map(|v| Complex64::new(v, 0.0));
    let output = &uc * input;

    // Ancillas to zero: leading p2 block; dilation flag to zero: its first
    // n entries, which hold M_hat c / s exactly.
    let target = output.rows(0, n).clone_owned();
    let prob = target.norm_squared();
    if prob == 0.0 {
        return Err(Error::Simulation(
            "evaluation stage produced the zero vector".into(),
        ));
    }
    if let Some(fl) = floor {
        if prob < fl {
            return Err(Error::Simulation(format!(
                "preparation probability {prob:.3e} below floor {fl:.3e}"
            )));
        }
    }
    let n_pad = next_pow2(n);
    let mut padded = DVector::from_element(n_pad, Complex64::new(0.0, 0.0));
    let scale = Complex64::new(prob.sqrt(), 0.0);
    for i in 0..n {
        padded[i] = target[i] / scale;
    }
    let state = QuantumRegisterState::new(
        padded,
        RegisterLayout {
            ancilla_qubits: 0,
            flag_qubits: 0,
            system_qubits: n_pad.trailing_zeros() as usize,
        },
    )?;
    Ok((state, prob))
}
