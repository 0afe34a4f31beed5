//! Time-optimal adiabatic schedule and integrator step budgeting.

use crate::error::{Error, Result};

/// Schedule exponent default: the analysis holds for any value in (1, 2).
pub const P_DEFAULT: f64 = 1.5;

/// Evolution-time prefactor in `T = C_T * kappa`, calibrated once so the
/// solution overlap stays at order one on the test ladder.
pub const C_T_DEFAULT: f64 = 10.0;

/// Schedule value at normalized time `v`:
/// `f(v) = kappa/(kappa-1) * [1 - (1 + v (kappa^(p-1) - 1))^(1/(1-p))]`.
///
/// Monotone on [0,1] with exact endpoints f(0) = 0, f(1) = 1. The prefactor
/// sign makes the endpoint identities hold; the defining property is the
/// initial-value problem df/dv ∝ (1 - f + f/kappa)^p.
pub fn schedule_f(v: f64, kappa: f64, p: f64) -> Result<f64> {
    if !(kappa > 1.0) {
        return Err(Error::Parameter(format!(
            "schedule needs kappa > 1, got {kappa}"
        )));
    }
    if !(1.0..2.0).contains(&p) || p == 1.0 {
        return Err(Error::Parameter(format!("exponent p={p} outside (1, 2)")));
    }
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Parameter(format!("schedule time {v} outside [0,1]")));
    }
    let growth = kappa.powf(p - 1.0) - 1.0;
    Ok(kappa / (kappa - 1.0) * (1.0 - (1.0 + v * growth).powf(1.0 / (1.0 - p))))
}

/// Evolution parameters: condition number, schedule exponent, total time, and
/// the integrator step count meeting a global error budget.
#[derive(Clone, Copy, Debug)]
pub struct ScheduleSpec {
    pub kappa: f64,
    pub p: f64,
    pub t_total: f64,
    pub steps: usize,
}

impl ScheduleSpec {
    /// `T = c_t * kappa`; steps sized from the classical fourth-order local
    /// truncation term `(T h)^5 / 120` accumulated over `1/h` steps, rounded
    /// up to an even count so a half-resolution comparison run is available.
    pub fn new(kappa: f64, p: f64, c_t: f64, integrator_tol: f64) -> Result<Self> {
        if !(kappa >= 1.0) {
            return Err(Error::Parameter(format!("kappa {kappa} must be >= 1")));
        }
        if integrator_tol <= 0.0 || c_t <= 0.0 {
            return Err(Error::Parameter(
                "time prefactor and tolerance must be positive".into(),
            ));
        }
        let t_total = c_t * kappa;
        let raw = (t_total.powi(5) / (120.0 * integrator_tol)).powf(0.25);
        let mut steps = (raw.ceil() as usize).max(64);
        if steps % 2 == 1 {
            steps += 1;
        }
        Ok(Self {
            kappa,
            p,
            t_total,
            steps,
        })
    }
}
