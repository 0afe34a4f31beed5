//! Classical solution of the collocation system: conjugate gradients on the
//! rescaled matrix, dense factorization for oracle-grade answers, condition
//! numbers, and pointwise evaluation of the reconstructed solution.

use crate::assembly::{
    dense_from_csc, scaled_laplacian, scaled_phi, CollocationSystem, EvaluationMatrix,
};
use crate::error::{Error, Result};
use crate::kernel::WendlandKernel;
use crate::points::PointSet;
use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CscMatrix;
use serde::{Deserialize, Serialize};

/// Desk-scale cap for dense eigensolves; beyond this condition numbers are
/// not computed.
pub const DENSE_EIGEN_LIMIT: usize = 4096;

/// Outcome of a classical solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveResult {
    pub c: DVector<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Condition number of the rescaled matrix; absent above the dense
    /// eigensolve limit.
    pub kappa: Option<f64>,
    pub u_bar_at_points: DVector<f64>,
    pub runtime_ns: u128,
}

fn check_symmetric(a: &CscMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSpd(format!(
            "matrix is {}x{}, not square",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let at = a.transpose();
    let mut lhs = a.triplet_iter();
    let mut rhs = at.triplet_iter();
    loop {
        match (lhs.next(), rhs.next()) {
            (None, None) => return Ok(()),
            (Some((i, j, v)), Some((ti, tj, tv)))
                if i == ti && j == tj && (v - tv).abs() <= 1e-12 * scale => {}
            _ => {
                return Err(Error::NotSpd(
                    "matrix is not symmetric to 1e-12 relative".into(),
                ))
            }
        }
    }
}

/// Unpreconditioned conjugate gradients (the only preconditioning in play is
/// the diagonal rescaling already folded into the matrix).
///
/// Returns `(c, iterations, relative_residual)`.
pub fn conjugate_gradient(
    a: &CscMatrix<f64>,
    b: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(DVector<f64>, usize, f64)> {
    if tol <= 0.0 {
        return Err(Error::Parameter(format!("tolerance {tol} must be > 0")));
    }
    check_symmetric(a)?;
    let n = b.len();
    if a.nrows() != n {
        return Err(Error::Dimension(format!(
            "matrix order {} vs right-hand side length {n}",
            a.nrows()
        )));
    }
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok((DVector::zeros(n), 0, 0.0));
    }
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rs = r.dot(&r);
    for iter in 0..max_iter {
        let ap = a * &p;
        let p_ap = p.dot(&ap);
        if p_ap <= 0.0 {
            return Err(Error::NotSpd(format!(
                "curvature {p_ap:.3e} along a search direction"
            )));
        }
        let alpha = rs / p_ap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let res = r.norm() / b_norm;
        if res <= tol {
            return Ok((x, iter + 1, res));
        }
        let rs_next = r.dot(&r);
        p = &r + (rs_next / rs) * p;
        rs = rs_next;
    }
    Err(Error::CgDiverged {
        max_iter,
        residual: r.norm() / b_norm,
    })
}

/// Oracle-grade direct solve: Cholesky, falling back to LU for matrices that
/// are positive definite only up to roundoff.
pub fn dense_solve(a: &CscMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let dense = dense_from_csc(a);
    if let Some(chol) = dense.clone().cholesky() {
        return Ok(chol.solve(b));
    }
    dense
        .lu()
        .solve(b)
        .ok_or_else(|| Error::NotSpd("direct factorization failed".into()))
}

/// `lambda_max / lambda_min` by dense symmetric eigensolve.
pub fn condition_number(a: &CscMatrix<f64>) -> Result<f64> {
    if a.nrows() > DENSE_EIGEN_LIMIT {
        return Err(Error::Parameter(format!(
            "matrix order {} exceeds the dense eigensolve limit {DENSE_EIGEN_LIMIT}",
            a.nrows()
        )));
    }
    check_symmetric(a)?;
    let eig = dense_from_csc(a).symmetric_eigen();
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        return Err(Error::NotSpd(format!(
            "smallest eigenvalue {min:.3e} is not positive"
        )));
    }
    Ok(eig.eigenvalues.max() / min)
}

/// Condition number of a general (not necessarily symmetric) matrix by dense
/// SVD, plus its extreme singular values.
pub fn singular_value_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let sv = m.clone().svd(false, false).singular_values;
    (sv.max(), sv.min())
}

/// Reconstruction of the collocation solution at an arbitrary point: the
/// rescaling is applied to `c` internally, then the plain kernel expansion
/// is summed directly.
pub fn evaluate_solution_at(
    kernel: &WendlandKernel,
    points: &PointSet,
    c: &DVector<f64>,
    delta: f64,
    x: &[f64],
) -> Result<f64> {
    let ni = points.interior.len();
    let n = ni + points.boundary.len();
    if c.len() != n {
        return Err(Error::Dimension(format!(
            "coefficient length {} vs point count {n}",
            c.len()
        )));
    }
    if x.len() != kernel.d() {
        return Err(Error::Dimension(format!(
            "query point dimension {} vs kernel dimension {}",
            x.len(),
            kernel.d()
        )));
    }
    let dist = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    };
    let mut u = 0.0;
    for (j, xj) in points.interior.iter().enumerate() {
        let c_diamond = delta * delta * c[j];
        u -= c_diamond * scaled_laplacian(kernel, dist(x, xj), delta);
    }
    for (j, xj) in points.boundary.iter().enumerate() {
        u += c[ni + j] * scaled_phi(kernel, dist(x, xj), delta);
    }
    Ok(u)
}

/// Euclidean relative error; the uniform discretization weight cancels.
pub fn l2_relative_error(u_num: &DVector<f64>, u_exact: &DVector<f64>) -> Result<f64> {
    if u_num.len() != u_exact.len() {
        return Err(Error::Dimension(format!(
            "length mismatch {} vs {}",
            u_num.len(),
            u_exact.len()
        )));
    }
    let denom = u_exact.norm();
    if denom == 0.0 {
        return Err(Error::Parameter(
            "relative error against an identically zero reference".into(),
        ));
    }
    Ok((u_num - u_exact).norm() / denom)
}

/// How to solve the assembled system.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum SolveMethod {
    ConjugateGradient { tol: f64, max_iter: usize },
    Direct,
}

/// Solves the system, measures its condition number (at desk scale), and
/// evaluates the solution at the collocation points via the evaluation
/// matrix. Records kappa on the system.
pub fn solve_system(
    system: &mut CollocationSystem,
    evaluation: &EvaluationMatrix,
    method: SolveMethod,
) -> Result<SolveResult> {
    let start = std::time::Instant::now();
    let (c, iterations, residual) = match method {
        SolveMethod::ConjugateGradient { tol, max_iter } => {
            conjugate_gradient(&system.a, &system.b, tol, max_iter)?
        }
        SolveMethod::Direct => {
            let c = dense_solve(&system.a, &system.b)?;
            let res = (&system.a * &c - &system.b).norm() / system.b.norm().max(f64::MIN_POSITIVE);
            (c, 0, res)
        }
    };
    let kappa = if system.a.nrows() <= DENSE_EIGEN_LIMIT {
        let k = condition_number(&system.a)?;
        system.kappa = Some(k);
        Some(k)
    } else {
        None
    };
    let u_bar_at_points = &evaluation.m * &c;
    Ok(SolveResult {
        c,
        iterations,
        residual,
        kappa,
        u_bar_at_points,
        runtime_ns: start.elapsed().as_nanos(),
    })
}

/// Product of sines: smooth manufactured solution vanishing on the cube faces.
pub fn manufactured_u(x: &[f64]) -> f64 {
    x.iter().map(|&xi| (std::f64::consts::PI * xi).sin()).product()
}

/// Source term matching `manufactured_u` for the sign convention where the
/// interior rows impose the negative Laplacian.
pub fn manufactured_f(x: &[f64]) -> f64 {
    let pi = std::f64::consts::PI;
    x.len() as f64 * pi * pi * manufactured_u(x)
}

pub fn manufactured_g(_x: &[f64]) -> f64 {
    0.0
}
