//! Sparse assembly of the symmetric collocation system for the Poisson
//! problem, the diagonal rescaling that tames the interior block, and the
//! evaluation matrix (with its normalized and dilated forms) used by the
//! quantum pipeline.
//!
//! Points are always ordered interior first, then boundary; row/column index
//! `i < n_interior` means an interior collocation condition.

use crate::error::{Error, Result};
use crate::kernel::WendlandKernel;
use crate::points::{Point, PointSet};
use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CscMatrix};

/// `Phi_delta(x) = delta^-d phi(|x|/delta)` at radius `r`.
pub fn scaled_phi(kernel: &WendlandKernel, r: f64, delta: f64) -> f64 {
    delta.powi(-(kernel.d() as i32)) * kernel.phi(r / delta)
}

/// Laplacian of the scaled kernel at radius `r`.
pub fn scaled_laplacian(kernel: &WendlandKernel, r: f64, delta: f64) -> f64 {
    delta.powi(-(kernel.d() as i32) - 2) * kernel.laplacian(r / delta)
}

/// Double Laplacian of the scaled kernel at radius `r`.
pub fn scaled_bilaplacian(kernel: &WendlandKernel, r: f64, delta: f64) -> f64 {
    delta.powi(-(kernel.d() as i32) - 4) * kernel.bilaplacian(r / delta)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Symmetric collocation system: raw matrix, rescaled matrix, and metadata.
///
/// `kappa` is measured by the solver module, `eta` by
/// [`normalize_for_encoding`]; both start unset.
#[derive(Clone, Debug)]
pub struct CollocationSystem {
    pub a_raw: CscMatrix<f64>,
    pub a: CscMatrix<f64>,
    pub b: DVector<f64>,
    pub delta: f64,
    pub n_interior: usize,
    /// Max nonzeros over rows/columns (they agree: the pattern is symmetric).
    pub sparsity: usize,
    pub eta: Option<f64>,
    pub kappa: Option<f64>,
}

impl CollocationSystem {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Diagonal of the rescaling: delta^2 on interior rows, 1 on boundary rows.
    pub fn precond_diagonal(&self) -> DVector<f64> {
        let n = self.n();
        DVector::from_fn(n, |i, _| {
            if i < self.n_interior {
                self.delta * self.delta
            } else {
                1.0
            }
        })
    }
}

fn validate_kernel_points(
    kernel: &WendlandKernel,
    points: &PointSet,
    delta: f64,
) -> Result<usize> {
    if kernel.k() < 2 {
        return Err(Error::KernelSmoothness {
            k: kernel.k(),
            need: 2,
        });
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::SupportRadius(delta));
    }
    let d = points
        .interior
        .first()
        .or(points.boundary.first())
        .ok_or_else(|| Error::Points("no points to assemble over".into()))?
        .len();
    if d != kernel.d() {
        return Err(Error::Dimension(format!(
            "kernel dimension {} vs point dimension {d}",
            kernel.d()
        )));
    }
    Ok(d)
}

/// Builds the raw and rescaled collocation matrices.
///
/// Block definitions, with `r = |x_i - x_j|` and entries dropped for
/// `r >= delta`:
/// interior-interior `delta^(-d-4) L2phi(r/delta)`, interior-boundary
/// `-delta^(-d-2) L1phi(r/delta)`, boundary-boundary `delta^(-d) phi(r/delta)`.
pub fn assemble_collocation(
    kernel: &WendlandKernel,
    points: &PointSet,
    delta: f64,
) -> Result<CollocationSystem> {
    validate_kernel_points(kernel, points, delta)?;
    let ni = points.interior.len();
    let all: Vec<&Point> = points.interior.iter().chain(&points.boundary).collect();
    let n = all.len();

    let entry = |i: usize, j: usize, r: f64| -> f64 {
        match (i < ni, j < ni) {
            (true, true) => scaled_bilaplacian(kernel, r, delta),
            (false, false) => scaled_phi(kernel, r, delta),
            _ => -scaled_laplacian(kernel, r, delta),
        }
    };

    let mut raw = CooMatrix::new(n, n);
    let mut pre = CooMatrix::new(n, n);
    let p = |i: usize| if i < ni { delta * delta } else { 1.0 };
    for i in 0..n {
        for j in i..n {
            let r = dist(all[i], all[j]);
            if r >= delta {
                continue;
            }
            let v = entry(i, j, r);
            raw.push(i, j, v);
            pre.push(i, j, p(i) * p(j) * v);
            if j != i {
                raw.push(j, i, v);
                pre.push(j, i, p(i) * p(j) * v);
            }
        }
    }
    let a_raw = CscMatrix::from(&raw);
    let a = CscMatrix::from(&pre);
    let sparsity = max_nonzeros_per_column(&a_raw);
    Ok(CollocationSystem {
        a_raw,
        a,
        b: DVector::zeros(n),
        delta,
        n_interior: ni,
        sparsity,
        eta: None,
        kappa: None,
    })
}

fn max_nonzeros_per_column(m: &CscMatrix<f64>) -> usize {
    (0..m.ncols())
        .map(|j| m.col(j).nnz())
        .max()
        .unwrap_or(0)
}

/// Right-hand side in rescaled form: `delta^2 f` on interior rows, `g` on
/// boundary rows.
pub fn assemble_rhs<F, G>(f: F, g: G, points: &PointSet, delta: f64) -> Result<DVector<f64>>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> f64,
{
    let ni = points.interior.len();
    let n = ni + points.boundary.len();
    let mut b = DVector::zeros(n);
    for (i, x) in points.interior.iter().enumerate() {
        b[i] = delta * delta * f(x);
    }
    for (i, x) in points.boundary.iter().enumerate() {
        b[ni + i] = g(x);
    }
    if let Some(bad) = b.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!(
            "right-hand side entry {bad} is not finite"
        )));
    }
    Ok(b)
}

/// Evaluation matrix mapping solved coefficients to nodal solution values,
/// plus its entrywise-normalized form and Hermitian dilation.
#[derive(Clone, Debug)]
pub struct EvaluationMatrix {
    pub m: CscMatrix<f64>,
    /// `M / (C delta^-d)`, every entry in [-1, 1].
    pub m_hat: CscMatrix<f64>,
    /// `[[0, M_hat], [M_hat^T, 0]]`, real symmetric, size 2N.
    pub dilation: CscMatrix<f64>,
    pub sparsity: usize,
    /// `C = max(-L1phi(0), phi(0))`.
    pub c_scale: f64,
    pub delta: f64,
    pub n_interior: usize,
}

/// Builds M with the rescaling folded in: column `j` holds
/// `-delta^-d L1phi(r/delta)` for interior `j` (the `delta^2` from the
/// rescaling cancels two powers of the Laplacian's `delta^-2`) and
/// `delta^-d phi(r/delta)` for boundary `j`.
pub fn assemble_evaluation(
    kernel: &WendlandKernel,
    points: &PointSet,
    delta: f64,
) -> Result<EvaluationMatrix> {
    let d = validate_kernel_points(kernel, points, delta)?;
    let ni = points.interior.len();
    let all: Vec<&Point> = points.interior.iter().chain(&points.boundary).collect();
    let n = all.len();
    let c_scale = (-kernel.laplacian(0.0)).max(kernel.phi(0.0));
    let scale = c_scale * delta.powi(-(d as i32));

    let mut m = CooMatrix::new(n, n);
    let mut m_hat = CooMatrix::new(n, n);
    let mut dil = CooMatrix::new(2 * n, 2 * n);
    for j in 0..n {
        for i in 0..n {
            let r = dist(all[i], all[j]);
            if r >= delta {
                continue;
            }
            let v = if j < ni {
                -delta.powi(-(d as i32)) * kernel.laplacian(r / delta)
            } else {
                scaled_phi(kernel, r, delta)
            };
            m.push(i, j, v);
            m_hat.push(i, j, v / scale);
            dil.push(i, n + j, v / scale);
            dil.push(n + j, i, v / scale);
        }
    }
    let m = CscMatrix::from(&m);
    let sparsity = max_nonzeros_per_column(&m);
    Ok(EvaluationMatrix {
        m,
        m_hat: CscMatrix::from(&m_hat),
        dilation: CscMatrix::from(&dil),
        sparsity,
        c_scale,
        delta,
        n_interior: ni,
    })
}

/// Spectral norm by dense symmetric eigensolve at desk scale, power iteration
/// beyond it; also certifies positive definiteness on the dense path.
///
/// Returns the normalized matrix and `eta` such that `A/eta` has spectrum in
/// `[1/kappa, 1]`, and records `eta` on the system.
pub fn normalize_for_encoding(system: &mut CollocationSystem) -> Result<(CscMatrix<f64>, f64)> {
    let n = system.a.nrows();
    let eta = if n <= 3000 {
        let dense = dense_from_csc(&system.a);
        let eig = dense.symmetric_eigen();
        let min = eig.eigenvalues.min();
        if min <= 0.0 {
            return Err(Error::NotSpd(format!(
                "smallest eigenvalue {min:.3e} is not positive"
            )));
        }
        eig.eigenvalues.max()
    } else {
        power_iteration_norm(&system.a)
    };
    let mut a_hat = system.a.clone();
    for v in a_hat.values_mut() {
        *v /= eta;
    }
    system.eta = Some(eta);
    Ok((a_hat, eta))
}

fn power_iteration_norm(a: &CscMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..300 {
        let w = a * &v;
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        v = w / next;
        if (next - lambda).abs() <= 1e-13 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

pub fn dense_from_csc(m: &CscMatrix<f64>) -> DMatrix<f64> {
    let mut dense = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, j, v) in m.triplet_iter() {
        dense[(i, j)] = *v;
    }
    dense
}
