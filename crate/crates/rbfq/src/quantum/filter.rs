//! Minimax eigenstate filter: the even Chebyshev-quotient polynomial that is
//! 1 at the origin and uniformly small on the band |x| in [gap, 1], applied
//! to states through the three-term matrix recurrence.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Largest admissible spectral gap parameter, `1/sqrt(12)`.
pub fn max_gap() -> f64 {
    1.0 / 12.0f64.sqrt()
}

/// Filter parameters: half-degree `ell` (the polynomial has degree `2 ell`),
/// band edge `gap`, and the suppression target the degree was chosen for.
#[derive(Clone, Copy, Debug)]
pub struct FilterSpec {
    pub degree_ell: usize,
    pub gap: f64,
    pub target_eps: f64,
}

impl FilterSpec {
    pub fn new(degree_ell: usize, gap: f64, target_eps: f64) -> Result<Self> {
        if !(gap > 0.0 && gap <= max_gap() + 1e-15) {
            return Err(Error::Parameter(format!(
                "gap {gap} outside (0, 1/sqrt(12)]"
            )));
        }
        if degree_ell == 0 {
            return Err(Error::Parameter("filter degree must be positive".into()));
        }
        let achieved = 2.0 * (-(2.0f64.sqrt()) * degree_ell as f64 * gap).exp();
        if achieved > target_eps {
            return Err(Error::Parameter(format!(
                "degree {degree_ell} suppresses only to {achieved:.3e}, above target {target_eps:.3e}"
            )));
        }
        Ok(Self {
            degree_ell,
            gap,
            target_eps,
        })
    }

    /// Smallest half-degree whose decay bound `2 exp(-sqrt(2) ell gap)` meets
    /// `eps_l`, with the gap set to `1/(s kappa)` capped at `1/sqrt(12)`.
    pub fn for_system(s: usize, kappa: f64, eps_l: f64) -> Result<Self> {
        if !(eps_l > 0.0 && eps_l < 0.5) {
            return Err(Error::Parameter(format!(
                "filter target {eps_l} outside (0, 1/2)"
            )));
        }
        if s == 0 || kappa < 1.0 {
            return Err(Error::Parameter(
                "sparsity must be positive and kappa >= 1".into(),
            ));
        }
        let gap = (1.0 / (s as f64 * kappa)).min(max_gap());
        let ell = ((2.0 / eps_l).ln() / (2.0f64.sqrt() * gap)).ceil() as usize;
        Self::new(ell.max(1), gap, eps_l)
    }
}

/// Chebyshev polynomial of the first kind, evaluated through the cos/cosh
/// closed forms so large arguments stay stable.
fn chebyshev_t(ell: usize, y: f64) -> f64 {
    let l = ell as f64;
    if y.abs() <= 1.0 {
        (l * y.acos()).cos()
    } else if y > 1.0 {
        (l * y.acosh()).cosh()
    } else {
        let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
        sign * (l * (-y).acosh()).cosh()
    }
}

/// Argument map of the filter: an even quadratic sending `[-gap, gap]` into
/// `[y0, -1]` and the band `gap <= |x| <= 1` into `[-1, 1]`.
fn band_map(x: f64, gap: f64) -> f64 {
    -1.0 + 2.0 * (x * x - gap * gap) / (1.0 - gap * gap)
}

/// Filter value at a scalar point: `T_ell(map(x)) / T_ell(map(0))`.
pub fn eval_filter(x: f64, spec: &FilterSpec) -> f64 {
    eval_filter_raw(x, spec.degree_ell, spec.gap)
}

/// The same quotient for arbitrary band edges in (0, 1); the uniform decay
/// bound that justifies [`FilterSpec`]'s degree choice only holds up to
/// `1/sqrt(12)`, but the polynomial itself is defined on the wider range.
pub fn eval_filter_raw(x: f64, ell: usize, gap: f64) -> f64 {
    let num = chebyshev_t(ell, band_map(x, gap));
    let den = chebyshev_t(ell, band_map(0.0, gap));
    num / den
}

/// Applies the filter polynomial of the given spec to a state through the
/// Chebyshev three-term recurrence on the mapped matrix.
///
/// Returns the normalized filtered state and its squared pre-normalization
/// norm: the probability of the all-zeros outcome on the ancillas of the
/// block-encoded filter unitary this recurrence simulates.
pub fn apply_filter(
    h1_over_s: &DMatrix<f64>,
    spec: &FilterSpec,
    state: &DVector<Complex64>,
) -> Result<(DVector<Complex64>, f64)> {
    let n = h1_over_s.nrows();
    if state.len() != n {
        return Err(Error::Dimension(format!(
            "matrix order {n} vs state length {}",
            state.len()
        )));
    }
    let spectral_bound = h1_over_s
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, &l| m.max(l.abs()));
    if spectral_bound > 1.0 + 1e-10 {
        return Err(Error::Simulation(format!(
            "spectrum reaches {spectral_bound}, outside [-1, 1]"
        )));
    }

    // Y = -I + 2 (H^2 - gap^2 I) / (1 - gap^2), complexified once.
    let g2 = spec.gap * spec.gap;
    let scale = 2.0 / (1.0 - g2);
    let mut y_real = h1_over_s * h1_over_s;
    y_real *= scale;
    for i in 0..n {
        y_real[(i, i)] -= 1.0 + scale * g2;
    }
    let y = y_real.map(|v| Complex64::new(v, 0.0));

    let mut t_prev = state.clone();
    let mut t_cur = &y * state;
    for _ in 2..=spec.degree_ell {
        let t_next = &y * &t_cur * Complex64::new(2.0, 0.0) - &t_prev;
        t_prev = t_cur;
        t_cur = t_next;
    }
    let den = chebyshev_t(spec.degree_ell, band_map(0.0, spec.gap));
    let filtered = t_cur / Complex64::new(den, 0.0);
    let norm = filtered.norm();
    if norm == 0.0 {
        return Err(Error::Simulation(
            "filter annihilated the state entirely".into(),
        ));
    }
    Ok((filtered.clone() / Complex64::new(norm, 0.0), norm * norm))
}

/// Standard dilation of a symmetric contraction `R` into an orthogonal
/// matrix `[[R, S], [S, -R]]` with `S = (I - R^2)^(1/2)`; structural witness
/// that the filter admits an exact unitary with one extra qubit.
pub fn dilate_contraction(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = r.nrows();
    if (r - r.transpose()).norm() > 1e-10 * r.norm().max(1.0) {
        return Err(Error::Parameter("dilation needs a symmetric matrix".into()));
    }
    let eig = r.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|l| l.abs() > 1.0 + 1e-10) {
        return Err(Error::Parameter(
            "dilation needs spectral radius at most 1".into(),
        ));
    }
    let sqrt_vals: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| (1.0 - l * l).max(0.0).sqrt())
        .collect();
    let q = &eig.eigenvectors;
    let s = q * DMatrix::from_diagonal(&DVector::from_vec(sqrt_vals)) * q.transpose();
    let mut u = DMatrix::zeros(2 * n, 2 * n);
    u.view_mut((0, 0), (n, n)).copy_from(r);
    u.view_mut((0, n), (n, n)).copy_from(&s);
    u.view_mut((n, 0), (n, n)).copy_from(&s);
    u.view_mut((n, n), (n, n)).copy_from(&(-r));
    Ok(u)
}
