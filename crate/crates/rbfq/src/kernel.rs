//! Wendland compactly supported radial functions and their radial operators.
//!
//! The functions are built once as exact integer-coefficient polynomials
//! on [0, 1] by expanding `(1 - r)^(l + k) * p(r)`, so evaluation is
//! branch-free Horner and the removable `1/r` singularities of the radial
//! Laplacian and bilaplacian are eliminated algebraically at construction
//! time rather than handled at runtime.

use crate::error::{Error, Result};

/// Smallest degree Wendland function for dimension `d` and smoothness
/// `C^(2k)`, together with precomputed derivative and operator polynomials.
#[derive(Clone, Debug)]
pub struct WendlandKernel {
    d: usize,
    k: usize,
    ell: usize,
    /// Monomial coefficients of phi on [0,1], ascending powers.
    phi_poly: Vec<f64>,
    /// phi', phi'', phi''', phi'''' coefficient lists.
    deriv_polys: [Vec<f64>; 4],
    /// phi'' + (d-1)/r phi' with the division carried out exactly; empty for k = 0.
    lap_poly: Vec<f64>,
    /// phi'''' + 2(d-1)/r phi''' + (d-1)(d-3)(r phi'' - phi')/r^3; empty for k < 2.
    bilap_poly: Vec<f64>,
}

/// `(1 - r)^n` as ascending integer coefficients.
fn one_minus_r_pow(n: usize) -> Vec<i64> {
    let mut c = vec![0i64; n + 1];
    let mut binom = 1i64;
    for (j, cj) in c.iter_mut().enumerate() {
        *cj = if j % 2 == 0 { binom } else { -binom };
        binom = binom * (n as i64 - j as i64) / (j as i64 + 1);
    }
    c
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn poly_deriv(a: &[i64]) -> Vec<i64> {
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(j, &aj)| j as i64 * aj)
        .collect()
}

/// Exact division by `r^n`; panics if the low-order coefficients are nonzero,
/// which the vanishing-coefficient structure of the Wendland family rules out.
fn poly_div_r(a: &[i64], n: usize) -> Vec<i64> {
    assert!(
        a[..n].iter().all(|&c| c == 0),
        "polynomial not divisible by r^{n}"
    );
    a[n..].to_vec()
}

fn poly_add_scaled(a: &[i64], b: &[i64], scale: i64) -> Vec<i64> {
    let mut out = vec![0i64; a.len().max(b.len())];
    for (o, &ai) in out.iter_mut().zip(a) {
        *o = ai;
    }
    for (o, &bi) in out.iter_mut().zip(b) {
        *o += scale * bi;
    }
    out
}

fn horner(coeffs: &[f64], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * r + c)
}

impl WendlandKernel {
    /// Builds `phi_{d,k}` from the minimal-degree polynomial factors, with the
    /// customary positive constant fixed to 1.
    ///
    /// Only `k` in 0..=3 is defined; the integer expansion is overflow-safe
    /// for `d <= 20`.
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if d < 1 || d > 20 || k > 3 {
            return Err(Error::KernelOrder { d, k });
        }
        let ell = d / 2 + k + 1;
        let l = ell as i64;
        let p: Vec<i64> = match k {
            0 => vec![1],
            1 => vec![1, l + 1],
            2 => vec![3, 3 * l + 6, l * l + 4 * l + 3],
            3 => vec![
                15,
                15 * l + 45,
                6 * l * l + 36 * l + 45,
                l * l * l + 9 * l * l + 23 * l + 15,
            ],
            _ => unreachable!(),
        };
        let phi = poly_mul(&one_minus_r_pow(ell + k), &p);

        let d1 = poly_deriv(&phi);
        let d2 = poly_deriv(&d1);
        let d3 = poly_deriv(&d2);
        let d4 = poly_deriv(&d3);

        let dd = d as i64;
        let lap = if k >= 1 {
            poly_add_scaled(&d2, &poly_div_r(&d1, 1), dd - 1)
        } else {
            Vec::new()
        };
        let bilap = if k >= 2 {
            // r phi'' - phi' is divisible by r^3 because the r and r^3
            // coefficients of phi vanish for k >= 2.
            let mut t: Vec<i64> = std::iter::once(0).chain(d2.iter().copied()).collect();
            for (ti, &di) in t.iter_mut().zip(&d1) {
                *ti -= di;
            }
            let part = poly_add_scaled(&d4, &poly_div_r(&d3, 1), 2 * (dd - 1));
            poly_add_scaled(&part, &poly_div_r(&t, 3), (dd - 1) * (dd - 3))
        } else {
            Vec::new()
        };

        let to_f64 = |v: &[i64]| v.iter().map(|&c| c as f64).collect::<Vec<f64>>();
        Ok(Self {
            d,
            k,
            ell,
            phi_poly: to_f64(&phi),
            deriv_polys: [to_f64(&d1), to_f64(&d2), to_f64(&d3), to_f64(&d4)],
            lap_poly: to_f64(&lap),
            bilap_poly: to_f64(&bilap),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Sobolev smoothness exponent `tau = d/2 + k + 1/2`.
    pub fn tau(&self) -> f64 {
        self.d as f64 / 2.0 + self.k as f64 + 0.5
    }

    /// Ascending monomial coefficients of phi on [0, 1].
    pub fn phi_coefficients(&self) -> &[f64] {
        &self.phi_poly
    }

    /// Coefficients of the `order`-th derivative (`order` in 1..=4).
    pub fn derivative_coefficients(&self, order: usize) -> &[f64] {
        assert!((1..=4).contains(&order), "derivative order must be 1..=4");
        &self.deriv_polys[order - 1]
    }

    pub fn laplacian_coefficients(&self) -> &[f64] {
        assert!(self.k >= 1, "radial Laplacian requires k >= 1");
        &self.lap_poly
    }

    pub fn bilaplacian_coefficients(&self) -> &[f64] {
        assert!(self.k >= 2, "radial bilaplacian requires k >= 2");
        &self.bilap_poly
    }

    /// Evaluates phi; identically zero outside the unit support.
    ///
    /// # Panics
    /// On negative `r` (radii are norms).
    pub fn phi(&self, r: f64) -> f64 {
        assert!(r >= 0.0, "radius must be nonnegative, got {r}");
        if r >= 1.0 {
            0.0
        } else {
            horner(&self.phi_poly, r)
        }
    }

    /// Evaluates the `order`-th derivative of phi (zero outside the support).
    ///
    /// Logs a warning for `order > 2k`, where the derivative jumps at the
    /// support boundary and pointwise values near r = 1 are one-sided.
    ///
    /// # Panics
    /// On `order` outside 1..=4 or negative `r`.
    pub fn derivative(&self, order: usize, r: f64) -> f64 {
        assert!((1..=4).contains(&order), "derivative order must be 1..=4");
        assert!(r >= 0.0, "radius must be nonnegative, got {r}");
        if order > 2 * self.k {
            log::warn!(
                "phi_({},{}) derivative of order {} is discontinuous at the support boundary",
                self.d,
                self.k,
                order
            );
        }
        if r >= 1.0 {
            0.0
        } else {
            horner(&self.deriv_polys[order - 1], r)
        }
    }

    /// Radial form of the Laplacian, `phi'' + (d-1) phi'/r`, finite at r = 0.
    ///
    /// # Panics
    /// If `k = 0` (the function is not C^2) or `r < 0`.
    pub fn laplacian(&self, r: f64) -> f64 {
        assert!(self.k >= 1, "radial Laplacian requires k >= 1");
        assert!(r >= 0.0, "radius must be nonnegative, got {r}");
        if r >= 1.0 {
            0.0
        } else {
            horner(&self.lap_poly, r)
        }
    }

    /// Radial form of the double Laplacian, finite at r = 0.
    ///
    /// # Panics
    /// If `k < 2` (the function is not C^4) or `r < 0`.
    pub fn bilaplacian(&self, r: f64) -> f64 {
        assert!(self.k >= 2, "radial bilaplacian requires k >= 2");
        assert!(r >= 0.0, "radius must be nonnegative, got {r}");
        if r >= 1.0 {
            0.0
        } else {
            horner(&self.bilap_poly, r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_out_of_range_orders() {
        assert!(WendlandKernel::new(0, 2).is_err());
        assert!(WendlandKernel::new(3, 4).is_err());
        assert!(WendlandKernel::new(21, 1).is_err());
        assert!(WendlandKernel::new(1, 0).is_ok());
        assert!(WendlandKernel::new(20, 3).is_ok());
    }

    #[test]
    fn phi_2_0_is_one_minus_r_squared() {
        let k = WendlandKernel::new(2, 0).unwrap();
        assert_eq!(k.phi_coefficients(), &[1.0, -2.0, 1.0]);
        assert_eq!(k.phi(0.0), 1.0);
        assert_eq!(k.phi(1.0), 0.0);
    }

    #[test]
    fn phi_3_1_expands_the_tabulated_factors() {
        // (1-r)^4 (4r+1) = 1 - 10 r^2 + 20 r^3 - 15 r^4 + 4 r^5
        let k = WendlandKernel::new(3, 1).unwrap();
        assert_eq!(k.ell(), 3);
        assert_eq!(k.phi_coefficients(), &[1.0, 0.0, -10.0, 20.0, -15.0, 4.0]);
        assert_eq!(k.phi(1.5), 0.0);
        assert_eq!(k.phi(0.0), 1.0);
        assert_relative_eq!(k.phi(0.5), 0.1875, max_relative = 1e-15);
    }

    #[test]
    fn phi_3_1_first_derivative() {
        // phi' = -20 r (1-r)^3, so phi'(0.5) = -10 * 0.125 = -1.25.
        let k = WendlandKernel::new(3, 1).unwrap();
        assert_relative_eq!(k.derivative(1, 0.5), -1.25, max_relative = 1e-14);
    }

    #[test]
    fn tau_matches_definition() {
        assert_eq!(WendlandKernel::new(3, 2).unwrap().tau(), 4.0);
        assert_eq!(WendlandKernel::new(1, 2).unwrap().tau(), 3.0);
        assert_eq!(WendlandKernel::new(2, 2).unwrap().tau(), 3.5);
    }

    #[test]
    fn odd_low_order_coefficients_vanish_for_k_ge_2() {
        for d in 1..=10 {
            for k in 2..=3 {
                let kern = WendlandKernel::new(d, k).unwrap();
                let c = kern.phi_coefficients();
                assert_eq!(c[1], 0.0, "r coefficient, d={d} k={k}");
                assert_eq!(c[3], 0.0, "r^3 coefficient, d={d} k={k}");
            }
        }
    }

    #[test]
    fn derivative_of_phi_3_2_vanishes_at_origin() {
        let k = WendlandKernel::new(3, 2).unwrap();
        assert_eq!(k.derivative(1, 0.0), 0.0);
    }

    #[test]
    fn phi_1_2_coefficients_and_second_derivative() {
        let k = WendlandKernel::new(1, 2).unwrap();
        assert_eq!(
            k.phi_coefficients(),
            &[3.0, 0.0, -21.0, 0.0, 105.0, -168.0, 105.0, -24.0]
        );
        // phi'' = -42 + 1260 r^2 - 3360 r^3 + 3150 r^4 - 1008 r^5
        assert_eq!(k.derivative(2, 0.0), -42.0);
        let r: f64 = 0.7;
        let expect = -42.0 + 1260.0 * r.powi(2) - 3360.0 * r.powi(3) + 3150.0 * r.powi(4)
            - 1008.0 * r.powi(5);
        assert_relative_eq!(k.derivative(2, r), expect, max_relative = 1e-13);
    }

    #[test]
    fn laplacian_frozen_values() {
        let k = WendlandKernel::new(3, 2).unwrap();
        assert_eq!(k.laplacian(1.2), 0.0);
        // L1 phi_{3,2} = -168 + 4200 r^2 - 13440 r^3 + 17640 r^4 - 10752 r^5 + 2520 r^6
        assert_relative_eq!(k.laplacian(0.3), -857157.0 / 25000.0, max_relative = 1e-14);
        // Removable singularity: L1 phi(0) = d * phi''(0).
        assert_eq!(k.laplacian(0.0), 3.0 * k.derivative(2, 0.0));
        assert_eq!(k.laplacian(0.0), -168.0);
    }

    #[test]
    fn bilaplacian_frozen_values() {
        let k32 = WendlandKernel::new(3, 2).unwrap();
        assert_eq!(k32.bilaplacian(1.0), 0.0);
        assert_relative_eq!(k32.bilaplacian(0.4), -798.336, max_relative = 1e-12);
        assert_eq!(k32.bilaplacian(0.0), 25200.0);

        let k53 = WendlandKernel::new(5, 3).unwrap();
        let v = k53.bilaplacian(0.25);
        assert!(v.is_finite());
        assert_relative_eq!(v, 63827.99011230469, max_relative = 1e-12);
    }

    #[test]
    fn bilaplacian_limit_matches_fourth_derivative_identity() {
        // L2 phi(0) = d(d+2)/3 * phi''''(0) for the radial double Laplacian.
        for (d, k) in [(1, 2), (2, 2), (3, 2), (3, 3), (5, 3)] {
            let kern = WendlandKernel::new(d, k).unwrap();
            let expect = (d * (d + 2)) as f64 / 3.0 * kern.derivative(4, 0.0);
            assert_relative_eq!(kern.bilaplacian(0.0), expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn derivatives_up_to_2k_vanish_at_support_boundary() {
        for d in 1..=6 {
            for k in 0..=3 {
                let kern = WendlandKernel::new(d, k).unwrap();
                // Evaluate the polynomial pieces at r = 1 directly; the
                // evaluators themselves return 0 there by the support cutoff.
                let at_one = |c: &[f64]| horner(c, 1.0);
                assert!(
                    at_one(kern.phi_coefficients()).abs() <= 1e-12,
                    "phi({d},{k})(1)"
                );
                for order in 1..=(2 * k).min(4) {
                    assert!(
                        at_one(kern.derivative_coefficients(order)).abs() <= 1e-12,
                        "phi({d},{k}) derivative {order} at 1"
                    );
                }
            }
        }
    }

    #[test]
    #[should_panic(expected = "radial Laplacian requires k >= 1")]
    fn laplacian_rejects_k0() {
        WendlandKernel::new(2, 0).unwrap().laplacian(0.5);
    }

    #[test]
    #[should_panic(expected = "radial bilaplacian requires k >= 2")]
    fn bilaplacian_rejects_k1() {
        WendlandKernel::new(2, 1).unwrap().bilaplacian(0.5);
    }

    #[test]
    #[should_panic(expected = "radius must be nonnegative")]
    fn negative_radius_rejected() {
        WendlandKernel::new(3, 1).unwrap().phi(-0.1);
    }
}
