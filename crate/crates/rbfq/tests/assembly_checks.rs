//! The sparse assembler against a dense brute-force oracle, plus the
//! structural identities of the rescaled system: the preconditioner
//! factorization, the sparsity budget, and the normalized spectrum.

use nalgebra::DMatrix;
use rbfq::assembly::{
    assemble_collocation, assemble_evaluation, dense_from_csc, normalize_for_encoding,
};
use rbfq::points::{generate_boundary, generate_halton, matched_per_face, DEFAULT_PROBE_COUNT};
use rbfq::solve::condition_number;
use rbfq::{Domain, PointSet, WendlandKernel};

fn build_set(n_interior: usize, d: usize) -> PointSet {
    let domain = Domain::unit_cube(d).unwrap();
    let interior = generate_halton(n_interior, &domain, 0).unwrap();
    let boundary = generate_boundary(&domain, matched_per_face(n_interior, d)).unwrap();
    PointSet::new(interior, boundary, &domain, DEFAULT_PROBE_COUNT).unwrap()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Radial Laplacian recomposed from plain derivative evaluations. The library
/// derives its closed form by exact coefficient manipulation; this path goes
/// through the quotient formula instead, so agreement is meaningful.
fn oracle_laplacian(kernel: &WendlandKernel, r: f64) -> f64 {
    let d = kernel.d() as f64;
    if r == 0.0 {
        return kernel.laplacian(0.0);
    }
    kernel.derivative(2, r) + (d - 1.0) * kernel.derivative(1, r) / r
}

fn oracle_bilaplacian(kernel: &WendlandKernel, r: f64) -> f64 {
    let d = kernel.d() as f64;
    if r == 0.0 {
        return kernel.bilaplacian(0.0);
    }
    kernel.derivative(4, r)
        + 2.0 * (d - 1.0) * kernel.derivative(3, r) / r
        + (d - 1.0) * (d - 3.0) * (r * kernel.derivative(2, r) - kernel.derivative(1, r))
            / (r * r * r)
}

/// Dense brute-force assembly of the raw system: no drop rule, no sparse
/// bookkeeping, every pair evaluated directly.
fn oracle_raw(kernel: &WendlandKernel, points: &PointSet, delta: f64) -> DMatrix<f64> {
    let d = kernel.d() as i32;
    let ni = points.interior.len();
    let all: Vec<&Vec<f64>> = points.interior.iter().chain(&points.boundary).collect();
    let n = all.len();
    DMatrix::from_fn(n, n, |i, j| {
        let u = dist(all[i], all[j]) / delta;
        match (i < ni, j < ni) {
            (true, true) => delta.powi(-d - 4) * oracle_bilaplacian(kernel, u),
            (false, false) => delta.powi(-d) * kernel.phi(u),
            _ => -delta.powi(-d - 2) * oracle_laplacian(kernel, u),
        }
    })
}

#[test]
fn sparse_assembler_matches_brute_force_oracle() {
    for (d, n_interior, delta) in [(1usize, 198usize, 0.3), (2, 80, 0.5)] {
        let kernel = WendlandKernel::new(d, 2).unwrap();
        let points = build_set(n_interior, d);
        let system = assemble_collocation(&kernel, &points, delta).unwrap();
        assert!(system.n() <= 200 || d == 2);

        let raw_oracle = oracle_raw(&kernel, &points, delta);
        let p = system.precond_diagonal();
        let raw = dense_from_csc(&system.a_raw);
        let rescaled = dense_from_csc(&system.a);

        let ni = points.interior.len();
        let n = system.n();
        // Relative comparison per block: within a block the entries share a
        // delta power, so the block max is the right yardstick.
        let mut block_scale = [0.0f64; 3];
        let block = |i: usize, j: usize| (i >= ni) as usize + (j >= ni) as usize;
        for i in 0..n {
            for j in 0..n {
                block_scale[block(i, j)] =
                    block_scale[block(i, j)].max(raw_oracle[(i, j)].abs());
            }
        }
        for i in 0..n {
            for j in 0..n {
                let scale = block_scale[block(i, j)];
                assert!(
                    (raw[(i, j)] - raw_oracle[(i, j)]).abs() <= 1e-4 * scale,
                    "d={d}: raw entry ({i},{j}) {} vs oracle {}",
                    raw[(i, j)],
                    raw_oracle[(i, j)]
                );
                let oracle_rescaled = p[i] * raw_oracle[(i, j)] * p[j];
                assert!(
                    (rescaled[(i, j)] - oracle_rescaled).abs()
                        <= 1e-4 * scale * p[i] * p[j].max(1e-300),
                    "d={d}: rescaled entry ({i},{j})"
                );
            }
        }
    }
}

#[test]
fn rescaled_system_factors_through_the_preconditioner() {
    let kernel = WendlandKernel::new(2, 2).unwrap();
    let points = build_set(60, 2);
    let system = assemble_collocation(&kernel, &points, 0.6).unwrap();
    let p = system.precond_diagonal();
    let raw = dense_from_csc(&system.a_raw);
    let a = dense_from_csc(&system.a);
    let n = system.n();
    for i in 0..n {
        for j in 0..n {
            let expected = p[i] * raw[(i, j)] * p[j];
            assert!(
                (a[(i, j)] - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                "entry ({i},{j}): {} vs P A_raw P = {}",
                a[(i, j)],
                expected
            );
        }
    }
}

#[test]
fn sparsity_respects_the_support_budget() {
    for (d, n_interior, deltas) in [
        (1usize, 50usize, vec![0.1, 0.2, 0.4, 0.8]),
        (2, 120, vec![0.3, 0.5, 0.8]),
    ] {
        let kernel = WendlandKernel::new(d, 2).unwrap();
        let points = build_set(n_interior, d);
        for &delta in &deltas {
            let system = assemble_collocation(&kernel, &points, delta).unwrap();
            let budget = 2.0 * (1.0 + delta / points.q).powi(d as i32);
            assert!(
                (system.sparsity as f64) <= budget,
                "d={d} delta={delta}: sparsity {} exceeds budget {budget:.1}",
                system.sparsity
            );
        }
    }
}

#[test]
fn rescaling_improves_conditioning_for_small_support() {
    for (d, n_interior, delta) in [(1usize, 30usize, 0.3), (1, 30, 0.5), (2, 60, 0.4)] {
        let kernel = WendlandKernel::new(d, 2).unwrap();
        let points = build_set(n_interior, d);
        let system = assemble_collocation(&kernel, &points, delta).unwrap();
        let cond_rescaled = condition_number(&system.a).unwrap();
        let cond_raw = condition_number(&system.a_raw).unwrap();
        assert!(
            cond_rescaled <= cond_raw,
            "d={d} delta={delta}: cond {cond_rescaled:.3e} vs raw {cond_raw:.3e}"
        );
    }
}

#[test]
fn evaluation_blocks_are_mutually_consistent() {
    let kernel = WendlandKernel::new(2, 2).unwrap();
    let points = build_set(40, 2);
    let delta = 0.5;
    let eval = assemble_evaluation(&kernel, &points, delta).unwrap();
    let n = eval.m.nrows();
    let m = dense_from_csc(&eval.m);
    let m_hat = dense_from_csc(&eval.m_hat);
    let dil = dense_from_csc(&eval.dilation);
    let scale = eval.c_scale * delta.powi(-2);
    for i in 0..n {
        for j in 0..n {
            let expected = m[(i, j)] / scale;
            assert!((m_hat[(i, j)] - expected).abs() <= 1e-14 * expected.abs().max(1e-30));
            assert!(m_hat[(i, j)].abs() <= 1.0 + 1e-12, "entry ({i},{j}) above 1");
            assert!((dil[(i, n + j)] - m_hat[(i, j)]).abs() == 0.0);
            assert!((dil[(n + j, i)] - m_hat[(i, j)]).abs() == 0.0);
            assert!(dil[(i, j)] == 0.0 && dil[(n + i, n + j)] == 0.0);
        }
    }
}

#[test]
fn normalized_spectrum_matches_the_condition_number() {
    let kernel = WendlandKernel::new(1, 2).unwrap();
    let points = build_set(24, 1);
    let mut system = assemble_collocation(&kernel, &points, 0.4).unwrap();
    let kappa = condition_number(&system.a).unwrap();
    let (a_hat, eta) = normalize_for_encoding(&mut system).unwrap();
    assert!(eta > 0.0);
    let eig = dense_from_csc(&a_hat).symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    assert!((max - 1.0).abs() <= 1e-10, "top of spectrum {max}");
    assert!(
        (min - 1.0 / kappa).abs() <= 1e-10 / kappa.max(1.0),
        "bottom of spectrum {min} vs 1/kappa {}",
        1.0 / kappa
    );
}

#[test]
fn rhs_scales_interior_rows_by_delta_squared() {
    let points = build_set(10, 1);
    let delta = 0.35;
    let rhs = rbfq::assembly::assemble_rhs(
        rbfq::solve::manufactured_f,
        rbfq::solve::manufactured_g,
        &points,
        delta,
    )
    .unwrap();
    let ni = points.interior.len();
    for (i, x) in points.interior.iter().enumerate() {
        let expected = delta * delta * rbfq::solve::manufactured_f(x);
        assert!((rhs[i] - expected).abs() <= 1e-14 * expected.abs());
    }
    for (i, x) in points.boundary.iter().enumerate() {
        assert_eq!(rhs[ni + i], rbfq::solve::manufactured_g(x));
    }
}
