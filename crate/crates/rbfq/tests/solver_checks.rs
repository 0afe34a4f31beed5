//! Classical solver behavior: agreement with the direct factorization, the
//! square-root iteration law, manufactured-solution convergence rates, and
//! consistency between the evaluation matrix and direct summation.

use rbfq::assembly::{assemble_collocation, assemble_evaluation, assemble_rhs};
use rbfq::points::{generate_boundary, generate_halton, matched_per_face, DEFAULT_PROBE_COUNT};
use rbfq::solve::{
    condition_number, conjugate_gradient, dense_solve, evaluate_solution_at, manufactured_f,
    manufactured_g,
};
use rbfq::study::{DeltaRule, StudyConfig};
use rbfq::{run_convergence_study, Domain, PointSet, WendlandKernel};

fn build_set(n_interior: usize, d: usize) -> PointSet {
    let domain = Domain::unit_cube(d).unwrap();
    let interior = generate_halton(n_interior, &domain, 0).unwrap();
    let boundary = generate_boundary(&domain, matched_per_face(n_interior, d)).unwrap();
    PointSet::new(interior, boundary, &domain, DEFAULT_PROBE_COUNT).unwrap()
}

fn manufactured_system(
    n_interior: usize,
    d: usize,
    delta: f64,
) -> (WendlandKernel, PointSet, rbfq::CollocationSystem) {
    let kernel = WendlandKernel::new(d, 2).unwrap();
    let points = build_set(n_interior, d);
    let mut system = assemble_collocation(&kernel, &points, delta).unwrap();
    system.b = assemble_rhs(manufactured_f, manufactured_g, &points, delta).unwrap();
    (kernel, points, system)
}

#[test]
fn cg_agrees_with_the_direct_factorization() {
    let (_, _, system) = manufactured_system(20, 1, 0.3);
    let tol = 1e-12;
    let (x_cg, _, residual) = conjugate_gradient(&system.a, &system.b, tol, 10_000).unwrap();
    let x_direct = dense_solve(&system.a, &system.b).unwrap();
    assert!(residual <= tol);
    let kappa = condition_number(&system.a).unwrap();
    // A residual of tol certifies the solution only up to a kappa factor.
    let rel = (&x_cg - &x_direct).norm() / x_direct.norm();
    assert!(
        rel <= 10.0 * tol * kappa,
        "CG differs from the factorization by {rel:.3e} (kappa {kappa:.3e})"
    );
}

#[test]
fn cg_iterations_respect_the_square_root_law() {
    let tol = 1e-8;
    for (n_interior, delta) in [(20usize, 0.15), (40, 0.1), (40, 0.3), (80, 0.2)] {
        let (_, _, system) = manufactured_system(n_interior, 1, delta);
        let kappa = condition_number(&system.a).unwrap();
        let (_, iterations, _) = conjugate_gradient(&system.a, &system.b, tol, 200_000).unwrap();
        let bound = 0.5 * kappa.sqrt() * (2.0 / tol).ln();
        assert!(
            (iterations as f64) <= bound,
            "n={n_interior} delta={delta}: {iterations} iterations vs bound {bound:.0} \
             (kappa {kappa:.3e})"
        );
    }
}

fn convergence_config(d: usize, delta_rule: DeltaRule, beta: f64) -> StudyConfig {
    StudyConfig {
        schema: 1,
        d,
        k: 2,
        beta,
        h_ladder: vec![0.2, 0.1, 0.05, 0.025],
        delta_rule,
        eps: 1e-3,
        solver: Default::default(),
        seed_skip: 0,
        n_interior: None,
        delta_ladder: None,
        n_ladder: None,
        output_dir: None,
    }
}

#[test]
fn fixed_support_convergence_rate_d1() {
    let config = convergence_config(1, DeltaRule::Fixed { delta: 0.9 }, 3.0);
    let report = run_convergence_study(&config).unwrap();
    let slope = report.fitted_slope.unwrap();
    assert!(slope >= 1.25, "fixed-support slope {slope:.3}");
}

#[test]
fn scaled_support_convergence_tracks_beta() {
    for beta in [3.0, 4.0] {
        let config = convergence_config(1, DeltaRule::Scaled, beta);
        let report = run_convergence_study(&config).unwrap();
        let slope = report.fitted_slope.unwrap();
        assert!(
            (slope - (beta - 2.0)).abs() <= 0.75,
            "beta={beta}: scaled-support slope {slope:.3}"
        );
    }
}

#[test]
fn evaluation_matrix_agrees_with_direct_summation() {
    let (kernel, points, system) = manufactured_system(16, 1, 0.35);
    let evaluation = assemble_evaluation(&kernel, &points, 0.35).unwrap();
    let c = dense_solve(&system.a, &system.b).unwrap();
    let u_bar = &evaluation.m * &c;
    let scale = u_bar.amax();
    let all: Vec<&Vec<f64>> = points.interior.iter().chain(&points.boundary).collect();
    for (i, x) in all.iter().enumerate() {
        let direct = evaluate_solution_at(&kernel, &points, &c, 0.35, x).unwrap();
        assert!(
            (direct - u_bar[i]).abs() <= 1e-10 * scale,
            "node {i}: direct {direct} vs matrix {}",
            u_bar[i]
        );
    }
}

#[test]
fn midpoint_evaluation_stays_near_the_manufactured_solution() {
    let (kernel, points, system) = manufactured_system(40, 1, 0.9);
    let c = dense_solve(&system.a, &system.b).unwrap();
    let x = [0.5];
    let u = evaluate_solution_at(&kernel, &points, &c, 0.9, &x).unwrap();
    assert!(
        (u - 1.0).abs() < 5e-2,
        "u(0.5) = {u} vs manufactured peak 1"
    );
}
