//! Determinism, budget scaling, and quasi-uniformity of the Halton point
//! sets. The d = 2 and d = 3 quasi-uniformity ladders fail today: raw Halton
//! sequences place interior points arbitrarily close to the boundary faces
//! (the first coordinate takes values 1/2^m), so h/q grows with N instead of
//! staying bounded. See the README for the analysis.

use proptest::prelude::*;
use rbfq::points::{
    generate_boundary, generate_halton, matched_per_face, DEFAULT_PROBE_COUNT,
};
use rbfq::study::fit_loglog_slope;
use rbfq::{Domain, PointSet};

fn build_set(n_interior: usize, d: usize) -> PointSet {
    let domain = Domain::unit_cube(d).unwrap();
    let interior = generate_halton(n_interior, &domain, 0).unwrap();
    let boundary = generate_boundary(&domain, matched_per_face(n_interior, d)).unwrap();
    PointSet::new(interior, boundary, &domain, DEFAULT_PROBE_COUNT).unwrap()
}

#[test]
fn regeneration_is_bit_identical() {
    for d in [1usize, 2, 3] {
        let a = build_set(40, d);
        let b = build_set(40, d);
        assert_eq!(a.interior, b.interior, "d={d} interior points drifted");
        assert_eq!(a.boundary, b.boundary, "d={d} boundary points drifted");
        assert_eq!(a.h.to_bits(), b.h.to_bits(), "d={d} fill distance drifted");
        assert_eq!(a.q.to_bits(), b.q.to_bits(), "d={d} separation drifted");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn halton_generation_is_deterministic(
        count in 1usize..60,
        d in 1usize..=3,
        skip in 0usize..200,
    ) {
        let domain = Domain::unit_cube(d).unwrap();
        let a = generate_halton(count, &domain, skip).unwrap();
        let b = generate_halton(count, &domain, skip).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn point_budget_tracks_fill_distance() {
    // log N against log(1/h) should have slope d: halving h in d dimensions
    // costs 2^d times the points.
    for (d, ladder) in [
        (1usize, vec![32usize, 64, 128, 256, 512]),
        (2, vec![128, 256, 512, 1024, 2048]),
    ] {
        let mut inv_h = Vec::new();
        let mut totals = Vec::new();
        for n in ladder {
            let set = build_set(n, d);
            assert!(set.n_total() <= 4096);
            inv_h.push(1.0 / set.h);
            totals.push(set.n_total() as f64);
        }
        let slope = fit_loglog_slope(&inv_h, &totals).unwrap();
        assert!(
            (slope - d as f64).abs() <= 0.5,
            "d={d}: budget slope {slope:.3}"
        );
    }
}

fn quasi_uniformity_ladder(d: usize, ladder: &[usize]) {
    let ratios: Vec<f64> = ladder.iter().map(|&n| build_set(n, d).c_qu).collect();
    let worst = ratios.iter().fold(0.0f64, |m, &r| m.max(r));
    assert!(
        worst <= 20.0,
        "d={d}: c_qu over the ladder = {ratios:?}; worst {worst:.1} exceeds 20 \
         (Halton interior points land within O(1/N) of a face, so the \
         separation of the union collapses while h stays flat)"
    );
}

#[test]
fn quasi_uniformity_stays_bounded_d1() {
    quasi_uniformity_ladder(1, &[20, 40, 80, 160, 320]);
}

#[test]
fn quasi_uniformity_stays_bounded_d2() {
    quasi_uniformity_ladder(2, &[35, 70, 140, 280, 560]);
}

#[test]
fn quasi_uniformity_stays_bounded_d3() {
    quasi_uniformity_ladder(3, &[32, 64, 128, 256]);
}
