use std::f64::consts::PI;

use gordon_cmv::minmax::{min_max_norm, min_max_norm_grid, Mat2};
use gordon_cmv::transfer::{
    block_product, certify_gordon, evidence_at_period, gordon_lower_bound, no_point_spectrum_evidence, szego_matrix,
    unit_circle_point, validate_lipschitz, Verdict,
};
use gordon_cmv::VerblunskySequence;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random 2x2 matrix with `|det| = 1`, condition number up to about `e^{2 * spread}`.
fn unit_det_matrix(rng: &mut ChaCha8Rng, spread: f64) -> Mat2 {
    let mut g = || c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    let m = Mat2::new(g(), g(), g(), g());
    let det = m.determinant();
    let m = m / det.sqrt();
    let s = (spread * rng.gen::<f64>()).exp();
    let phase = unit_circle_point(2.0 * PI * rng.gen::<f64>());
    let d = Mat2::new(c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), phase / s);
    m * d
}

#[test]
fn exact_minmax_agrees_with_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let a = unit_det_matrix(&mut rng, 2.0);
        let blocks = [a, a * a, a.try_inverse().unwrap()];
        let m = min_max_norm(&blocks);
        assert!(m.resolved);
        let exact = m.value;
        let grid = min_max_norm_grid(&blocks, 1024);
        // the grid evaluates real points, so it can never undercut the exact minimum
        assert!(exact <= grid + 1e-12, "{exact} > {grid}");
        // closeness is a diagnostic of the refinement only
        assert!(grid - exact <= 1e-3 * grid, "{grid} vs {exact}");
        assert!(exact >= 0.5 - 1e-9);
    }
}

#[test]
fn periodic_sequence_blocks_repeat() {
    let vals = [c(0.3, 0.1), c(-0.2, 0.4), c(0.5, 0.0), c(0.0, -0.6)];
    let s = VerblunskySequence::from_fn(-8, 15, |n| vals[n.rem_euclid(4) as usize]).unwrap();
    let z = unit_circle_point(0.9);
    let a = block_product(&s, z, 0, 4).unwrap();
    let b = block_product(&s, z, 4, 8).unwrap();
    assert_eq!(a, b);
    let ev = evidence_at_period(&s, 4, 128).unwrap();
    assert!(ev.min_c >= 0.5 - 1e-12);
    let cert = certify_gordon(&s, &[(1, 4)]).unwrap();
    assert_eq!(cert.levels[0].measured_defect, 0.0);
    assert!(cert.all_pass());
}

#[test]
fn free_case_evidence_is_exactly_one() {
    let s = VerblunskySequence::constant(c(0.0, 0.0), -20, 20).unwrap();
    let cert = certify_gordon(&s, &[(1, 2), (2, 4), (3, 8)]).unwrap();
    let ev = no_point_spectrum_evidence(&s, &cert, 512).unwrap();
    assert_eq!(ev.q, 8);
    assert_eq!(ev.min_c, 1.0);
    assert_eq!(ev.verdict, Verdict::Pass);
}

#[test]
fn impurity_control_dips_below_threshold() {
    // gapped background 0.6 with impurity 0.6i at the origin: bound state near angle 1.0808
    let s = VerblunskySequence::impurity(c(0.6, 0.0), 0, c(0.0, 0.6), -20, 20).unwrap();
    let ev = evidence_at_period(&s, 4, 512).unwrap();
    assert_eq!(ev.verdict, Verdict::Fail);
    assert!((ev.min_c_exact - 0.1405).abs() < 5e-4, "{}", ev.min_c_exact);
    assert!(ev.min_c <= ev.min_c_exact);
    assert_eq!(ev.points_below_threshold, 5);
    let ev8 = evidence_at_period(&s, 8, 512).unwrap();
    assert!((ev8.min_c_exact - 0.0855).abs() < 5e-4, "{}", ev8.min_c_exact);
    assert!((ev8.argmin_angle.abs() - 1.0799).abs() < 2e-3, "{}", ev8.argmin_angle);
}

#[test]
fn lipschitz_bound_holds_on_samples() {
    for r in [0.0, 0.5, 0.9] {
        let v = validate_lipschitz(r, 3000, 11).unwrap();
        assert_eq!(v.violations, 0, "r = {r}");
        assert!(v.max_ratio <= v.bound);
        assert!(v.max_ratio > 0.1 * v.bound, "sampling should come near the bound");
    }
}

#[test]
fn determinant_of_long_product() {
    // constant 0.3 with z inside the band (|angle| > 2 asin 0.3): products stay bounded
    let s = VerblunskySequence::constant(c(0.3, 0.0), 0, 9999).unwrap();
    let z = unit_circle_point(2.0);
    let p = block_product(&s, z, 0, 10_000).unwrap();
    let err = (p.determinant() - z.powu(10_000)).norm();
    assert!(err <= 1e-12, "{err}");
    // small random coefficients: error budget scales with |P|^2
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let alpha = (0..10_000)
        .map(|_| Complex64::from_polar(0.02 * rng.gen::<f64>(), 6.3 * rng.gen::<f64>()))
        .collect();
    let s = VerblunskySequence::new(0, alpha).unwrap();
    let p = block_product(&s, z, 0, 10_000).unwrap();
    let err = (p.determinant() - z.powu(10_000)).norm();
    assert!(err <= 1e-12 * gordon_cmv::minmax::op_norm(&p).powi(2).max(1.0), "{err}");
}

#[test]
fn lower_bound_is_continuous_in_z() {
    let s = VerblunskySequence::impurity(c(0.6, 0.0), 0, c(0.0, 0.6), -20, 20).unwrap();
    let fine = evidence_at_period(&s, 4, 1024).unwrap();
    let coarse = evidence_at_period(&s, 4, 512).unwrap();
    assert!((fine.min_c - coarse.min_c).abs() < 0.1 * coarse.min_c);
    assert_eq!(coarse.coarse_min_c, evidence_at_period(&s, 4, 256).unwrap().min_c);
}

proptest! {
    #[test]
    fn szego_determinant_is_z(r in 0.0f64..0.999, a in 0.0f64..6.3, t in 0.0f64..6.3) {
        let z = unit_circle_point(t);
        let s = szego_matrix(Complex64::from_polar(r, a), z).unwrap();
        prop_assert!((s.determinant() - z).norm() <= 1e-14 * (1.0 / (1.0 - r)).max(1.0));
    }

    #[test]
    fn gordon_lower_bound_on_periodic_is_half(
        re in proptest::collection::vec(-0.6f64..0.6, 4),
        im in proptest::collection::vec(-0.6f64..0.6, 4),
        t in 0.0f64..6.3,
    ) {
        let vals: Vec<Complex64> = re.iter().zip(&im).map(|(&x, &y)| c(x, y)).collect();
        let s = VerblunskySequence::from_fn(-8, 15, |n| vals[n.rem_euclid(4) as usize]).unwrap();
        let b = gordon_lower_bound(&s, 4, unit_circle_point(t)).unwrap();
        prop_assert!(b.c >= 0.5 - 1e-9);
        prop_assert!(b.eta < 1e-9 * b.norm_plus_plus.max(1.0));
    }
}
