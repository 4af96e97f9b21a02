use std::f64::consts::PI;

use ellric_core::classify::{
    build_family7, build_lame, classify, rank1_group, ClassifyConfig, DifferenceEquation, GroupShape, Rank1Group,
};
use ellric_core::riccati::RiccatiOutcome;
use ellric_core::{EllipticCoefficient, LatticeSpec, ThetaQuotient, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn sq() -> LatticeSpec {
    LatticeSpec::unit(c(0.0, 1.0)).unwrap()
}

const H: C64 = C64::new(0.31, 0.17);

fn assumption(v: &ellric_core::GaloisVerdict, kind: &str) -> (u32, bool) {
    let a = v.assumptions.iter().find(|a| a.kind == kind).expect(kind);
    (a.bound, a.passed)
}

#[test]
fn lame_is_gl2() {
    let cfg = ClassifyConfig::default();
    let eq = build_lame(c(1.0, 0.0), c(0.0, 0.0), H, &sq(), cfg.eval()).unwrap();
    let v = classify(&eq, &cfg).unwrap();
    assert_eq!(v.shape.render(), "GL2");
    assert!(matches!(v.first, Some(RiccatiOutcome::NoSolutionCertificate { .. })));
    assert!(matches!(v.imprimitivity, Some(RiccatiOutcome::NoSolutionCertificate { .. })));
    match v.rank1.as_ref().map(|r| r.group) {
        Some(Rank1Group::FullTorus(n)) => assert!(n >= 24),
        other => panic!("{other:?}"),
    }
    assert_eq!(assumption(&v, "torsion"), (64, true));
    assert_eq!(assumption(&v, "independence"), (8, true));
}

#[test]
fn family7_orders() {
    let cfg = ClassifyConfig::default();
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    for (b, want) in [
        (w, GroupShape::DetConstrained(Rank1Group::Finite(3))),
        (c(2.0, 0.0), GroupShape::DetConstrained(Rank1Group::FullTorus(24))),
    ] {
        let eq = build_family7(b, c(1.0, 0.0), c(0.0, 0.0), H, &sq(), cfg.eval()).unwrap();
        let v = classify(&eq, &cfg).unwrap();
        assert_eq!(v.shape, want);
        // z0 is the half-period (1 + i)/2 and 50h = 15.5 + 8.5i, so the bounded
        // check finds d = 50, l = 1 and reports it.
        assert_eq!(assumption(&v, "independence"), (16, false));
    }
}

#[test]
fn reducible_instance_has_unit_witness() {
    let l = sq();
    let a = EllipticCoefficient::WpLinear { alpha: c(1.0, 0.0), beta: c(0.0, 0.0), lattice: l };
    let b = EllipticCoefficient::WpLinear { alpha: c(-1.0, 0.0), beta: c(-1.0, 0.0), lattice: l };
    let v = classify(&DifferenceEquation::new(l, H, a, b), &ClassifyConfig::default()).unwrap();
    assert!(matches!(v.shape, GroupShape::ReducibleNotCompletelyReducible | GroupShape::CompletelyReducibleNonScalar));
    let first = v.first.unwrap();
    let one = first.solutions().iter().find(|s| s.divisor.is_zero() && (s.constant - 1.0).norm() < 1e-8);
    assert!(one.expect("u = 1").max_residual <= 1e-8);
}

#[test]
fn constant_equation_is_completely_reducible() {
    let l = sq();
    let eq = DifferenceEquation::new(
        l,
        H,
        EllipticCoefficient::Constant(c(0.0, 0.0)),
        EllipticCoefficient::Constant(c(1.0, 0.0)),
    );
    let v = classify(&eq, &ClassifyConfig::default()).unwrap();
    assert_eq!(v.shape, GroupShape::CompletelyReducibleNonScalar);
    assert_eq!(v.first.unwrap().solutions().len(), 2);
}

#[test]
fn rank1_reference_values() {
    let cfg = ClassifyConfig::default();
    let r = rank1_group(&EllipticCoefficient::Constant(c(0.0, 1.0)), H, &sq(), 64, &cfg).unwrap();
    assert_eq!(r.group, Rank1Group::Finite(4));
    let r = rank1_group(&EllipticCoefficient::Constant(c(2.0, 0.0)), H, &sq(), 64, &cfg).unwrap();
    assert_eq!(r.group, Rank1Group::FullTorus(64));
}

#[test]
fn rank1_coboundary_witness_telescopes() {
    let cfg = ClassifyConfig::default();
    let l = sq();
    // Weights 0 (g elliptic) and 1/4 (g elliptic only at level 4).
    for omega in [c(0.0, 0.0), c(0.25, 0.0)] {
        let pole = (c(0.83, 0.38) - omega) / 2.0;
        let g = ThetaQuotient::new(&l, c(1.0, 0.0), vec![(c(0.12, 0.33), 1), (c(0.71, 0.05), 1), (pole, -2)]);
        let b = g.phi_shift(H).multiply(&g.invert()).unwrap();
        let r = rank1_group(&EllipticCoefficient::Quotient(b.clone()), H, &l, 24, &cfg).unwrap();
        assert_eq!(r.group, Rank1Group::Finite(1), "weight {omega}");
        let w = r.witness.unwrap();
        assert!(w.residual <= 1e-8);
        for z in [c(0.21, 0.77), c(0.55, 0.14), c(0.9, 0.45)] {
            let lhs = b.evaluate(z, cfg.eval()).unwrap().powi(w.power as i32);
            let rhs = w.evaluate(z + H, cfg.eval()).unwrap() / w.evaluate(z, cfg.eval()).unwrap();
            assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rank1_order_of_roots_of_unity(n in 1u32..=24, j in 1u32..24) {
        prop_assume!(gcd(j, n) == 1 || n == 1);
        let cfg = ClassifyConfig::default();
        let b = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
        let r = rank1_group(&EllipticCoefficient::Constant(b), H, &sq(), 24, &cfg).unwrap();
        prop_assert_eq!(r.group, Rank1Group::Finite(n));
        // Powers divide the order.
        let m = 1 + j % 5;
        let r = rank1_group(&EllipticCoefficient::Constant(b.powi(m as i32)), H, &sq(), 24, &cfg).unwrap();
        prop_assert_eq!(r.group, Rank1Group::Finite(n / gcd(n, m)));
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn rendering_table() {
    for k in 1..=6u32 {
        assert_eq!(GroupShape::DetConstrained(Rank1Group::Finite(k)).render(), format!("mu_{}.SL2", 2 * k));
    }
    assert_eq!(GroupShape::DetConstrained(Rank1Group::FullTorus(24)).render(), "GL2");
    assert_eq!(GroupShape::Imprimitive.render(), "imprimitive");
    assert!(!GroupShape::Unresolved(String::from("x")).is_definite());
}

/// `a = −(c₁ + c₂)`, `b = c₁c₂` has the constant solutions `c₁` and `c₂`.
fn from_roots(c1: C64, c2: C64) -> DifferenceEquation {
    DifferenceEquation::new(sq(), H, EllipticCoefficient::Constant(-(c1 + c2)), EllipticCoefficient::Constant(c1 * c2))
}

#[test]
fn distinct_roots_split_and_a_double_root_does_not() {
    let cfg = ClassifyConfig::default();
    let v = classify(&from_roots(c(2.0, 0.0), c(-0.5, 1.0)), &cfg).unwrap();
    assert_eq!(v.shape, GroupShape::CompletelyReducibleNonScalar);
    let v = classify(&from_roots(c(1.5, -0.5), c(1.5, -0.5)), &cfg).unwrap();
    assert_eq!(v.shape, GroupShape::ReducibleNotCompletelyReducible);
    let sols = v.first.unwrap();
    assert_eq!(sols.solutions().len(), 1);
    assert!((sols.solutions()[0].constant - c(1.5, -0.5)).norm() < 1e-8);
}
