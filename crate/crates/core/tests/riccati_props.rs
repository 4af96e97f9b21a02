use ellric_core::classify::{build_family7, build_lame, DifferenceEquation};
use ellric_core::divisor::enumerate_subdivisors;
use ellric_core::riccati::{
    build_first_riccati, build_imprimitivity_riccati, enumerate_for_bounds, reverify, solve, RiccatiOutcome,
};
use ellric_core::{Divisor, EllipticCoefficient, EvalConfig, LatticeSpec, RiccatiCandidate, RiccatiConfig, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn sq() -> LatticeSpec {
    LatticeSpec::unit(c(0.0, 1.0)).unwrap()
}

const H: C64 = C64::new(0.31, 0.17);

/// Independent exhaustive loop over `0 ≤ p ≤ P`, `0 ≤ q ≤ Q`, `0 ≤ d ≤ d_max`.
fn brute_force(p_bound: &Divisor, q_bound: &Divisor, step: C64, d_max: u32) -> Vec<RiccatiCandidate> {
    let l = *p_bound.lattice();
    let qs: Vec<Divisor> = enumerate_subdivisors(q_bound, 1e7).unwrap().collect();
    let mut out = Vec::new();
    for p in enumerate_subdivisors(p_bound, 1e7).unwrap() {
        for q in &qs {
            if p.degree() != q.degree() {
                continue;
            }
            let w = p.sub(q).unwrap().weight();
            for d in 0..=d_max {
                if w == l.reduce(step * d as f64) {
                    out.push(RiccatiCandidate { p_div: p.clone(), q_div: q.clone(), deg_r: d });
                }
            }
        }
    }
    out
}

fn same_multiset(a: &[RiccatiCandidate], b: &[RiccatiCandidate]) -> bool {
    a.len() == b.len() && a.iter().all(|x| a.iter().filter(|y| *y == x).count() == b.iter().filter(|y| *y == x).count())
}

/// Bounds drawn from a small pool of related points, so that congruences
/// actually occur: multiples of the step, a point and its negative, and
/// the half-periods of the level-2 lattice.
fn bounds() -> impl Strategy<Value = (Divisor, Divisor)> {
    let pool = prop::collection::vec((0usize..9, 1i32..=2), 0..4);
    (pool.clone(), pool).prop_filter_map("total degree at most 6", |(ps, qs)| {
        let l = sq().at_level(2);
        let y = c(0.23, 0.41);
        let at = |i: usize| match i {
            0 => c(0.0, 0.0),
            1 => H,
            2 => H * 2.0,
            3 => y,
            4 => -y,
            5 => y - H,
            6 => c(1.0, 0.0),
            7 => c(0.0, 1.0),
            _ => c(1.0, 1.0) + H,
        };
        let p = Divisor::from_points(&l, ps.iter().map(|&(i, m)| (at(i), m)));
        let q = Divisor::from_points(&l, qs.iter().map(|&(i, m)| (at(i), m)));
        (p.degree() + q.degree() <= 6).then_some((p, q))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn enumeration_matches_brute_force((p, q) in bounds()) {
        let fast = enumerate_for_bounds(&p, &q, H, 8, 1e7).unwrap();
        let slow = brute_force(&p, &q, H, 8);
        prop_assert!(same_multiset(&fast, &slow), "{} vs {} candidates", fast.len(), slow.len());
    }

    #[test]
    fn enlarging_bounds_never_loses_candidates((p, q) in bounds(), (extra_p, extra_q) in bounds()) {
        let small = enumerate_for_bounds(&p, &q, H, 8, 1e7).unwrap();
        let big = enumerate_for_bounds(&p.join(&extra_p).unwrap(), &q.join(&extra_q).unwrap(), H, 8, 1e7).unwrap();
        for cand in &small {
            prop_assert!(big.contains(cand));
        }
    }
}

#[test]
fn empty_bounds_leave_the_constant_candidate() {
    let l = sq().at_level(2);
    let z = Divisor::zero(&l);
    let got = enumerate_for_bounds(&z, &z, H, 32, 1e7).unwrap();
    assert_eq!(got, vec![RiccatiCandidate { p_div: z.clone(), q_div: z, deg_r: 0 }]);
}

#[test]
fn constant_equation_has_exactly_two_solutions() {
    let eq = DifferenceEquation::new(
        sq(),
        H,
        EllipticCoefficient::Constant(c(0.0, 0.0)),
        EllipticCoefficient::Constant(c(1.0, 0.0)),
    );
    let prob = build_first_riccati(&eq, &EvalConfig::default()).unwrap();
    let out = solve(&prob, &RiccatiConfig::default()).unwrap();
    let consts: Vec<C64> = out.solutions().iter().map(|s| s.constant).collect();
    assert_eq!(consts.len(), 2);
    assert!(consts.iter().any(|x| (x - c(0.0, 1.0)).norm() < 1e-12));
    assert!(consts.iter().any(|x| (x - c(0.0, -1.0)).norm() < 1e-12));
}

#[test]
fn reducible_solution_survives_fresh_samples() {
    let l = sq();
    let a = EllipticCoefficient::WpLinear { alpha: c(1.0, 0.0), beta: c(0.0, 0.0), lattice: l };
    let b = EllipticCoefficient::WpLinear { alpha: c(-1.0, 0.0), beta: c(-1.0, 0.0), lattice: l };
    let prob = build_first_riccati(&DifferenceEquation::new(l, H, a, b), &EvalConfig::default()).unwrap();
    let cfg = RiccatiConfig::default();
    let out = solve(&prob, &cfg).unwrap();
    assert!(!out.solutions().is_empty());
    for s in out.solutions() {
        assert!(s.max_residual <= cfg.tol_res);
        assert!(reverify(&prob, &s.u, &cfg, 0xdead_beef).unwrap() <= cfg.tol_res);
    }
    assert!(out.solutions().iter().any(|s| s.divisor.is_zero() && (s.constant - 1.0).norm() < 1e-8));
}

#[test]
fn lame_imprimitivity_divisors() {
    let cfg = EvalConfig::default();
    let eq = build_lame(c(1.0, 0.0), c(0.0, 0.0), H, &sq(), &cfg).unwrap();
    let z0 = eq.independence.as_ref().unwrap().z0;
    let prob = build_imprimitivity_riccati(&eq, &cfg).unwrap();
    let l = sq();
    let p2 = Divisor::from_points(&l, [(-H * 2.0, 2), (z0, 1), (-z0, 1), (z0 - H, 1), (-z0 - H, 1)]);
    let p3 = Divisor::from_points(&l, [(-H * 2.0, 2), (-H, 2), (c(0.0, 0.0), 2)]);
    assert_eq!(prob.p2_base, p2);
    assert_eq!(prob.p3_base, p3);
    assert_eq!(prob.p2, p2.lift(2).unwrap());
}

#[test]
fn family7_bounds() {
    let cfg = EvalConfig::default();
    let eq = build_family7(c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), H, &sq(), &cfg).unwrap();
    let z0 = eq.independence.as_ref().unwrap().z0;
    let l = sq();
    let first = build_first_riccati(&eq, &cfg).unwrap();
    assert_eq!(first.p2, Divisor::point(&l, c(0.0, 0.0), 2).lift(2).unwrap());
    assert_eq!(first.q_bound, Divisor::point(&l, H, 2).lift(2).unwrap());
    let second = build_imprimitivity_riccati(&eq, &cfg).unwrap();
    let p3 = Divisor::from_points(&l, [(-H, 2), (z0, 2), (-z0, 2), (z0 - H * 2.0, 1), (-z0 - H * 2.0, 1)]);
    assert_eq!(second.p3_base, p3);
}

#[test]
fn lame_first_pass_is_certified() {
    let cfg = EvalConfig::default();
    let eq = build_lame(c(1.0, 0.0), c(0.0, 0.0), H, &sq(), &cfg).unwrap();
    let prob = build_first_riccati(&eq, &cfg).unwrap();
    let out = solve(&prob, &RiccatiConfig::default()).unwrap();
    assert!(matches!(out, RiccatiOutcome::NoSolutionCertificate { refuted: 1, .. }), "{}", out.tag());
}

#[test]
fn related_points_produce_nontrivial_candidates() {
    let l = sq().at_level(2);
    let y = c(0.23, 0.41);
    let p = Divisor::from_points(&l, [(y, 1), (-y, 1), (H * 2.0, 1)]);
    let q = Divisor::from_points(&l, [(c(0.0, 0.0), 2), (H, 1)]);
    let fast = enumerate_for_bounds(&p, &q, H, 4, 1e7).unwrap();
    assert!(same_multiset(&fast, &brute_force(&p, &q, H, 4)));
    let want = RiccatiCandidate {
        p_div: Divisor::from_points(&l, [(y, 1), (-y, 1)]),
        q_div: Divisor::point(&l, c(0.0, 0.0), 2),
        deg_r: 0,
    };
    assert!(fast.contains(&want));
    let shifted = RiccatiCandidate { p_div: Divisor::point(&l, H * 2.0, 1), q_div: Divisor::point(&l, H, 1), deg_r: 1 };
    assert!(fast.contains(&shifted));
}
