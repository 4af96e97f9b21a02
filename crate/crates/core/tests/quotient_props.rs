use std::f64::consts::PI;

use ellric_core::quotient::{elliptic_from_divisor, Product, ShiftedFactor};
use ellric_core::special::theta_k;
use ellric_core::{Divisor, EllipticCoefficient, EvalConfig, LatticeSpec, ThetaQuotient, C64};
use proptest::prelude::*;

fn e2pi(x: C64) -> C64 {
    (C64::new(0.0, 2.0 * PI) * x).exp()
}

fn lattice(level: u32) -> LatticeSpec {
    LatticeSpec::new(C64::new(0.3, 0.8), level).unwrap()
}

fn quotient() -> impl Strategy<Value = ThetaQuotient> {
    (1u32..=3, prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, -2i32..=2), 1..5), -2i64..=2, (0.5..2.0f64, -PI..PI))
        .prop_map(|(k, pts, twist, (r, arg))| {
            let l = lattice(k);
            let factors = pts.into_iter().filter(|p| p.2 != 0).map(|(s, t, m)| (l.from_coords(s, t), m)).collect();
            ThetaQuotient::with_twist(&l, C64::from_polar(r, arg), factors, twist)
        })
}

/// A degree-zero level-1 elliptic function with two zeros and two poles.
fn elliptic() -> impl Strategy<Value = ThetaQuotient> {
    ((0.05..0.95f64, 0.05..0.95f64), (0.05..0.95f64, 0.05..0.95f64), (0.05..0.95f64, 0.05..0.95f64)).prop_map(
        |(a, b, c)| {
            let l = lattice(1);
            let (x1, x2, y1) = (l.from_coords(a.0, a.1), l.from_coords(b.0, b.1), l.from_coords(c.0, c.1));
            let d = Divisor::from_points(&l, [(x1, 1), (x2, 1), (y1, -1), (x1 + x2 - y1, -1)]);
            elliptic_from_divisor(&d).unwrap()
        },
    )
}

fn sample(l: &LatticeSpec, i: usize) -> C64 {
    let g = 0.754_877_666_246_692_7;
    let s = (0.5 + g * i as f64).fract();
    let t = (0.5 + g * g * i as f64).fract();
    l.from_coords(s, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn monodromy_multiplier_law(q in quotient()) {
        let cfg = EvalConfig::default();
        let l = *q.lattice();
        let k = l.level() as f64;
        let (deg, omega) = q.monodromy_multiplier();
        let sign = if deg.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let predicted = e2pi(omega / k) * sign;
        let mut seen = Vec::new();
        for i in 0..40 {
            if seen.len() == 6 {
                break;
            }
            let z = sample(&l, i);
            let period = l.tau() * k;
            if q.near_support(z, 0.05) || q.near_support(z + period, 0.05) {
                continue;
            }
            let a = q.evaluate(z, &cfg).unwrap();
            let b = q.evaluate(z + period, &cfg).unwrap();
            let measured = b / a * e2pi(z * (deg as f64 / k));
            prop_assert!((measured - predicted).norm() <= 1e-7 * predicted.norm());
            seen.push(measured);
        }
        prop_assert!(seen.len() >= 3);
        let mean = seen.iter().sum::<C64>() / seen.len() as f64;
        let var = seen.iter().map(|m| (m - mean).norm_sqr()).sum::<f64>() / seen.len() as f64;
        prop_assert!(var.sqrt() <= 1e-8 * mean.norm());
    }

    #[test]
    fn phi_shift_is_translation(q in quotient(), (s, t) in (0.0..1.0f64, 0.0..1.0f64)) {
        let cfg = EvalConfig::default();
        let l = *q.lattice();
        let h = l.from_coords(s, t);
        let shifted = q.phi_shift(h);
        for i in 0..8 {
            let z = sample(&l, i);
            if q.near_support(z + h, 0.05) {
                continue;
            }
            let want = q.evaluate(z + h, &cfg).unwrap();
            let got = shifted.evaluate(z, &cfg).unwrap();
            prop_assert!((got - want).norm() <= 1e-9 * want.norm());
        }
    }

    #[test]
    fn principal_divisors_give_elliptic_functions(q in elliptic()) {
        prop_assert!(q.is_elliptic(1e-8, &EvalConfig::default()));
    }

    #[test]
    fn pole_bound_clears_every_pole(f in elliptic(), g in elliptic(), (s, t) in (0.05..0.95f64, 0.05..0.95f64)) {
        let cfg = EvalConfig { pole_guard: 1e-7, ..EvalConfig::default() };
        let l = lattice(1);
        let h = l.from_coords(s, t);
        let fa = EllipticCoefficient::Quotient(f.clone());
        let fb = EllipticCoefficient::Quotient(g.clone());
        let factor = |c: &EllipticCoefficient, shift: C64, power: i32| ShiftedFactor { base: c.clone(), shift, power };
        let one = C64::new(1.0, 0.0);
        let coeff = EllipticCoefficient::SumOfProducts(vec![
            Product { coeff: one, factors: vec![factor(&fb, h * 2.0, 1), factor(&fa, h * 2.0, -1)] },
            Product { coeff: -one, factors: vec![factor(&fa, h, 1)] },
        ]);
        let bound = coeff.pole_bound(&l, &cfg).unwrap();
        prop_assert!(bound.is_effective());
        // Every pole location of a summand, approached from two distances.
        let mut suspects: Vec<C64> = Vec::new();
        for (x, m) in g.factors().iter().chain(f.factors()) {
            if *m < 0 {
                suspects.push(*x);
            }
        }
        let mut probes = Vec::new();
        for (x, _) in f.factors() {
            probes.push(x - h * 2.0);
            probes.push(x - h);
        }
        for x in suspects {
            probes.push(x - h * 2.0);
            probes.push(x - h);
        }
        let cleared = |z: C64| -> Option<C64> {
            let mut v = coeff.evaluate(z, &cfg).ok()?;
            for (p, n) in bound.entries() {
                v *= theta_k(z - p.xi(), &l, &cfg).ok()?.powi(*n);
            }
            Some(v)
        };
        let dir = C64::from_polar(1.0, 0.7);
        let mut probed = 0;
        for x in probes {
            let (near, nearer) = (cleared(x + dir * 1e-3), cleared(x + dir * 1e-4));
            if let (Some(a), Some(b)) = (near, nearer) {
                prop_assert!(b.norm() <= 20.0 * a.norm() + 1e-6, "pole not cleared at {x}: {a} -> {b}");
                probed += 1;
            }
        }
        prop_assert!(probed > 0);
    }
}
