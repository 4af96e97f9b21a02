//! The acceptance criteria as runnable checks, shared by `ellric selftest`
//! and the `acceptance` test target.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use ellric_core::classify::rank1_group;
use ellric_core::divisor::enumerate_subdivisors;
use ellric_core::riccati::{build_imprimitivity_riccati, enumerate_for_bounds};
use ellric_core::sampling::Sampler;
use ellric_core::special::{theta, theta_k, theta_triple_product, wp_k, wp_k_prime};
use ellric_core::{
    build_lame, ClassifyConfig, Divisor, EllipticCoefficient, EvalConfig, LatticeSpec, Rank1Group, RiccatiCandidate,
    ThetaQuotient, C64,
};

use crate::classify_document;
use crate::doc::{from_c64, CoefficientSpec, ProblemDocument, VerdictDocument, SCHEMA_VERSION};

type Outcome = Result<String, String>;

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub limit: Duration,
    pub run: fn(u64) -> Outcome,
}

pub struct Report {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
}

impl Report {
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {} ({:.2}s, limit {}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs(),
            self.detail
        )
    }
}

const H: C64 = C64::new(0.31, 0.17);
const I: C64 = C64::new(0.0, 1.0);

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "theta functional equations", limit: secs(1), run: theta_functional },
        Criterion { id: 2, name: "triple product matches the series", limit: secs(1), run: triple_product },
        Criterion { id: 3, name: "theta_k functional equation, k = 2, 3", limit: secs(1), run: theta_k_functional },
        Criterion { id: 4, name: "wp_2 addition formula", limit: secs(2), run: wp2_addition },
        Criterion { id: 5, name: "monodromy multiplier law", limit: secs(5), run: monodromy },
        Criterion { id: 6, name: "Lame imprimitivity divisors", limit: secs(1), run: lame_divisors },
        Criterion { id: 7, name: "discrete Lame is GL2", limit: secs(60), run: lame_gl2 },
        Criterion { id: 8, name: "family 7 verdicts", limit: secs(120), run: family7 },
        Criterion { id: 9, name: "constructed reducible instance", limit: secs(30), run: reducible },
        Criterion { id: 10, name: "constant case", limit: secs(5), run: constant_case },
        Criterion { id: 11, name: "rank-one group", limit: secs(5), run: rank1 },
        Criterion { id: 12, name: "enumeration matches brute force", limit: secs(10), run: brute_force_oracle },
        Criterion { id: 13, name: "deterministic verdict documents", limit: secs(120), run: determinism },
    ]
}

/// Runs the criteria whose id passes `keep`.
pub fn run(seed: u64, keep: impl Fn(u32) -> bool, mut each: impl FnMut(&Report)) -> Vec<Report> {
    let mut out = Vec::new();
    for c in criteria().into_iter().filter(|c| keep(c.id)) {
        let start = Instant::now();
        let res = (c.run)(seed);
        let elapsed = start.elapsed();
        let (ok, detail) = match res {
            Ok(d) => (elapsed <= c.limit, d),
            Err(d) => (false, d),
        };
        let report = Report { id: c.id, name: c.name, passed: ok, detail, elapsed, limit: c.limit };
        each(&report);
        out.push(report);
    }
    out
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn e2pi(x: C64) -> C64 {
    (C64::new(0.0, 2.0 * PI) * x).exp()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn taus() -> [C64; 2] {
    [I, C64::new(0.3, 0.8)]
}

/// Draws points of the strip-centred fundamental domain until `n` of them
/// pass `accept`, and returns the worst value of `residual` over them.
fn worst_over<F, A>(sampler: &mut Sampler, l: &LatticeSpec, n: usize, accept: A, residual: F) -> Result<f64, String>
where
    A: Fn(C64) -> bool,
    F: Fn(C64) -> Result<f64, ellric_core::Error>,
{
    let mut worst = 0.0f64;
    let mut taken = 0;
    for _ in 0..20 * n {
        if taken == n {
            break;
        }
        let (s, t) = (sampler.unit(), sampler.unit());
        let z = l.from_coords(s, t - 0.5);
        if !accept(z) {
            continue;
        }
        worst = worst.max(residual(z).map_err(|e| e.to_string())?);
        taken += 1;
    }
    ensure(taken == n, || format!("only {taken} of {n} samples usable"))?;
    Ok(worst)
}

fn theta_functional(seed: u64) -> Outcome {
    let cfg = EvalConfig::default();
    let mut sampler = Sampler::new(seed);
    let mut worst = 0.0f64;
    for tau in taus() {
        let l = LatticeSpec::unit(tau).map_err(|e| e.to_string())?;
        let nonzero = |z: C64| theta(z, &l, &cfg).map(|t| t.norm() > 1e-6).unwrap_or(false);
        worst = worst.max(worst_over(&mut sampler, &l, 100, nonzero, |z| {
            let t0 = theta(z, &l, &cfg)?;
            let periodic = rel(theta(z + 1.0, &l, &cfg)?, t0);
            let quasi = rel(theta(z + tau, &l, &cfg)?, -e2pi(-z) * t0);
            Ok(periodic.max(quasi))
        })?);
    }
    ensure(worst <= 1e-9, || format!("worst residual {worst:.2e}"))?;
    Ok(format!("worst residual {worst:.2e}"))
}

fn triple_product(seed: u64) -> Outcome {
    let cfg = EvalConfig::default();
    let mut sampler = Sampler::new(seed ^ 2);
    let mut worst = 0.0f64;
    for tau in taus() {
        let l = LatticeSpec::unit(tau).map_err(|e| e.to_string())?;
        let nonzero = |z: C64| theta(z, &l, &cfg).map(|t| t.norm() > 1e-6).unwrap_or(false);
        worst = worst.max(worst_over(&mut sampler, &l, 50, nonzero, |z| {
            Ok(rel(theta(z, &l, &cfg)?, theta_triple_product(z, &l, &cfg)?))
        })?);
    }
    ensure(worst <= 1e-9, || format!("worst residual {worst:.2e}"))?;
    Ok(format!("worst residual {worst:.2e}"))
}

fn theta_k_functional(seed: u64) -> Outcome {
    let cfg = EvalConfig::default();
    let mut sampler = Sampler::new(seed ^ 3);
    let mut worst = 0.0f64;
    for tau in taus() {
        for k in [2u32, 3] {
            let l = LatticeSpec::new(tau, k).map_err(|e| e.to_string())?;
            let kf = k as f64;
            let nonzero = |z: C64| theta_k(z, &l, &cfg).map(|t| t.norm() > 1e-6).unwrap_or(false);
            worst = worst.max(worst_over(&mut sampler, &l, 25, nonzero, |z| {
                let t0 = theta_k(z, &l, &cfg)?;
                let periodic = rel(theta_k(z + kf, &l, &cfg)?, t0);
                let quasi = rel(theta_k(z + tau * kf, &l, &cfg)?, -e2pi(-z / kf) * t0);
                Ok(periodic.max(quasi))
            })?);
        }
    }
    ensure(worst <= 1e-9, || format!("worst residual {worst:.2e}"))?;
    Ok(format!("worst residual {worst:.2e}"))
}

fn wp2_addition(seed: u64) -> Outcome {
    let cfg = EvalConfig::default();
    let mut sampler = Sampler::new(seed ^ 4);
    let l = LatticeSpec::new(I, 2).map_err(|e| e.to_string())?;
    let far = |w: C64| l.distance_to_lattice(w) > 0.02;
    let mut worst = 0.0f64;
    let mut taken = 0;
    while taken < 50 {
        let (z, h) = (sampler.point(&l), sampler.point(&l));
        if !(far(z) && far(h) && far(z + h) && far(z - h)) {
            continue;
        }
        let ev = || -> Result<f64, ellric_core::Error> {
            let (pz, ph) = (wp_k(z, &l, &cfg)?, wp_k(h, &l, &cfg)?);
            let (dz, dh) = (wp_k_prime(z, &l, &cfg)?, wp_k_prime(h, &l, &cfg)?);
            // ℘₂(z) = ℘(z/2): the slope is taken in the base variable.
            let slope = (dz - dh) * 2.0 / (pz - ph);
            Ok(rel(wp_k(z + h, &l, &cfg)?, slope * slope / 4.0 - pz - ph))
        };
        worst = worst.max(ev().map_err(|e| e.to_string())?);
        taken += 1;
    }
    ensure(worst <= 1e-7, || format!("worst residual {worst:.2e}"))?;
    Ok(format!("worst residual {worst:.2e}"))
}

fn monodromy(seed: u64) -> Outcome {
    let cfg = EvalConfig::default();
    let mut sampler = Sampler::new(seed ^ 5);
    let (mut worst, mut worst_sd) = (0.0f64, 0.0f64);
    for n in 0..50 {
        let k = 1 + (n % 3) as u32;
        let l = LatticeSpec::new(C64::new(0.3, 0.8), k).map_err(|e| e.to_string())?;
        let count = 1 + (sampler.unit() * 4.0) as usize;
        let factors: Vec<(C64, i32)> = (0..count)
            .map(|_| {
                let m = [-2, -1, 1, 2][(sampler.unit() * 4.0) as usize];
                (sampler.point(&l), m)
            })
            .collect();
        let twist = (sampler.unit() * 5.0) as i64 - 2;
        let constant = C64::from_polar(0.5 + 1.5 * sampler.unit(), PI * (2.0 * sampler.unit() - 1.0));
        let q = ThetaQuotient::with_twist(&l, constant, factors, twist);
        let kf = k as f64;
        let (deg, omega) = q.monodromy_multiplier();
        let sign = if deg.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let predicted = e2pi(omega / kf) * sign;
        let period = l.tau() * kf;
        let mut seen = Vec::new();
        for _ in 0..60 {
            if seen.len() == 6 {
                break;
            }
            let z = sampler.point(&l);
            if q.near_support(z, 0.05) || q.near_support(z + period, 0.05) {
                continue;
            }
            let a = q.evaluate(z, &cfg).map_err(|e| e.to_string())?;
            let b = q.evaluate(z + period, &cfg).map_err(|e| e.to_string())?;
            let measured = b / a * e2pi(z * (deg as f64 / kf));
            worst = worst.max((measured - predicted).norm() / predicted.norm());
            seen.push(measured);
        }
        ensure(seen.len() >= 3, || format!("quotient {n}: too few usable samples"))?;
        let mean = seen.iter().sum::<C64>() / seen.len() as f64;
        let var = seen.iter().map(|m| (m - mean).norm_sqr()).sum::<f64>() / seen.len() as f64;
        worst_sd = worst_sd.max(var.sqrt() / mean.norm());
    }
    ensure(worst <= 1e-7 && worst_sd <= 1e-8, || format!("mismatch {worst:.2e}, spread {worst_sd:.2e}"))?;
    Ok(format!("mismatch {worst:.2e}, spread {worst_sd:.2e}"))
}

fn lame_divisors(_: u64) -> Outcome {
    let cfg = EvalConfig::default();
    let l = LatticeSpec::unit(I).map_err(|e| e.to_string())?;
    let eq = build_lame(C64::new(1.0, 0.0), C64::new(0.0, 0.0), H, &l, &cfg).map_err(|e| e.to_string())?;
    let z0 = eq.independence.as_ref().map(|i| i.z0).ok_or("no z0")?;
    let prob = build_imprimitivity_riccati(&eq, &cfg).map_err(|e| e.to_string())?;
    let zero = C64::new(0.0, 0.0);
    let p2 = Divisor::from_points(&l, [(-H * 2.0, 2), (z0, 1), (-z0, 1), (z0 - H, 1), (-z0 - H, 1)]);
    let p3 = Divisor::from_points(&l, [(-H * 2.0, 2), (-H, 2), (zero, 2)]);
    ensure(prob.p2_base == p2, || format!("div(p2) = {:?}", prob.p2_base))?;
    ensure(prob.p3_base == p3, || format!("div(p3) = {:?}", prob.p3_base))?;
    Ok(format!("div(p2) has {} points, div(p3) has {}", p2.len(), p3.len()))
}

fn lame_document() -> ProblemDocument {
    ProblemDocument::lame(C64::new(1.0, 0.0), C64::new(0.0, 0.0), H, I).expect("valid Lame parameters")
}

fn classify_doc(doc: &ProblemDocument, seed: u64) -> Result<VerdictDocument, String> {
    classify_document(doc, seed).map_err(|e| e.to_string())
}

fn assumption(v: &VerdictDocument, kind: &str) -> Option<(u32, bool)> {
    v.assumptions.iter().find(|a| a.kind == kind).map(|a| (a.bound, a.passed))
}

fn lame_gl2(seed: u64) -> Outcome {
    let v = classify_doc(&lame_document(), seed)?;
    ensure(v.group_rendering == "GL2", || format!("verdict {}", v.group_rendering))?;
    let certified = |o: &Option<crate::doc::OutcomeDoc>| o.as_ref().is_some_and(|o| o.tag == "no_solution_certificate");
    ensure(certified(&v.certificates.first), || "first pass not certified".into())?;
    ensure(certified(&v.certificates.imprimitivity), || "imprimitivity pass not certified".into())?;
    let r = v.certificates.rank1.as_ref().ok_or("no rank-one report")?;
    ensure(r.group == "full_torus" && r.value >= 24, || format!("rank one {} {}", r.group, r.value))?;
    ensure(assumption(&v, "torsion") == Some((64, true)), || "torsion assumption".into())?;
    ensure(assumption(&v, "independence") == Some((8, true)), || "independence assumption".into())?;
    Ok(format!("GL2, full torus up to {}", r.value))
}

fn family7(seed: u64) -> Outcome {
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut seen = Vec::new();
    for (b, want) in [(w, "mu_6.SL2"), (C64::new(2.0, 0.0), "GL2")] {
        let doc =
            ProblemDocument::family7(b, C64::new(1.0, 0.0), C64::new(0.0, 0.0), H, I).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let v = classify_doc(&doc, seed)?;
        ensure(start.elapsed() <= secs(60), || format!("b = {b}: {:.1}s", start.elapsed().as_secs_f64()))?;
        ensure(v.group_rendering == want, || format!("b = {b}: got {}, want {want}", v.group_rendering))?;
        seen.push(v.group_rendering);
    }
    Ok(seen.join(", "))
}

fn reducible(seed: u64) -> Outcome {
    let doc = ProblemDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        tau: from_c64(I),
        h: from_c64(H),
        a: CoefficientSpec::WpLinear { alpha: [1.0, 0.0], beta: [0.0, 0.0] },
        b: CoefficientSpec::WpLinear { alpha: [-1.0, 0.0], beta: [-1.0, 0.0] },
        options: Default::default(),
    };
    let v = classify_doc(&doc, seed)?;
    let tag = v.verdict.tag.as_str();
    ensure(tag == "reducible_not_completely" || tag == "completely_reducible_non_scalar", || format!("verdict {tag}"))?;
    let first = v.certificates.first.as_ref().ok_or("no first pass")?;
    let unit = first
        .solutions
        .iter()
        .find(|s| s.divisor.points.is_empty() && (s.constant[0] - 1.0).abs() < 1e-8 && s.constant[1].abs() < 1e-8)
        .ok_or("u = 1 not among the solutions")?;
    ensure(unit.max_residual <= 1e-8, || format!("residual {:.2e}", unit.max_residual))?;
    Ok(format!("{tag}, u = 1 with residual {:.2e}", unit.max_residual))
}

fn constant_case(seed: u64) -> Outcome {
    let doc = ProblemDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        tau: from_c64(I),
        h: from_c64(H),
        a: CoefficientSpec::Constant { value: [0.0, 0.0] },
        b: CoefficientSpec::Constant { value: [1.0, 0.0] },
        options: Default::default(),
    };
    let v = classify_doc(&doc, seed)?;
    ensure(v.verdict.tag == "completely_reducible_non_scalar", || format!("verdict {}", v.verdict.tag))?;
    let sols = &v.certificates.first.as_ref().ok_or("no first pass")?.solutions;
    ensure(sols.len() == 2, || format!("{} solutions", sols.len()))?;
    for want in [1.0, -1.0] {
        ensure(sols.iter().any(|s| s.constant[0].abs() < 1e-12 && (s.constant[1] - want).abs() < 1e-12), || {
            format!("missing {want}i")
        })?;
    }
    Ok("solutions +i and -i".into())
}

fn rank1(_: u64) -> Outcome {
    let cfg = ClassifyConfig::default();
    let l = LatticeSpec::unit(I).map_err(|e| e.to_string())?;
    let group = |b: EllipticCoefficient| rank1_group(&b, H, &l, 64, &cfg).map_err(|e| e.to_string());
    let r = group(EllipticCoefficient::Constant(I))?;
    ensure(r.group == Rank1Group::Finite(4), || format!("b = i gave {:?}", r.group))?;
    let r = group(EllipticCoefficient::Constant(C64::new(2.0, 0.0)))?;
    ensure(r.group == Rank1Group::FullTorus(64), || format!("b = 2 gave {:?}", r.group))?;
    let g = ThetaQuotient::new(
        &l,
        C64::new(1.0, 0.0),
        vec![(C64::new(0.12, 0.33), 1), (C64::new(0.71, 0.05), 1), (C64::new(0.415, 0.19), -2)],
    );
    let b = g.phi_shift(H).multiply(&g.invert()).map_err(|e| e.to_string())?;
    let r = group(EllipticCoefficient::Quotient(b))?;
    ensure(r.group == Rank1Group::Finite(1), || format!("coboundary gave {:?}", r.group))?;
    let w = r.witness.ok_or("no witness")?;
    ensure(w.residual <= 1e-8, || format!("witness residual {:.2e}", w.residual))?;
    Ok(format!("Finite(4), FullTorus(64), Finite(1) with residual {:.2e}", w.residual))
}

/// Independent triple loop over `0 ≤ p ≤ P`, `0 ≤ q ≤ Q`, `0 ≤ d ≤ d_max`.
fn brute_force(p_bound: &Divisor, q_bound: &Divisor, step: C64, d_max: u32) -> Result<Vec<RiccatiCandidate>, String> {
    let l = *p_bound.lattice();
    let qs: Vec<Divisor> = enumerate_subdivisors(q_bound, 1e7).map_err(|e| e.to_string())?.collect();
    let mut out = Vec::new();
    for p in enumerate_subdivisors(p_bound, 1e7).map_err(|e| e.to_string())? {
        for q in &qs {
            if p.degree() != q.degree() {
                continue;
            }
            let w = p.sub(q).map_err(|e| e.to_string())?.weight();
            for d in 0..=d_max {
                if w == l.reduce(step * d as f64) {
                    out.push(RiccatiCandidate { p_div: p.clone(), q_div: q.clone(), deg_r: d });
                }
            }
        }
    }
    Ok(out)
}

fn brute_force_oracle(seed: u64) -> Outcome {
    let l = LatticeSpec::new(I, 2).map_err(|e| e.to_string())?;
    let y = C64::new(0.23, 0.41);
    // Related points, so that congruences actually occur.
    let pool = [C64::new(0.0, 0.0), H, H * 2.0, y, -y, y - H, C64::new(1.0, 0.0), I, C64::new(1.0, 1.0) + H];
    let mut sampler = Sampler::new(seed ^ 12);
    let mut pick = |budget: usize| -> Vec<(C64, i32)> {
        let n = (sampler.unit() * (budget + 1) as f64) as usize;
        (0..n.min(3)).map(|_| (pool[(sampler.unit() * 9.0) as usize], 1 + (sampler.unit() * 2.0) as i32)).collect()
    };
    let (mut pairs, mut total) = (0, 0usize);
    while pairs < 100 {
        let p = Divisor::from_points(&l, pick(3));
        let q = Divisor::from_points(&l, pick(3));
        if p.degree() + q.degree() > 6 {
            continue;
        }
        let fast = enumerate_for_bounds(&p, &q, H, 8, 1e7).map_err(|e| e.to_string())?;
        let slow = brute_force(&p, &q, H, 8)?;
        let same = fast.len() == slow.len()
            && fast.iter().all(|x| fast.iter().filter(|y| *y == x).count() == slow.iter().filter(|y| *y == x).count());
        ensure(same, || format!("pair {pairs}: {} fast vs {} brute-force candidates", fast.len(), slow.len()))?;
        total += fast.len();
        pairs += 1;
    }
    Ok(format!("100 pairs, {total} candidates in total"))
}

fn determinism(seed: u64) -> Outcome {
    let doc = lame_document();
    let a = classify_doc(&doc, seed)?.replay_key();
    let b = classify_doc(&doc, seed)?.replay_key();
    ensure(a == b, || "verdict documents differ".into())?;
    Ok(format!("{} identical bytes", a.len()))
}
