//! Riccati equations `(φ_s(u) + a)·u = −b` over level-`k` elliptic functions.
//!
//! A solution `u` has the shape `φ_s(r)/r · p/q · c` with `p`, `q`, `r` entire
//! theta products. The divisor of `p` is bounded by the numerator `p₂` of `b`
//! over a common denominator `p₃`, the divisor of `q` by `φ_s⁻¹(p₃)`, and the
//! weights must satisfy `ω(p) − ω(q) ≡ deg(r)·s`. Candidates with `deg r = 0`
//! are solved for `c` by sampling; larger `deg r` is reported, not searched.

use alloc::vec::Vec;

use crate::classify::DifferenceEquation;
use crate::divisor::{Divisor, DEFAULT_ENUMERATION_CAP};
use crate::lattice::{torus_coord_distance, LatticeSpec, TorusPoint};
use crate::quotient::{elliptic_from_divisor, EllipticCoefficient, Product, ShiftedFactor, ThetaQuotient};
use crate::sampling::{splitmix64, Sampler};
use crate::special::EvalConfig;
use crate::{Error, C64};

#[cfg(not(feature = "std"))]
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiccatiConfig {
    pub eval: EvalConfig,
    /// Largest `deg r` tried in the weight congruence.
    pub d_max: u32,
    /// Cap on DP states and on emitted candidates.
    pub enumeration_cap: f64,
    /// Relative tolerance for matching roots between two samples.
    pub tol_c: f64,
    /// Relative residual accepted during verification.
    pub tol_res: f64,
    pub verify_samples: usize,
    pub max_rounds: usize,
    /// Lattice-coordinate distance kept between samples and any zero or pole.
    pub sample_guard: f64,
    pub seed: u64,
}

impl Default for RiccatiConfig {
    fn default() -> Self {
        Self {
            eval: EvalConfig::default(),
            d_max: 32,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            tol_c: 1e-6,
            tol_res: 1e-7,
            verify_samples: 24,
            max_rounds: 10,
            sample_guard: 1e-2,
            seed: 0x00c0_ffee,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RiccatiKind {
    /// `(φ(u) + a)u = −b`, step `h`.
    First,
    /// `(φ²(u) + ã)u = −b̃`, step `2h`.
    Imprimitivity,
}

#[derive(Clone, Debug)]
pub struct RiccatiProblem {
    pub kind: RiccatiKind,
    /// Level-2 lattice on which candidates live.
    pub lattice: LatticeSpec,
    pub step: C64,
    pub coeff_a: EllipticCoefficient,
    pub coeff_b: EllipticCoefficient,
    /// Numerator and denominator bounds on the base lattice.
    pub p2_base: Divisor,
    pub p3_base: Divisor,
    /// The same bounds lifted to `lattice`.
    pub p2: Divisor,
    pub p3: Divisor,
    /// Bound for `div q`: `div φ_s⁻¹(p₃)`, lifted.
    pub q_bound: Divisor,
}

const LEVEL: u32 = 2;

impl RiccatiProblem {
    /// Problem for arbitrary coefficients, with bounds from the pole calculus.
    pub fn from_coefficients(
        kind: RiccatiKind,
        base: &LatticeSpec,
        step: C64,
        coeff_a: EllipticCoefficient,
        coeff_b: EllipticCoefficient,
        cfg: &EvalConfig,
    ) -> Result<Self, Error> {
        if coeff_b.is_identically_zero() {
            return Err(Error::ZeroCoefficientB);
        }
        let base = base.base();
        let p3_base = coeff_a.pole_bound(&base, cfg)?.join(&coeff_b.pole_bound(&base, cfg)?)?;
        let p2_base = coeff_b.exact_divisor(&base, cfg)?.add(&p3_base)?;
        let p2 = p2_base.lift(LEVEL)?;
        let p3 = p3_base.lift(LEVEL)?;
        let q_bound = p3_base.shift(-step).lift(LEVEL)?;
        Ok(Self { kind, lattice: base.at_level(LEVEL), step, coeff_a, coeff_b, p2_base, p3_base, p2, p3, q_bound })
    }
}

fn rescale_shifts(c: &EllipticCoefficient, ratio: C64) -> EllipticCoefficient {
    match c {
        EllipticCoefficient::SumOfProducts(ps) => EllipticCoefficient::SumOfProducts(
            ps.iter()
                .map(|p| Product {
                    coeff: p.coeff,
                    factors: p
                        .factors
                        .iter()
                        .map(|f| ShiftedFactor { base: f.base.clone(), shift: f.shift * ratio, power: f.power })
                        .collect(),
                })
                .collect(),
        ),
        other => other.clone(),
    }
}

impl RiccatiProblem {
    /// The same problem with every shift scaled to a new step.
    pub fn with_step(&self, step: C64, cfg: &EvalConfig) -> Result<Self, Error> {
        if self.step.norm() == 0.0 {
            return Err(Error::InvalidParameter("step must be nonzero"));
        }
        let ratio = step / self.step;
        Self::from_coefficients(
            self.kind,
            &self.lattice,
            step,
            rescale_shifts(&self.coeff_a, ratio),
            rescale_shifts(&self.coeff_b, ratio),
            cfg,
        )
    }

    /// Candidates that also pass the congruence at a slightly perturbed step,
    /// i.e. relations that do not hinge on a torsion coincidence of the step.
    /// Falls back to the plain space when the perturbed bounds change shape.
    pub fn candidate_space(&self, d_max: u32, cap: f64, cfg: &EvalConfig) -> Result<CandidateSpace, Error> {
        if let Ok(twin) = self.with_step(self.step * (C64::new(1.0, 0.0) + TWIN_EPS), cfg) {
            let t = Some((&twin.p2, &twin.q_bound, twin.step));
            match CandidateSpace::build_with_twin(&self.p2, &self.q_bound, self.step, t, d_max, cap) {
                Err(Error::InvalidParameter(_)) => {}
                other => return other,
            }
        }
        CandidateSpace::build(&self.p2, &self.q_bound, self.step, d_max, cap)
    }
}

pub fn build_first_riccati(eq: &DifferenceEquation, cfg: &EvalConfig) -> Result<RiccatiProblem, Error> {
    RiccatiProblem::from_coefficients(RiccatiKind::First, &eq.lattice, eq.h, eq.a.clone(), eq.b.clone(), cfg)
}

/// `ã = φ²(b/a) − φ(a) + φ(b)/a` and `b̃ = φ(b)·b/a²` with step `2h`.
pub fn build_imprimitivity_riccati(eq: &DifferenceEquation, cfg: &EvalConfig) -> Result<RiccatiProblem, Error> {
    if eq.a.is_identically_zero() {
        return Err(Error::ZeroCoefficientA);
    }
    if eq.b.is_identically_zero() {
        return Err(Error::ZeroCoefficientB);
    }
    let h = eq.h;
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let f = |c: &EllipticCoefficient, shift: C64, power: i32| ShiftedFactor { base: c.clone(), shift, power };
    let (a, b) = (&eq.a, &eq.b);
    let a_tilde = EllipticCoefficient::SumOfProducts(alloc::vec![
        Product { coeff: one, factors: alloc::vec![f(b, h * 2.0, 1), f(a, h * 2.0, -1)] },
        Product { coeff: -one, factors: alloc::vec![f(a, h, 1)] },
        Product { coeff: one, factors: alloc::vec![f(b, h, 1), f(a, zero, -1)] },
    ]);
    let b_tilde = EllipticCoefficient::SumOfProducts(alloc::vec![Product {
        coeff: one,
        factors: alloc::vec![f(b, h, 1), f(b, zero, 1), f(a, zero, -2)],
    }]);
    RiccatiProblem::from_coefficients(RiccatiKind::Imprimitivity, &eq.lattice, h * 2.0, a_tilde, b_tilde, cfg)
}

/// `(div p, div q, deg r)` passing the divisor constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiCandidate {
    pub p_div: Divisor,
    pub q_div: Divisor,
    pub deg_r: u32,
}

const SCALE_BITS: u32 = 40;
const MASK: u64 = (1u64 << SCALE_BITS) - 1;
const BUCKET_SHIFT: u32 = 12;
/// Torus tolerance of the fixed-point prefilter; the exact recheck uses `TOL_LAT`.
const TOL_DP: f64 = 1e-6;
/// Largest torus distance between a bound point and its twin.
const TWIN_MATCH: f64 = 1e-2;
/// Relative step perturbation used for the twin problem.
const TWIN_EPS: C64 = C64::new(7.548_776_662e-5, 5.698_402_910e-5);

fn to_fixed(x: f64) -> u64 {
    let f = x - x.floor();
    ((f * (1u64 << SCALE_BITS) as f64).round() as u64) & MASK
}

fn from_fixed(w: u64) -> f64 {
    (w & MASK) as f64 / (1u64 << SCALE_BITS) as f64
}

struct Item {
    point: TorusPoint,
    sign: i32,
    max: i32,
    w: [u64; 4],
    /// The matching point of the twin bounds, or `point` itself.
    twin: C64,
}

/// Degree difference and packed weight of a partial candidate.
type StateKey = (i32, [u64; 4]);

/// One DP layer; predecessors of node `i` are `preds[start[i]..start[i + 1]]`.
struct Layer {
    degdiff: Vec<i32>,
    start: Vec<u32>,
    preds: Vec<(u32, u8)>,
}

/// Compressed set of all candidates for a pair of bounds.
///
/// Build once, then stream with [`CandidateSpace::for_each`]; materialize
/// only the candidates that need it.
pub struct CandidateSpace {
    items: Vec<Item>,
    layers: Vec<Layer>,
    finals: Vec<(u32, Vec<u32>)>,
    lattice: LatticeSpec,
    step: C64,
    twin_step: C64,
    paths: f64,
}

/// A candidate as a multiplicity per bound point, in [`CandidateSpace::points`] order.
#[derive(Clone, Copy, Debug)]
pub struct CandidateRef<'a> {
    pub multiplicities: &'a [u8],
    pub deg_r: u32,
}

impl CandidateSpace {
    pub fn build(p_bound: &Divisor, q_bound: &Divisor, step: C64, d_max: u32, cap: f64) -> Result<Self, Error> {
        Self::build_with_twin(p_bound, q_bound, step, None, d_max, cap)
    }

    /// Like [`CandidateSpace::build`], but a candidate must also satisfy the
    /// weight congruence for `twin`: the same bounds computed at a nearby
    /// step, matched point by point.
    pub fn build_with_twin(
        p_bound: &Divisor,
        q_bound: &Divisor,
        step: C64,
        twin: Option<(&Divisor, &Divisor, C64)>,
        d_max: u32,
        cap: f64,
    ) -> Result<Self, Error> {
        let lattice = *p_bound.lattice();
        if q_bound.level() != lattice.level() {
            return Err(Error::LevelMismatch(lattice.level(), q_bound.level()));
        }
        if !p_bound.is_effective() || !q_bound.is_effective() {
            return Err(Error::InvalidParameter("candidate bounds must be effective"));
        }
        let mut items = Vec::new();
        for (bound, sign) in [(p_bound, 1), (q_bound, -1)] {
            for (p, m) in bound.entries() {
                let (s, t) = p.coords();
                let (fs, ft) = (to_fixed(s), to_fixed(t));
                items.push(Item { point: *p, sign, max: *m, w: [fs, ft, fs, ft], twin: p.xi() });
            }
        }
        let twin_step = match twin {
            Some((tp, tq, tstep)) => {
                let n_p = p_bound.entries().len();
                let (head, tail) = items.split_at_mut(n_p);
                match_twin(head, tp, &lattice)?;
                match_twin(tail, tq, &lattice)?;
                tstep
            }
            None => step,
        };
        let mut p_rem: i32 = items.iter().filter(|i| i.sign > 0).map(|i| i.max).sum();
        let mut q_rem: i32 = items.iter().filter(|i| i.sign < 0).map(|i| i.max).sum();

        let mut layers: Vec<Layer> = Vec::with_capacity(items.len());
        let mut cur: Vec<StateKey> = alloc::vec![(0, [0; 4])];
        let mut counts: Vec<f64> = alloc::vec![1.0];
        let mut total_states = 1f64;
        // (state, twin weight, predecessor, multiplicity)
        let mut next: Vec<(StateKey, [u64; 4], u32, u8)> = Vec::new();
        for item in &items {
            if item.sign > 0 {
                p_rem -= item.max;
            } else {
                q_rem -= item.max;
            }
            next.clear();
            for (idx, &(degdiff, nw)) in cur.iter().enumerate() {
                for m in 0..=item.max {
                    let dd = degdiff + item.sign * m;
                    if dd < -p_rem || dd > q_rem {
                        continue;
                    }
                    let mut w = nw;
                    let mut key = [0u64; 4];
                    for j in 0..4 {
                        let mut a = (item.w[j] * m as u64) & MASK;
                        if item.sign < 0 {
                            a = a.wrapping_neg() & MASK;
                        }
                        w[j] = (w[j] + a) & MASK;
                        key[j] = w[j] >> BUCKET_SHIFT;
                    }
                    next.push(((dd, key), w, idx as u32, m as u8));
                }
            }
            next.sort_unstable_by_key(|e| (e.0, e.2, e.3));
            let mut layer = Layer { degdiff: Vec::new(), start: Vec::new(), preds: Vec::with_capacity(next.len()) };
            let mut states = Vec::new();
            let mut new_counts = Vec::new();
            let mut last_key = None;
            for &(key, w, prev, m) in &next {
                if last_key != Some(key) {
                    layer.degdiff.push(key.0);
                    layer.start.push(layer.preds.len() as u32);
                    states.push((key.0, w));
                    new_counts.push(0.0);
                    last_key = Some(key);
                }
                layer.preds.push((prev, m));
                if let Some(c) = new_counts.last_mut() {
                    *c += counts[prev as usize];
                }
            }
            layer.start.push(layer.preds.len() as u32);
            total_states += states.len() as f64;
            if total_states > cap {
                return Err(Error::CombinatorialBlowup { count: total_states, cap });
            }
            layers.push(layer);
            cur = states;
            counts = new_counts;
        }

        let steps = [lattice.coords(step), lattice.coords(twin_step)];
        let mut finals = Vec::new();
        let mut paths = 0.0;
        for (idx, &(degdiff, w)) in cur.iter().enumerate() {
            if degdiff != 0 {
                continue;
            }
            let ds: Vec<u32> = (0..=d_max)
                .filter(|&d| {
                    steps.iter().enumerate().all(|(j, sc)| {
                        let got = (from_fixed(w[2 * j]), from_fixed(w[2 * j + 1]));
                        torus_coord_distance(got, (sc.0 * d as f64, sc.1 * d as f64)) <= TOL_DP
                    })
                })
                .collect();
            if !ds.is_empty() {
                paths += counts[idx] * ds.len() as f64;
                finals.push((idx as u32, ds));
            }
        }
        if paths > cap {
            return Err(Error::CombinatorialBlowup { count: paths, cap });
        }
        Ok(Self { items, layers, finals, lattice, step, twin_step, paths })
    }

    /// Bound points: the `p` bound first, then the `q` bound.
    pub fn points(&self) -> impl Iterator<Item = (TorusPoint, i32)> + '_ {
        self.items.iter().map(|i| (i.point, i.sign))
    }

    /// Upper bound on the number of candidates, before the exact weight recheck.
    pub fn path_count(&self) -> f64 {
        self.paths
    }

    /// Calls `f` on every candidate, in a deterministic order.
    pub fn for_each<F>(&self, mut f: F) -> Result<(), Error>
    where
        F: FnMut(CandidateRef<'_>) -> Result<(), Error>,
    {
        let mut assignment = alloc::vec![0u8; self.items.len()];
        for (node, ds) in &self.finals {
            self.walk(self.layers.len(), *node, &mut assignment, ds, &mut f)?;
        }
        Ok(())
    }

    fn walk<F>(&self, depth: usize, node: u32, assignment: &mut [u8], ds: &[u32], f: &mut F) -> Result<(), Error>
    where
        F: FnMut(CandidateRef<'_>) -> Result<(), Error>,
    {
        if depth == 0 {
            return self.emit(assignment, ds, f);
        }
        let layer = &self.layers[depth - 1];
        let (a, b) = (layer.start[node as usize] as usize, layer.start[node as usize + 1] as usize);
        for &(prev, m) in &layer.preds[a..b] {
            assignment[depth - 1] = m;
            self.walk(depth - 1, prev, assignment, ds, f)?;
        }
        Ok(())
    }

    fn emit<F>(&self, assignment: &[u8], ds: &[u32], f: &mut F) -> Result<(), Error>
    where
        F: FnMut(CandidateRef<'_>) -> Result<(), Error>,
    {
        let mut w = C64::new(0.0, 0.0);
        let mut tw = C64::new(0.0, 0.0);
        for (item, &m) in self.items.iter().zip(assignment) {
            let k = (item.sign * m as i32) as f64;
            w += item.point.xi() * k;
            tw += item.twin * k;
        }
        let l = &self.lattice;
        let tol = crate::lattice::TOL_LAT;
        for &d in ds {
            if torus_coord_distance(l.coords(w), l.coords(self.step * d as f64)) <= tol
                && torus_coord_distance(l.coords(tw), l.coords(self.twin_step * d as f64)) <= tol
            {
                f(CandidateRef { multiplicities: assignment, deg_r: d })?;
            }
        }
        Ok(())
    }

    pub fn materialize(&self, c: CandidateRef<'_>) -> RiccatiCandidate {
        let mut p = Divisor::zero(&self.lattice);
        let mut q = Divisor::zero(&self.lattice);
        for (item, &m) in self.items.iter().zip(c.multiplicities) {
            if m > 0 {
                let target = if item.sign > 0 { &mut p } else { &mut q };
                target.add_at(item.point.xi(), m as i32);
            }
        }
        RiccatiCandidate { p_div: p, q_div: q, deg_r: c.deg_r }
    }
}

/// Pairs every item with the closest point of `twin`; multiplicities must agree.
fn match_twin(items: &mut [Item], twin: &Divisor, lattice: &LatticeSpec) -> Result<(), Error> {
    let mismatch = Error::InvalidParameter("twin bounds do not match");
    if twin.entries().len() != items.len() {
        return Err(mismatch);
    }
    let mut used = alloc::vec![false; items.len()];
    for item in items.iter_mut() {
        let mut best: Option<(usize, f64)> = None;
        for (j, (p, m)) in twin.entries().iter().enumerate() {
            let d = item.point.distance(p);
            if !used[j] && *m == item.max && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.ok_or(mismatch.clone())?;
        if d > TWIN_MATCH {
            return Err(mismatch);
        }
        used[j] = true;
        let p = &twin.entries()[j].0;
        // Nearest representative, so that sums stay comparable.
        let (s0, t0) = item.point.coords();
        let (s1, t1) = p.coords();
        let twin_xi = lattice.from_coords(s0 + wrap(s1 - s0), t0 + wrap(t1 - t0));
        let (s, t) = lattice.coords(twin_xi);
        item.twin = twin_xi;
        item.w[2] = to_fixed(s);
        item.w[3] = to_fixed(t);
    }
    Ok(())
}

fn wrap(x: f64) -> f64 {
    x - x.round()
}

/// All `(p, q, d)` with `0 ≤ p ≤ p₂`, `0 ≤ q ≤ q_bound`, `deg p = deg q`
/// and `ω(p − q) ≡ d·step (mod kΛ)` for some `0 ≤ d ≤ d_max`.
///
/// Works as a dynamic program over bound points with fixed-point weights;
/// every surviving path is rechecked against the exact weight.
pub fn enumerate_candidates(
    prob: &RiccatiProblem,
    d_max: u32,
    cap: f64,
    cfg: &EvalConfig,
) -> Result<Vec<RiccatiCandidate>, Error> {
    let space = prob.candidate_space(d_max, cap, cfg)?;
    let mut out = Vec::new();
    space.for_each(|c| {
        out.push(space.materialize(c));
        Ok(())
    })?;
    Ok(out)
}

pub fn enumerate_for_bounds(
    p_bound: &Divisor,
    q_bound: &Divisor,
    step: C64,
    d_max: u32,
    cap: f64,
) -> Result<Vec<RiccatiCandidate>, Error> {
    let space = CandidateSpace::build(p_bound, q_bound, step, d_max, cap)?;
    let mut out = Vec::new();
    space.for_each(|c| {
        out.push(space.materialize(c));
        Ok(())
    })?;
    Ok(out)
}

/// A verified solution `u = constant·v`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifiedSolution {
    pub u: ThetaQuotient,
    pub constant: C64,
    pub divisor: Divisor,
    pub max_residual: f64,
    pub samples: usize,
    pub seed: u64,
}

struct Sample {
    a: C64,
    b: C64,
    c: C64,
}

impl Sample {
    fn residual(&self, x: C64) -> f64 {
        let t = [self.a * x * x, self.b * x, self.c];
        let scale = t.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        (t[0] + t[1] + t[2]).norm() / scale
    }

    fn roots(&self) -> Vec<C64> {
        let (a, b, c) = (self.a, self.b, self.c);
        let disc = (b * b - a * c * 4.0).sqrt();
        let plus = b + disc;
        let minus = b - disc;
        let q = if plus.norm() >= minus.norm() { plus * -0.5 } else { minus * -0.5 };
        if q.norm() == 0.0 {
            return alloc::vec![C64::new(0.0, 0.0)];
        }
        alloc::vec![q / a, c / q]
    }
}

struct SampleSource<'a> {
    prob: &'a RiccatiProblem,
    v: &'a ThetaQuotient,
    cfg: &'a RiccatiConfig,
    sampler: Sampler,
    drawn: usize,
}

impl SampleSource<'_> {
    fn usable(&self, z: C64) -> bool {
        let guard = self.cfg.sample_guard;
        let l = &self.prob.lattice;
        let near = |d: &Divisor, shift: C64| {
            d.entries().iter().any(|(p, _)| l.distance_to_lattice(z + shift - p.xi()) < guard)
        };
        !(self.v.near_support(z, guard)
            || self.v.near_support(z + self.prob.step, guard)
            || near(&self.prob.p3, C64::new(0.0, 0.0))
            || near(&self.prob.p2, C64::new(0.0, 0.0)))
    }

    fn next(&mut self) -> Result<Sample, Error> {
        let per_round = 64;
        for _ in 0..self.cfg.max_rounds * per_round {
            self.drawn += 1;
            let z = self.sampler.point(&self.prob.lattice);
            if !self.usable(z) {
                continue;
            }
            let e = &self.cfg.eval;
            let got = (|| {
                let vz = self.v.evaluate(z, e)?;
                let vs = self.v.evaluate(z + self.prob.step, e)?;
                let a = self.prob.coeff_a.evaluate(z, e)?;
                let b = self.prob.coeff_b.evaluate(z, e)?;
                Ok::<_, Error>(Sample { a: vz * vs, b: a * vz, c: b })
            })();
            match got {
                Ok(s)
                    if s.a.norm() > 0.0
                        && s.a.norm().is_finite()
                        && s.b.norm().is_finite()
                        && s.c.norm().is_finite() =>
                {
                    return Ok(s)
                }
                Ok(_) | Err(Error::PoleProximity { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::SampleDegeneracy)
    }
}

fn close(x: C64, y: C64, tol: f64) -> bool {
    (x - y).norm() <= tol * x.norm().max(y.norm()).max(1e-300)
}

/// Finds the constants `c` for which `c·v` solves the problem, `v` having
/// divisor `p − q`. Requires `deg_r = 0`.
pub fn solve_and_verify(
    prob: &RiccatiProblem,
    cand: &RiccatiCandidate,
    cfg: &RiccatiConfig,
    seed: u64,
) -> Result<Vec<VerifiedSolution>, Error> {
    if cand.deg_r != 0 {
        return Err(Error::InvalidParameter("only deg r = 0 candidates can be solved"));
    }
    let divisor = cand.p_div.sub(&cand.q_div)?;
    let v = elliptic_from_divisor(&divisor)?;
    let mut src = SampleSource { prob, v: &v, cfg, sampler: Sampler::new(seed), drawn: 0 };
    let s1 = src.next()?;
    let s2 = src.next()?;
    let mut constants: Vec<C64> = Vec::new();
    for r1 in s1.roots() {
        for r2 in s2.roots() {
            if close(r1, r2, cfg.tol_c) && !constants.iter().any(|c| close(*c, r1, cfg.tol_c)) {
                constants.push(r1);
            }
        }
    }
    constants.retain(|c| c.norm() > 0.0);
    if constants.is_empty() {
        return Ok(Vec::new());
    }
    let mut worst = alloc::vec![0.0f64; constants.len()];
    let mut alive = alloc::vec![true; constants.len()];
    for _ in 0..cfg.verify_samples {
        let s = src.next()?;
        for (i, c) in constants.iter().enumerate() {
            if alive[i] {
                let r = s.residual(*c);
                worst[i] = worst[i].max(r);
                if r.is_nan() || r > cfg.tol_res {
                    alive[i] = false;
                }
            }
        }
        if !alive.iter().any(|a| *a) {
            break;
        }
    }
    Ok(constants
        .iter()
        .zip(alive.iter().zip(&worst))
        .filter(|(_, (a, _))| **a)
        .map(|(c, (_, w))| VerifiedSolution {
            u: v.scaled(*c),
            constant: *c,
            divisor: divisor.clone(),
            max_residual: *w,
            samples: cfg.verify_samples,
            seed,
        })
        .collect())
}

/// Replays a claimed solution at fresh samples; returns the worst residual.
pub fn reverify(prob: &RiccatiProblem, u: &ThetaQuotient, cfg: &RiccatiConfig, seed: u64) -> Result<f64, Error> {
    let mut src = SampleSource { prob, v: u, cfg, sampler: Sampler::new(seed), drawn: 0 };
    let mut worst = 0.0f64;
    for _ in 0..cfg.verify_samples {
        let s = src.next()?;
        worst = worst.max(s.residual(C64::new(1.0, 0.0)));
    }
    Ok(worst)
}

/// How many surviving candidates an outcome lists verbatim.
pub const LISTED_CANDIDATES: usize = 64;

#[derive(Clone, Debug)]
pub enum RiccatiOutcome {
    /// No candidate survives the divisor constraints, or every `deg r = 0`
    /// survivor was refuted by sampling and none has `deg r > 0`.
    NoSolutionCertificate {
        p_bound: Divisor,
        q_bound: Divisor,
        d_max: u32,
        /// Candidates that passed the divisor constraints and were refuted.
        refuted: u64,
    },
    Solutions {
        solutions: Vec<VerifiedSolution>,
        /// Number of `deg r > 0` candidates left unsearched.
        unsearched: u64,
    },
    /// Some survivor needs `deg r > 0`, which is not searched.
    Inconclusive {
        /// The first few such survivors.
        surviving: Vec<RiccatiCandidate>,
        surviving_count: u64,
        refuted: u64,
    },
}

impl RiccatiOutcome {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::NoSolutionCertificate { .. } => "no_solution_certificate",
            Self::Solutions { .. } => "solutions",
            Self::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn solutions(&self) -> &[VerifiedSolution] {
        match self {
            Self::Solutions { solutions, .. } => solutions,
            _ => &[],
        }
    }
}

/// Theta values of every bound point at two fixed samples, so that the
/// two-sample root test costs a few products per candidate.
struct RootScreen {
    samples: Vec<ScreenSample>,
    k: f64,
}

struct ScreenSample {
    z: C64,
    at_z: Vec<C64>,
    at_zs: Vec<C64>,
    a: C64,
    b: C64,
}

fn e2pi(x: C64) -> C64 {
    (C64::new(0.0, 2.0 * core::f64::consts::PI) * x).exp()
}

impl RootScreen {
    fn new(prob: &RiccatiProblem, space: &CandidateSpace, cfg: &RiccatiConfig) -> Result<Self, Error> {
        let l = prob.lattice;
        let e = &cfg.eval;
        let guard = cfg.sample_guard;
        let points: Vec<C64> = space.items.iter().map(|i| i.point.xi()).collect();
        let coeff_points: Vec<C64> = prob.p2.entries().iter().chain(prob.p3.entries()).map(|(p, _)| p.xi()).collect();
        let mut sampler = Sampler::new(splitmix64(cfg.seed ^ 0x5c4e_e11e));
        let mut samples = Vec::new();
        for _ in 0..cfg.max_rounds * 64 {
            if samples.len() == 2 {
                break;
            }
            let z = sampler.point(&l);
            let zs = z + prob.step;
            let far = |w: C64| points.iter().chain(&coeff_points).all(|x| l.distance_to_lattice(w - x) >= guard);
            if !far(z) || !far(zs) {
                continue;
            }
            let got = (|| {
                let mut at_z = Vec::with_capacity(points.len());
                let mut at_zs = Vec::with_capacity(points.len());
                for x in &points {
                    at_z.push(crate::special::theta_k(z - x, &l, e)?);
                    at_zs.push(crate::special::theta_k(zs - x, &l, e)?);
                }
                let a = prob.coeff_a.evaluate(z, e)?;
                let b = prob.coeff_b.evaluate(z, e)?;
                Ok::<_, Error>(ScreenSample { z, at_z, at_zs, a, b })
            })();
            match got {
                Ok(s) if s.a.is_finite() && s.b.is_finite() && s.b.norm() > 0.0 => samples.push(s),
                Ok(_) | Err(Error::PoleProximity { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        if samples.len() < 2 {
            return Err(Error::SampleDegeneracy);
        }
        Ok(Self { samples, k: l.level() as f64 })
    }

    /// `false` when the root sets at the two samples are disjoint, which
    /// rules the candidate out for every constant.
    fn may_solve(&self, space: &CandidateSpace, c: CandidateRef<'_>, tol: f64) -> bool {
        let mut omega = C64::new(0.0, 0.0);
        for (item, &m) in space.items.iter().zip(c.multiplicities) {
            omega += item.point.xi() * (item.sign * m as i32) as f64;
        }
        let twist = -space.lattice.coords(omega).1.round();
        let mut roots: Vec<Vec<C64>> = Vec::with_capacity(2);
        for s in &self.samples {
            let mut vz = e2pi(s.z * (twist / self.k));
            let mut vs = vz * e2pi(space.step * (twist / self.k));
            for ((item, &m), (tz, ts)) in space.items.iter().zip(c.multiplicities).zip(s.at_z.iter().zip(&s.at_zs)) {
                if m != 0 {
                    let e = item.sign * m as i32;
                    vz *= tz.powi(e);
                    vs *= ts.powi(e);
                }
            }
            let q = Sample { a: vz * vs, b: s.a * vz, c: s.b };
            if !(q.a.norm() > 0.0 && q.a.is_finite() && q.b.is_finite()) {
                return true;
            }
            roots.push(q.roots());
        }
        roots[0].iter().any(|r1| roots[1].iter().any(|r2| close(*r1, *r2, tol)))
    }
}

/// Screen factor over `tol_c`; the screen only discards, so it errs wide.
const SCREEN_SLACK: f64 = 100.0;

pub fn solve(prob: &RiccatiProblem, cfg: &RiccatiConfig) -> Result<RiccatiOutcome, Error> {
    let space = prob.candidate_space(cfg.d_max, cfg.enumeration_cap, &cfg.eval)?;
    let mut screen: Option<RootScreen> = None;
    let mut solutions: Vec<VerifiedSolution> = Vec::new();
    let mut refuted = 0u64;
    let mut deferred = Vec::new();
    let mut deferred_count = 0u64;
    let mut index = 0u64;
    space.for_each(|c| {
        let i = index;
        index += 1;
        if c.deg_r != 0 {
            deferred_count += 1;
            if deferred.len() < LISTED_CANDIDATES {
                deferred.push(space.materialize(c));
            }
            return Ok(());
        }
        if !c.multiplicities.iter().all(|m| *m == 0) {
            if screen.is_none() {
                screen = Some(RootScreen::new(prob, &space, cfg)?);
            }
            if let Some(sc) = &screen {
                if !sc.may_solve(&space, c, cfg.tol_c * SCREEN_SLACK) {
                    refuted += 1;
                    return Ok(());
                }
            }
        }
        let cand = space.materialize(c);
        let seed = splitmix64(cfg.seed.wrapping_add(i));
        let found = solve_and_verify(prob, &cand, cfg, seed)?;
        if found.is_empty() {
            refuted += 1;
        }
        for s in found {
            let dup = solutions.iter().any(|t| t.divisor == s.divisor && close(t.constant, s.constant, cfg.tol_c));
            if !dup {
                solutions.push(s);
            }
        }
        Ok(())
    })?;
    Ok(if !solutions.is_empty() {
        RiccatiOutcome::Solutions { solutions, unsearched: deferred_count }
    } else if deferred_count > 0 {
        RiccatiOutcome::Inconclusive { surviving: deferred, surviving_count: deferred_count, refuted }
    } else {
        RiccatiOutcome::NoSolutionCertificate {
            p_bound: prob.p2.clone(),
            q_bound: prob.q_bound.clone(),
            d_max: cfg.d_max,
            refuted,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{build_lame, DifferenceEquation};

    fn sq() -> LatticeSpec {
        LatticeSpec::unit(C64::new(0.0, 1.0)).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn eq(a: EllipticCoefficient, b: EllipticCoefficient) -> DifferenceEquation {
        DifferenceEquation::new(sq(), c(0.31, 0.17), a, b)
    }

    #[test]
    fn constant_bounds_are_empty() {
        let e = eq(EllipticCoefficient::Constant(c(0.0, 0.0)), EllipticCoefficient::Constant(c(1.0, 0.0)));
        let p = build_first_riccati(&e, &EvalConfig::default()).unwrap();
        assert!(p.p2.is_zero() && p.p3.is_zero() && p.q_bound.is_zero());
        let cands = enumerate_candidates(&p, 32, 1e7, &EvalConfig::default()).unwrap();
        assert_eq!(cands.len(), 1);
        assert!(cands[0].p_div.is_zero() && cands[0].q_div.is_zero() && cands[0].deg_r == 0);
    }

    #[test]
    fn zero_b_is_rejected() {
        let e = eq(EllipticCoefficient::Constant(c(1.0, 0.0)), EllipticCoefficient::Constant(c(0.0, 0.0)));
        assert_eq!(build_first_riccati(&e, &EvalConfig::default()).err(), Some(Error::ZeroCoefficientB));
        let e = eq(EllipticCoefficient::Constant(c(0.0, 0.0)), EllipticCoefficient::Constant(c(1.0, 0.0)));
        assert_eq!(build_imprimitivity_riccati(&e, &EvalConfig::default()).err(), Some(Error::ZeroCoefficientA));
    }

    #[test]
    fn constant_equation_has_two_solutions() {
        let e = eq(EllipticCoefficient::Constant(c(0.0, 0.0)), EllipticCoefficient::Constant(c(1.0, 0.0)));
        let p = build_first_riccati(&e, &EvalConfig::default()).unwrap();
        let out = solve(&p, &RiccatiConfig::default()).unwrap();
        let sols = out.solutions();
        assert_eq!(sols.len(), 2);
        for want in [c(0.0, 1.0), c(0.0, -1.0)] {
            assert!(sols.iter().any(|s| (s.constant - want).norm() < 1e-12));
        }
    }

    #[test]
    fn lame_first_bounds() {
        let cfg = EvalConfig::default();
        let h = c(0.31, 0.17);
        let e = build_lame(c(1.0, 0.0), c(0.0, 0.0), h, &sq(), &cfg).unwrap();
        let p = build_first_riccati(&e, &cfg).unwrap();
        let z0 = e.independence.as_ref().unwrap().z0;
        let l2 = p.lattice;
        let mut want_p = Divisor::zero(&l2);
        let mut want_q = Divisor::zero(&l2);
        for l1 in 0..2 {
            for l2i in 0..2 {
                let ell = c(l1 as f64, 0.0) + sq().tau() * l2i as f64;
                want_p.add_at(ell + z0, 1);
                want_p.add_at(ell - z0, 1);
                want_q.add_at(ell + h, 2);
            }
        }
        assert_eq!(p.p2, want_p);
        assert_eq!(p.q_bound, want_q);
    }

    #[test]
    fn reducible_equation_finds_u_equal_one() {
        let cfg = EvalConfig::default();
        let l = sq();
        let a = EllipticCoefficient::WpLinear { alpha: c(1.0, 0.0), beta: c(0.0, 0.0), lattice: l };
        let b = EllipticCoefficient::WpLinear { alpha: c(-1.0, 0.0), beta: c(-1.0, 0.0), lattice: l };
        let p = build_first_riccati(&eq(a, b), &cfg).unwrap();
        let out = solve(&p, &RiccatiConfig::default()).unwrap();
        let one = out
            .solutions()
            .iter()
            .find(|s| s.divisor.is_zero() && (s.constant - 1.0).norm() < 1e-8)
            .expect("u = 1 should be found");
        assert!(one.max_residual <= 1e-8);
    }

    #[test]
    fn roots_are_stable() {
        let s = Sample { a: c(1.0, 0.0), b: c(-1e8, 0.0), c: c(1.0, 0.0) };
        let r = s.roots();
        assert!(r.iter().all(|x| s.residual(*x) < 1e-12));
    }
}
