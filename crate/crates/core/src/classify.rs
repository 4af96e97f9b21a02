//! From an equation `φ²y + aφy + by = 0` to a group shape.
//!
//! The first Riccati equation decides reducibility, the second one (step
//! `2h`) imprimitivity, and the rank-one equation `φy = by` the determinant
//! group. Transcendence hypotheses on `h` are replaced by bounded checks,
//! each reported as an [`Assumption`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::divisor::h_orbit_solve;
use crate::lattice::{check_independence, torsion_order, LatticeSpec, TOL_LAT};
use crate::quotient::{EllipticCoefficient, ThetaQuotient};
use crate::riccati::{build_first_riccati, build_imprimitivity_riccati, solve, RiccatiConfig, RiccatiOutcome};
use crate::sampling::r2_coords;
use crate::special::{wp_invert, EvalConfig};
use crate::{Error, C64};

/// Bounded form of `ℤh ∩ (ℓ·z0 + Λ) = {0}` for `|ℓ| ≤ l_range`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceHypothesis {
    pub z0: C64,
    pub l_range: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceEquation {
    /// Base lattice `Λ`.
    pub lattice: LatticeSpec,
    pub h: C64,
    pub a: EllipticCoefficient,
    pub b: EllipticCoefficient,
    pub independence: Option<IndependenceHypothesis>,
}

impl DifferenceEquation {
    pub fn new(lattice: LatticeSpec, h: C64, a: EllipticCoefficient, b: EllipticCoefficient) -> Self {
        Self { lattice: lattice.base(), h, a, b, independence: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyConfig {
    pub riccati: RiccatiConfig,
    pub torsion_n_max: u32,
    pub independence_d_range: u32,
    pub rank1_n_max: u32,
    /// Largest level searched for a rank-one witness.
    pub rank1_k_max: u32,
    /// Orbit cap for the rank-one divisor solve; at most `torsion_n_max / 2`.
    pub orbit_cap: u32,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            riccati: RiccatiConfig::default(),
            torsion_n_max: 64,
            independence_d_range: 64,
            rank1_n_max: 24,
            rank1_k_max: 64,
            orbit_cap: 32,
        }
    }
}

impl ClassifyConfig {
    pub fn eval(&self) -> &EvalConfig {
        &self.riccati.eval
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rank1Group {
    Finite(u32),
    FullTorus(u32),
}

/// `b^power = g(z + h)/g(z)` with `g(z) = quotient(z)·e^{2iπ·twist·z/level}`,
/// a `level·Λ`-periodic function.
#[derive(Clone, Debug, PartialEq)]
pub struct Rank1Witness {
    pub power: u32,
    pub quotient: ThetaQuotient,
    pub twist: i64,
    pub level: u32,
    pub residual: f64,
}

impl Rank1Witness {
    pub fn evaluate(&self, z: C64, cfg: &EvalConfig) -> Result<C64, Error> {
        let phase = e2pi(z * (self.twist as f64 / self.level as f64));
        Ok(self.quotient.evaluate(z, cfg)? * phase)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rank1Report {
    pub group: Rank1Group,
    pub witness: Option<Rank1Witness>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GroupShape {
    ScalarSubgroup,
    ReducibleNotCompletelyReducible,
    CompletelyReducibleNonScalar,
    Imprimitive,
    /// `G = {M : det M ∈ H}`.
    DetConstrained(Rank1Group),
    Unresolved(String),
}

impl GroupShape {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::ScalarSubgroup => "scalar_subgroup",
            Self::ReducibleNotCompletelyReducible => "reducible_not_completely",
            Self::CompletelyReducibleNonScalar => "completely_reducible_non_scalar",
            Self::Imprimitive => "imprimitive",
            Self::DetConstrained(_) => "det_constrained",
            Self::Unresolved(_) => "unresolved",
        }
    }

    /// `{M : det M ∈ μₖ}` is written `μ₂ₖSL₂`; the full torus gives `GL₂`.
    pub fn render(&self) -> String {
        match self {
            Self::DetConstrained(Rank1Group::FullTorus(_)) => String::from("GL2"),
            Self::DetConstrained(Rank1Group::Finite(k)) => format!("mu_{}.SL2", 2 * k),
            other => String::from(other.tag()),
        }
    }

    pub fn is_definite(&self) -> bool {
        !matches!(self, Self::Unresolved(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assumption {
    pub kind: &'static str,
    pub bound: u32,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct GaloisVerdict {
    pub shape: GroupShape,
    pub assumptions: Vec<Assumption>,
    pub first: Option<RiccatiOutcome>,
    pub imprimitivity: Option<RiccatiOutcome>,
    pub rank1: Option<Rank1Report>,
    pub seed: u64,
}

/// Shape implied by the first Riccati pass, or `None` when the equation is
/// irreducible and the pipeline must continue.
pub fn first_pass_shape(outcome: &RiccatiOutcome) -> Option<GroupShape> {
    match outcome {
        RiccatiOutcome::Solutions { solutions, .. } => Some(match solutions.len() {
            0 => return None,
            1 => GroupShape::ReducibleNotCompletelyReducible,
            2 => GroupShape::CompletelyReducibleNonScalar,
            _ => GroupShape::ScalarSubgroup,
        }),
        RiccatiOutcome::Inconclusive { .. } => Some(GroupShape::Unresolved(String::from(
            "first Riccati equation has unsearched candidates with deg r > 0",
        ))),
        RiccatiOutcome::NoSolutionCertificate { .. } => None,
    }
}

pub fn classify(eq: &DifferenceEquation, cfg: &ClassifyConfig) -> Result<GaloisVerdict, Error> {
    let lattice = eq.lattice.base();
    if let Some(n) = torsion_order(eq.h, &lattice, cfg.torsion_n_max, TOL_LAT) {
        return Err(Error::NonTorsionViolated(n));
    }
    let mut assumptions = alloc::vec![Assumption { kind: "torsion", bound: cfg.torsion_n_max, passed: true }];
    if let Some(ind) = &eq.independence {
        let passed = check_independence(eq.h, ind.z0, ind.l_range, cfg.independence_d_range, &lattice, TOL_LAT);
        assumptions.push(Assumption { kind: "independence", bound: ind.l_range, passed });
    }
    let mut verdict = GaloisVerdict {
        shape: GroupShape::Unresolved(String::new()),
        assumptions,
        first: None,
        imprimitivity: None,
        rank1: None,
        seed: cfg.riccati.seed,
    };

    let first = solve(&build_first_riccati(eq, cfg.eval())?, &cfg.riccati)?;
    if let RiccatiOutcome::Solutions { unsearched, .. } = &first {
        verdict.assumptions.push(Assumption {
            kind: "deg_r_search",
            bound: cfg.riccati.d_max,
            passed: *unsearched == 0,
        });
    }
    let shape = first_pass_shape(&first);
    verdict.first = Some(first);
    if let Some(shape) = shape {
        verdict.shape = shape;
        return Ok(verdict);
    }

    if eq.a.is_identically_zero() {
        verdict.shape = GroupShape::Imprimitive;
        return Ok(verdict);
    }

    let second = solve(&build_imprimitivity_riccati(eq, cfg.eval())?, &cfg.riccati)?;
    let shape = match &second {
        RiccatiOutcome::Solutions { .. } => Some(GroupShape::Imprimitive),
        RiccatiOutcome::Inconclusive { .. } => Some(GroupShape::Unresolved(String::from(
            "imprimitivity Riccati equation has unsearched candidates with deg r > 0",
        ))),
        RiccatiOutcome::NoSolutionCertificate { .. } => None,
    };
    verdict.imprimitivity = Some(second);
    if let Some(shape) = shape {
        verdict.shape = shape;
        return Ok(verdict);
    }

    let report = rank1_group(&eq.b, eq.h, &lattice, cfg.rank1_n_max, cfg)?;
    verdict.shape = GroupShape::DetConstrained(report.group);
    verdict.rank1 = Some(report);
    Ok(verdict)
}

fn e2pi(x: C64) -> C64 {
    (C64::new(0.0, 2.0 * PI) * x).exp()
}

/// The group of `φy = by`: the least `N ≤ n_max` with `b^N = φ(g)/g` for
/// an explicit `g`, or the full torus relative to `n_max`.
pub fn rank1_group(
    b: &EllipticCoefficient,
    h: C64,
    lattice: &LatticeSpec,
    n_max: u32,
    cfg: &ClassifyConfig,
) -> Result<Rank1Report, Error> {
    if b.is_identically_zero() {
        return Err(Error::ZeroCoefficientB);
    }
    let lattice = lattice.base();
    let one = C64::new(1.0, 0.0);
    if let Some(c) = b.as_constant() {
        for n in 1..=n_max {
            let r = (c.powi(n as i32) - one).norm();
            if r <= 1e-9 {
                return Ok(Rank1Report {
                    group: Rank1Group::Finite(n),
                    witness: Some(Rank1Witness {
                        power: n,
                        quotient: ThetaQuotient::constant(&lattice, one),
                        twist: 0,
                        level: 1,
                        residual: r,
                    }),
                });
            }
        }
        return Ok(Rank1Report { group: Rank1Group::FullTorus(n_max), witness: None });
    }

    let eval = cfg.eval();
    let div_b = b.exact_divisor(&lattice, eval)?;
    for n in 1..=n_max {
        let e = match h_orbit_solve(&div_b.scale(n as i32), h, cfg.orbit_cap)? {
            Some(e) => e,
            None => continue,
        };
        if e.degree() != 0 {
            continue;
        }
        if let Some(w) = rank1_witness(b, h, &lattice, n, &e, cfg)? {
            return Ok(Rank1Report { group: Rank1Group::Finite(n), witness: Some(w) });
        }
    }
    Ok(Rank1Report { group: Rank1Group::FullTorus(n_max), witness: None })
}

fn sample_points(
    g: &ThetaQuotient,
    b: &EllipticCoefficient,
    lattice: &LatticeSpec,
    h: C64,
    cfg: &EvalConfig,
    count: usize,
) -> Vec<(C64, C64, C64, C64)> {
    let mut out = Vec::new();
    for i in 0..512 {
        if out.len() == count {
            break;
        }
        let (s, t) = r2_coords(i + 17);
        let z = lattice.from_coords(s, t);
        if g.near_support(z, 0.02) || g.near_support(z + h, 0.02) {
            continue;
        }
        if let (Ok(bz), Ok(gz), Ok(gh)) = (b.evaluate(z, cfg), g.evaluate(z, cfg), g.evaluate(z + h, cfg)) {
            out.push((z, bz, gz, gh));
        }
    }
    out
}

fn rank1_witness(
    b: &EllipticCoefficient,
    h: C64,
    lattice: &LatticeSpec,
    n: u32,
    e: &crate::divisor::Divisor,
    cfg: &ClassifyConfig,
) -> Result<Option<Rank1Witness>, Error> {
    let eval = cfg.eval();
    let factors = e.entries().iter().map(|(p, m)| (p.xi(), *m)).collect();
    let q = ThetaQuotient::new(lattice, C64::new(1.0, 0.0), factors);
    let pts = sample_points(&q, b, lattice, h, eval, 8);
    if pts.len() < 8 {
        return Err(Error::SampleDegeneracy);
    }
    // C = b^N·Q(z)/Q(z+h) has empty divisor and must be constant.
    let cs: Vec<C64> = pts.iter().map(|(_, bz, gz, gh)| bz.powi(n as i32) * gz / gh).collect();
    let c0 = cs[0];
    if cs.iter().any(|c| (c - c0).norm() > 1e-8 * c0.norm()) {
        return Ok(None);
    }
    let (_, omega) = q.monodromy_multiplier();
    let (s, t) = lattice.coords(omega);
    for k in 1..=cfg.rank1_k_max {
        let kf = k as f64;
        let (ks, kt) = (kf * s, kf * t);
        if (ks - ks.round()).abs() > 1e-9 * kf || (kt - kt.round()).abs() > 1e-9 * kf {
            continue;
        }
        let m = -(kt.round() as i64);
        if (c0 * e2pi(-h * (m as f64 / kf)) - 1.0).norm() > 1e-8 {
            continue;
        }
        let mut w = Rank1Witness { power: n, quotient: q.clone(), twist: m, level: k, residual: 0.0 };
        let mut worst = 0.0f64;
        for (z, bz, _, _) in sample_points(&q, b, lattice, h, eval, 8) {
            let lhs = bz.powi(n as i32);
            let rhs = w.evaluate(z + h, eval)? / w.evaluate(z, eval)?;
            worst = worst.max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()));
        }
        if worst <= 1e-8 {
            w.residual = worst;
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// `Δ_h²y = (A℘ + B)y` written as `φ²y − 2φy + (1 − Ah²℘ − Bh²)y = 0`.
pub fn build_lame(
    a_param: C64,
    b_param: C64,
    h: C64,
    lattice: &LatticeSpec,
    cfg: &EvalConfig,
) -> Result<DifferenceEquation, Error> {
    if a_param.norm() == 0.0 {
        return Err(Error::InvalidParameter("A must be nonzero"));
    }
    let lattice = lattice.base();
    if let Some(n) = torsion_order(h, &lattice, 64, TOL_LAT) {
        return Err(Error::NonTorsionViolated(n));
    }
    let alpha = -a_param * h * h;
    let beta = C64::new(1.0, 0.0) - b_param * h * h;
    let z0 = wp_invert(-beta / alpha, &lattice, cfg)?;
    Ok(DifferenceEquation {
        lattice,
        h,
        a: EllipticCoefficient::Constant(C64::new(-2.0, 0.0)),
        b: EllipticCoefficient::WpLinear { alpha, beta, lattice },
        independence: Some(IndependenceHypothesis { z0, l_range: 8 }),
    })
}

/// `a = α℘ + β` and a constant `b`.
pub fn build_family7(
    b_const: C64,
    alpha: C64,
    beta: C64,
    h: C64,
    lattice: &LatticeSpec,
    cfg: &EvalConfig,
) -> Result<DifferenceEquation, Error> {
    if b_const.norm() == 0.0 {
        return Err(Error::ZeroCoefficientB);
    }
    if alpha.norm() == 0.0 {
        return Err(Error::InvalidParameter("alpha must be nonzero"));
    }
    let lattice = lattice.base();
    if let Some(n) = torsion_order(h, &lattice, 64, TOL_LAT) {
        return Err(Error::NonTorsionViolated(n));
    }
    let z0 = wp_invert(-beta / alpha, &lattice, cfg)?;
    Ok(DifferenceEquation {
        lattice,
        h,
        a: EllipticCoefficient::WpLinear { alpha, beta, lattice },
        b: EllipticCoefficient::Constant(b_const),
        independence: Some(IndependenceHypothesis { z0, l_range: 16 }),
    })
}
