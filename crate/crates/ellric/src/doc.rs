//! JSON problem and verdict documents, schema version "1".
//!
//! Complex numbers are `[re, im]` pairs everywhere.

use ellric_core::classify::{IndependenceHypothesis, Rank1Report, Rank1Witness};
use ellric_core::riccati::{RiccatiKind, VerifiedSolution};
use ellric_core::special::wp_invert;
use ellric_core::{
    ClassifyConfig, DifferenceEquation, Divisor, EllipticCoefficient, GaloisVerdict, GroupShape, LatticeSpec,
    Rank1Group, RiccatiCandidate, RiccatiOutcome, RiccatiProblem, ThetaQuotient, C64,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

pub type Complex = [f64; 2];

pub fn to_c64(c: Complex) -> C64 {
    C64::new(c[0], c[1])
}

pub fn from_c64(c: C64) -> Complex {
    [c.re, c.im]
}

/// A document that failed validation, with the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DocError {
    #[error("{0}")]
    Json(String),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
}

impl DocError {
    fn field(field: &str, message: impl Into<String>) -> Self {
        Self::Field { field: field.to_string(), message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub schema_version: String,
    pub tau: Complex,
    pub h: Complex,
    pub a: CoefficientSpec,
    pub b: CoefficientSpec,
    #[serde(default)]
    pub options: Options,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    Constant {
        value: Complex,
    },
    /// `alpha·℘ + beta` on the base lattice.
    WpLinear {
        alpha: Complex,
        beta: Complex,
    },
    /// `constant · e^{2iπ·twist·z} · Π θ(z − xi)^mult` on the base lattice.
    ThetaQuotient {
        #[serde(default = "one")]
        constant: Complex,
        factors: Vec<FactorSpec>,
        #[serde(default)]
        twist: i64,
    },
}

fn one() -> Complex {
    [1.0, 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub xi: Complex,
    pub mult: i32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumeration_cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_res: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion_n_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank1_n_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub independence: Option<IndependenceSpec>,
}

/// `z0` defaults to the zero of whichever coefficient is `wp_linear` (`b` first).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndependenceSpec {
    pub l_range: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Complex>,
}

impl ProblemDocument {
    pub fn parse(text: &str) -> Result<Self, DocError> {
        let doc: Self = serde_json::from_str(text).map_err(|e| DocError::Json(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), DocError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(DocError::field("schema_version", format!("expected \"{SCHEMA_VERSION}\"")));
        }
        if !self.tau[0].is_finite() || !self.tau[1].is_finite() || self.tau[1] <= 0.0 {
            return Err(DocError::field("tau", "imaginary part must be positive"));
        }
        if !self.h.iter().all(|x| x.is_finite()) {
            return Err(DocError::field("h", "must be finite"));
        }
        if let CoefficientSpec::Constant { value } = &self.b {
            if value[0] == 0.0 && value[1] == 0.0 {
                return Err(DocError::field("b.value", "b must not be the zero constant"));
            }
        }
        for (name, c) in [("a", &self.a), ("b", &self.b)] {
            c.check(name)?;
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<LatticeSpec, DocError> {
        LatticeSpec::unit(to_c64(self.tau)).map_err(|e| DocError::field("tau", e.to_string()))
    }

    pub fn config(&self, seed: u64) -> ClassifyConfig {
        let mut cfg = ClassifyConfig::default();
        let o = &self.options;
        cfg.riccati.seed = seed;
        if let Some(v) = o.d_max {
            cfg.riccati.d_max = v;
        }
        if let Some(v) = o.enumeration_cap {
            cfg.riccati.enumeration_cap = v;
        }
        if let Some(v) = o.tol_c {
            cfg.riccati.tol_c = v;
        }
        if let Some(v) = o.tol_res {
            cfg.riccati.tol_res = v;
        }
        if let Some(v) = o.verify_samples {
            cfg.riccati.verify_samples = v;
        }
        if let Some(v) = o.torsion_n_max {
            cfg.torsion_n_max = v;
            cfg.orbit_cap = (v / 2).max(1);
        }
        if let Some(v) = o.rank1_n_max {
            cfg.rank1_n_max = v;
        }
        cfg
    }

    pub fn equation(&self, cfg: &ClassifyConfig) -> Result<DifferenceEquation, DocError> {
        let lattice = self.lattice()?;
        let a = self.a.to_coefficient(&lattice);
        let b = self.b.to_coefficient(&lattice);
        let mut eq = DifferenceEquation::new(lattice, to_c64(self.h), a, b);
        if let Some(ind) = &self.options.independence {
            let z0 = match ind.z0 {
                Some(z) => to_c64(z),
                None => {
                    let (alpha, beta) = match (&self.b, &self.a) {
                        (CoefficientSpec::WpLinear { alpha, beta }, _)
                        | (_, CoefficientSpec::WpLinear { alpha, beta }) => (to_c64(*alpha), to_c64(*beta)),
                        _ => {
                            return Err(DocError::field(
                                "options.independence.z0",
                                "required when neither coefficient is wp_linear",
                            ))
                        }
                    };
                    wp_invert(-beta / alpha, &lattice, cfg.eval())
                        .map_err(|e| DocError::field("options.independence.z0", e.to_string()))?
                }
            };
            eq.independence = Some(IndependenceHypothesis { z0, l_range: ind.l_range });
        }
        Ok(eq)
    }

    /// `Δ_h²y = (A℘ + B)y` on `ℤ + τℤ`.
    pub fn lame(a_param: C64, b_param: C64, h: C64, tau: C64) -> Result<Self, DocError> {
        if a_param.norm() == 0.0 {
            return Err(DocError::field("--lame", "A must be nonzero"));
        }
        let one = C64::new(1.0, 0.0);
        Ok(Self {
            schema_version: SCHEMA_VERSION.to_string(),
            tau: from_c64(tau),
            h: from_c64(h),
            a: CoefficientSpec::Constant { value: [-2.0, 0.0] },
            b: CoefficientSpec::WpLinear { alpha: from_c64(-a_param * h * h), beta: from_c64(one - b_param * h * h) },
            options: Options { independence: Some(IndependenceSpec { l_range: 8, z0: None }), ..Options::default() },
        })
    }

    /// `a = α℘ + β` with constant `b`.
    pub fn family7(b_const: C64, alpha: C64, beta: C64, h: C64, tau: C64) -> Result<Self, DocError> {
        if alpha.norm() == 0.0 {
            return Err(DocError::field("--family7", "alpha must be nonzero"));
        }
        if b_const.norm() == 0.0 {
            return Err(DocError::field("--family7", "b must be nonzero"));
        }
        Ok(Self {
            schema_version: SCHEMA_VERSION.to_string(),
            tau: from_c64(tau),
            h: from_c64(h),
            a: CoefficientSpec::WpLinear { alpha: from_c64(alpha), beta: from_c64(beta) },
            b: CoefficientSpec::Constant { value: from_c64(b_const) },
            options: Options { independence: Some(IndependenceSpec { l_range: 16, z0: None }), ..Options::default() },
        })
    }
}

impl CoefficientSpec {
    fn check(&self, name: &str) -> Result<(), DocError> {
        let finite = |c: &Complex| c.iter().all(|x| x.is_finite());
        let ok = match self {
            Self::Constant { value } => finite(value),
            Self::WpLinear { alpha, beta } => finite(alpha) && finite(beta),
            Self::ThetaQuotient { constant, factors, .. } => finite(constant) && factors.iter().all(|f| finite(&f.xi)),
        };
        if ok {
            Ok(())
        } else {
            Err(DocError::field(name, "all numbers must be finite"))
        }
    }

    pub fn to_coefficient(&self, lattice: &LatticeSpec) -> EllipticCoefficient {
        match self {
            Self::Constant { value } => EllipticCoefficient::Constant(to_c64(*value)),
            Self::WpLinear { alpha, beta } => {
                EllipticCoefficient::WpLinear { alpha: to_c64(*alpha), beta: to_c64(*beta), lattice: *lattice }
            }
            Self::ThetaQuotient { constant, factors, twist } => {
                EllipticCoefficient::Quotient(ThetaQuotient::with_twist(
                    lattice,
                    to_c64(*constant),
                    factors.iter().map(|f| (to_c64(f.xi), f.mult)).collect(),
                    *twist,
                ))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisorDoc {
    pub level: u32,
    pub points: Vec<PointDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointDoc {
    pub xi: Complex,
    pub mult: i32,
}

impl From<&Divisor> for DivisorDoc {
    fn from(d: &Divisor) -> Self {
        Self {
            level: d.level(),
            points: d.entries().iter().map(|(p, m)| PointDoc { xi: from_c64(p.xi()), mult: *m }).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateDoc {
    pub p_div: DivisorDoc,
    pub q_div: DivisorDoc,
    pub deg_r: u32,
}

impl From<&RiccatiCandidate> for CandidateDoc {
    fn from(c: &RiccatiCandidate) -> Self {
        Self { p_div: (&c.p_div).into(), q_div: (&c.q_div).into(), deg_r: c.deg_r }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub constant: Complex,
    pub divisor: DivisorDoc,
    pub twist: i64,
    pub max_residual: f64,
    pub samples: usize,
    pub seed: u64,
}

impl From<&VerifiedSolution> for SolutionDoc {
    fn from(s: &VerifiedSolution) -> Self {
        Self {
            constant: from_c64(s.constant),
            divisor: (&s.divisor).into(),
            twist: s.u.twist(),
            max_residual: s.max_residual,
            samples: s.samples,
            seed: s.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDoc {
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_bound: Option<DivisorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_bound: Option<DivisorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refuted: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub solutions: Vec<SolutionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unsearched: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub surviving: Vec<CandidateDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surviving_count: Option<u64>,
}

impl From<&RiccatiOutcome> for OutcomeDoc {
    fn from(o: &RiccatiOutcome) -> Self {
        let mut doc = Self {
            tag: o.tag().to_string(),
            p_bound: None,
            q_bound: None,
            d_max: None,
            refuted: None,
            solutions: Vec::new(),
            unsearched: None,
            surviving: Vec::new(),
            surviving_count: None,
        };
        match o {
            RiccatiOutcome::NoSolutionCertificate { p_bound, q_bound, d_max, refuted } => {
                doc.p_bound = Some(p_bound.into());
                doc.q_bound = Some(q_bound.into());
                doc.d_max = Some(*d_max);
                doc.refuted = Some(*refuted);
            }
            RiccatiOutcome::Solutions { solutions, unsearched } => {
                doc.solutions = solutions.iter().map(Into::into).collect();
                doc.unsearched = Some(*unsearched);
            }
            RiccatiOutcome::Inconclusive { surviving, surviving_count, refuted } => {
                doc.surviving = surviving.iter().map(Into::into).collect();
                doc.surviving_count = Some(*surviving_count);
                doc.refuted = Some(*refuted);
            }
        }
        doc
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rank1Doc {
    /// `"finite"` or `"full_torus"`.
    pub group: String,
    /// The order for a finite group, the search bound otherwise.
    pub value: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub power: u32,
    pub level: u32,
    pub twist: i64,
    pub constant: Complex,
    pub factors: Vec<PointDoc>,
    pub residual: f64,
}

fn rank1_parts(g: &Rank1Group) -> (String, u32) {
    match g {
        Rank1Group::Finite(n) => ("finite".to_string(), *n),
        Rank1Group::FullTorus(n) => ("full_torus".to_string(), *n),
    }
}

impl From<&Rank1Report> for Rank1Doc {
    fn from(r: &Rank1Report) -> Self {
        let (group, value) = rank1_parts(&r.group);
        Self { group, value, witness: r.witness.as_ref().map(Into::into) }
    }
}

impl From<&Rank1Witness> for WitnessDoc {
    fn from(w: &Rank1Witness) -> Self {
        Self {
            power: w.power,
            level: w.level,
            twist: w.twist,
            constant: from_c64(w.quotient.constant_factor()),
            factors: w.quotient.factors().iter().map(|(x, m)| PointDoc { xi: from_c64(*x), mult: *m }).collect(),
            residual: w.residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictTag {
    pub tag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionDoc {
    pub kind: String,
    pub bound: u32,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first: Option<OutcomeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imprimitivity: Option<OutcomeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank1: Option<Rank1Doc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictDocument {
    pub schema_version: String,
    pub verdict: VerdictTag,
    pub group_rendering: String,
    pub assumptions: Vec<AssumptionDoc>,
    pub certificates: Certificates,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl VerdictDocument {
    pub fn from_verdict(v: &GaloisVerdict) -> Self {
        let mut tag = VerdictTag { tag: v.shape.tag().to_string(), group: None, value: None, evidence: None };
        match &v.shape {
            GroupShape::DetConstrained(g) => {
                let (group, value) = rank1_parts(g);
                tag.group = Some(group);
                tag.value = Some(value);
            }
            GroupShape::Unresolved(why) => tag.evidence = Some(why.clone()),
            _ => {}
        }
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            verdict: tag,
            group_rendering: v.shape.render(),
            assumptions: v
                .assumptions
                .iter()
                .map(|a| AssumptionDoc { kind: a.kind.to_string(), bound: a.bound, passed: a.passed })
                .collect(),
            certificates: Certificates {
                seed: v.seed,
                first: v.first.as_ref().map(Into::into),
                imprimitivity: v.imprimitivity.as_ref().map(Into::into),
                rank1: v.rank1.as_ref().map(Into::into),
            },
            timing: None,
        }
    }

    pub fn is_definite(&self) -> bool {
        self.verdict.tag != "unresolved"
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    /// The document with its timing removed, for replay comparisons.
    pub fn replay_key(&self) -> String {
        Self { timing: None, ..self.clone() }.to_json()
    }
}

/// Output of the `riccati` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiccatiDocument {
    pub schema_version: String,
    pub kind: String,
    pub step: Complex,
    /// Bounds on the base lattice and lifted to level 2.
    pub p2_base: DivisorDoc,
    pub p3_base: DivisorDoc,
    pub p2: DivisorDoc,
    pub q_bound: DivisorDoc,
    pub seed: u64,
    pub outcome: OutcomeDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl RiccatiDocument {
    pub fn new(prob: &RiccatiProblem, outcome: &RiccatiOutcome, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            kind: match prob.kind {
                RiccatiKind::First => "first",
                RiccatiKind::Imprimitivity => "imprimitivity",
            }
            .to_string(),
            step: from_c64(prob.step),
            p2_base: (&prob.p2_base).into(),
            p3_base: (&prob.p3_base).into(),
            p2: (&prob.p2).into(),
            q_bound: (&prob.q_bound).into(),
            seed,
            outcome: outcome.into(),
            timing: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }
}
