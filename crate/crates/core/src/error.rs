use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("series did not converge within {max_terms} terms")]
    NonConvergent { max_terms: usize },
    #[error("evaluation point within {distance:.3e} of a pole")]
    PoleProximity { distance: f64 },
    #[error("Newton iteration found no preimage from any start")]
    NoConvergence,
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),
    #[error("enumeration would produce {count} items (cap {cap})")]
    CombinatorialBlowup { count: f64, cap: f64 },
    #[error("shift is torsion of order {0} at this level")]
    OrbitCapExceeded(u32),
    #[error("constant calibration failed for both preimages")]
    CalibrationFailed,
    #[error("divisor is not the divisor of an elliptic function")]
    NotPrincipal,
    #[error("coefficient has no exact divisor")]
    UnsupportedCoefficient,
    #[error("coefficient a is identically zero")]
    ZeroCoefficientA,
    #[error("coefficient b is identically zero")]
    ZeroCoefficientB,
    #[error("could not draw usable sample points")]
    SampleDegeneracy,
    #[error("shift is a torsion point of order {0}")]
    NonTorsionViolated(u32),
}
