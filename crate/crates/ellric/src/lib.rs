//! Problem and verdict documents plus the command implementations behind the
//! `ellric` binary.

pub mod doc;
pub mod expr;
pub mod selftest;

use std::time::Instant;

use ellric_core::riccati::{build_first_riccati, build_imprimitivity_riccati, solve};
use ellric_core::{classify, RiccatiConfig};

use doc::{DocError, ProblemDocument, RiccatiDocument, Timing, VerdictDocument};

pub const SEED_ENV: &str = "ELLRIC_SEED";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Document(#[from] DocError),
    #[error(transparent)]
    Core(#[from] ellric_core::Error),
}

pub fn default_seed() -> u64 {
    RiccatiConfig::default().seed
}

/// Flag, then document, then environment, then the built-in default.
pub fn resolve_seed(flag: Option<u64>, doc: &ProblemDocument, env: Option<&str>) -> Result<u64, DocError> {
    if let Some(s) = flag.or(doc.options.seed) {
        return Ok(s);
    }
    match env {
        Some(v) => parse_seed(v).ok_or_else(|| DocError::Field {
            field: SEED_ENV.to_string(),
            message: format!("`{v}` is not an unsigned 64-bit integer"),
        }),
        None => Ok(default_seed()),
    }
}

/// Decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(s: &str) -> Option<u64> {
    let s = s.trim().replace('_', "");
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

pub fn classify_document(doc: &ProblemDocument, seed: u64) -> Result<VerdictDocument, RunError> {
    let start = Instant::now();
    doc.validate()?;
    let cfg = doc.config(seed);
    let eq = doc.equation(&cfg)?;
    let verdict = classify(&eq, &cfg)?;
    let mut out = VerdictDocument::from_verdict(&verdict);
    out.timing = Some(Timing { elapsed_ms: start.elapsed().as_secs_f64() * 1e3 });
    Ok(out)
}

/// A single Riccati pass, without the rest of the pipeline.
pub fn riccati_document(doc: &ProblemDocument, seed: u64, imprimitivity: bool) -> Result<RiccatiDocument, RunError> {
    let start = Instant::now();
    doc.validate()?;
    let cfg = doc.config(seed);
    let eq = doc.equation(&cfg)?;
    let prob = if imprimitivity {
        build_imprimitivity_riccati(&eq, cfg.eval())?
    } else {
        build_first_riccati(&eq, cfg.eval())?
    };
    let outcome = solve(&prob, &cfg.riccati)?;
    let mut out = RiccatiDocument::new(&prob, &outcome, seed);
    out.timing = Some(Timing { elapsed_ms: start.elapsed().as_secs_f64() * 1e3 });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ellric_core::C64;

    #[test]
    fn seed_precedence() {
        let mut doc =
            ProblemDocument::lame(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.31, 0.17), C64::new(0.0, 1.0))
                .unwrap();
        assert_eq!(resolve_seed(None, &doc, None).unwrap(), default_seed());
        assert_eq!(resolve_seed(None, &doc, Some("0x10")).unwrap(), 16);
        doc.options.seed = Some(5);
        assert_eq!(resolve_seed(None, &doc, Some("16")).unwrap(), 5);
        assert_eq!(resolve_seed(Some(9), &doc, Some("16")).unwrap(), 9);
        doc.options.seed = None;
        assert!(resolve_seed(None, &doc, Some("many")).is_err());
    }
}

/// `%.{digits}g`-style rendering of a real number.
pub fn format_real(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `a+bi` with 15 significant digits per part; zero parts are omitted.
pub fn format_complex(c: ellric_core::C64) -> String {
    let (re, im) = (format_real(c.re, 15), format_real(c.im.abs(), 15));
    match (c.re == 0.0, c.im == 0.0) {
        (_, true) => re,
        (true, false) => format!("{}{im}i", if c.im < 0.0 { "-" } else { "" }),
        (false, false) => format!("{re}{}{im}i", if c.im < 0.0 { '-' } else { '+' }),
    }
}
