//! Theta quotients `c·e^{2iπ·m·z/k}·Π θₖ(z − ξ)^{n_ξ}` and the elliptic
//! coefficients built from them.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::divisor::Divisor;
use crate::lattice::LatticeSpec;
use crate::sampling::r2_coords;
use crate::special::{theta_k, wp_invert, wp_k, EvalConfig};
use crate::{Error, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn e2pi(x: C64) -> C64 {
    (I * (2.0 * PI) * x).exp()
}

/// `constant · e^{2iπ·twist·z/k} · Π θₖ(z − ξ)^{mult}`.
///
/// The exponential factor is needed to make a degree-zero product whose
/// weight is a nonzero lattice vector `k(a + bτ)` genuinely `kΛ`-periodic.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaQuotient {
    lattice: LatticeSpec,
    constant: C64,
    factors: Vec<(C64, i32)>,
    twist: i64,
}

impl ThetaQuotient {
    pub fn constant(lattice: &LatticeSpec, c: C64) -> Self {
        Self { lattice: *lattice, constant: c, factors: Vec::new(), twist: 0 }
    }

    pub fn new(lattice: &LatticeSpec, constant: C64, factors: Vec<(C64, i32)>) -> Self {
        Self::with_twist(lattice, constant, factors, 0)
    }

    pub fn with_twist(lattice: &LatticeSpec, constant: C64, factors: Vec<(C64, i32)>, twist: i64) -> Self {
        let factors = factors.into_iter().filter(|f| f.1 != 0).collect();
        Self { lattice: *lattice, constant, factors, twist }
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn constant_factor(&self) -> C64 {
        self.constant
    }

    pub fn factors(&self) -> &[(C64, i32)] {
        &self.factors
    }

    pub fn twist(&self) -> i64 {
        self.twist
    }

    pub fn set_constant(&mut self, c: C64) {
        self.constant = c;
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { constant: self.constant * c, ..self.clone() }
    }

    pub fn divisor(&self) -> Divisor {
        Divisor::from_points(&self.lattice, self.factors.iter().copied())
    }

    pub fn degree(&self) -> i64 {
        self.factors.iter().map(|f| f.1 as i64).sum()
    }

    /// Smallest lattice-coordinate distance from `z` to a zero or pole.
    pub fn support_distance(&self, z: C64) -> f64 {
        self.factors.iter().map(|(xi, _)| self.lattice.distance_to_lattice(z - xi)).fold(f64::INFINITY, f64::min)
    }

    pub fn near_support(&self, z: C64, tol: f64) -> bool {
        self.support_distance(z) < tol
    }

    pub fn evaluate(&self, z: C64, cfg: &EvalConfig) -> Result<C64, Error> {
        let k = self.lattice.level() as f64;
        let mut v = self.constant;
        if self.twist != 0 {
            v *= e2pi(z * (self.twist as f64 / k));
        }
        for (xi, m) in &self.factors {
            if *m < 0 {
                let d = self.lattice.distance_to_lattice(z - xi);
                if d < cfg.pole_guard {
                    return Err(Error::PoleProximity { distance: d });
                }
            }
            let t = theta_k(z - xi, &self.lattice, cfg)?;
            v *= t.powi(*m);
        }
        Ok(v)
    }

    pub fn multiply(&self, other: &ThetaQuotient) -> Result<ThetaQuotient, Error> {
        if self.lattice.level() != other.lattice.level() {
            return Err(Error::LevelMismatch(self.lattice.level(), other.lattice.level()));
        }
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Ok(Self::with_twist(&self.lattice, self.constant * other.constant, cancel(factors), self.twist + other.twist))
    }

    pub fn invert(&self) -> ThetaQuotient {
        Self {
            lattice: self.lattice,
            constant: self.constant.inv(),
            factors: self.factors.iter().map(|(x, m)| (*x, -m)).collect(),
            twist: -self.twist,
        }
    }

    /// `z ↦ f(z + h)`.
    pub fn phi_shift(&self, h: C64) -> ThetaQuotient {
        let k = self.lattice.level() as f64;
        let mut constant = self.constant;
        if self.twist != 0 {
            constant *= e2pi(h * (self.twist as f64 / k));
        }
        Self {
            lattice: self.lattice,
            constant,
            factors: self.factors.iter().map(|(x, m)| (*x - h, *m)).collect(),
            twist: self.twist,
        }
    }

    /// `(deg, ω)` with `f(z + kτ) = (−1)^deg e^{2iπω/k} e^{−2iπ·deg·z/k} f(z)`.
    pub fn monodromy_multiplier(&self) -> (i64, C64) {
        let k = self.lattice.level() as f64;
        let omega = self.factors.iter().fold(C64::new(0.0, 0.0), |acc, (x, m)| acc + x * *m as f64)
            + self.lattice.tau() * (k * self.twist as f64);
        (self.degree(), omega)
    }

    /// Numeric `kΛ`-periodicity test at three points away from the support.
    pub fn is_elliptic(&self, tol: f64, cfg: &EvalConfig) -> bool {
        if self.degree() != 0 {
            return false;
        }
        let k = self.lattice.level() as f64;
        let period = self.lattice.tau() * k;
        let mut checked = 0;
        for i in 0..64 {
            if checked == 3 {
                break;
            }
            let (s, t) = r2_coords(i);
            let z = self.lattice.from_coords(s, t);
            if self.near_support(z, 0.02) || self.near_support(z + period, 0.02) {
                continue;
            }
            let (a, b) = match (self.evaluate(z, cfg), self.evaluate(z + period, cfg)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => continue,
            };
            if (b / a - 1.0).norm() > tol {
                return false;
            }
            checked += 1;
        }
        checked == 3
    }
}

/// Merges repeated `ξ` entries; representatives must match exactly.
fn cancel(factors: Vec<(C64, i32)>) -> Vec<(C64, i32)> {
    let mut out: Vec<(C64, i32)> = Vec::with_capacity(factors.len());
    for (x, m) in factors {
        if let Some(e) = out.iter_mut().find(|e| e.0 == x) {
            e.1 += m;
        } else {
            out.push((x, m));
        }
    }
    out.retain(|e| e.1 != 0);
    out
}

/// The elliptic function with divisor `d` and constant 1.
///
/// Factors use canonical representatives; if their weight is `k(a + bτ)` the
/// twist `−b` restores periodicity along `kτ`.
pub fn elliptic_from_divisor(d: &Divisor) -> Result<ThetaQuotient, Error> {
    let lattice = *d.lattice();
    if d.degree() != 0 {
        return Err(Error::NotPrincipal);
    }
    let omega = d.weight_representative();
    let (a, b) = lattice.coords(omega);
    if (a - a.round()).abs() > crate::lattice::TOL_LAT * 16.0 || (b - b.round()).abs() > crate::lattice::TOL_LAT * 16.0
    {
        return Err(Error::NotPrincipal);
    }
    let factors = d.entries().iter().map(|(p, m)| (p.xi(), *m)).collect();
    Ok(ThetaQuotient::with_twist(&lattice, C64::new(1.0, 0.0), factors, -(b.round() as i64)))
}

/// Theta-quotient form of `α℘ₖ + β` with its zero `z0`.
pub fn from_wp_linear(
    alpha: C64,
    beta: C64,
    lattice: &LatticeSpec,
    cfg: &EvalConfig,
) -> Result<(ThetaQuotient, C64), Error> {
    if alpha.norm() == 0.0 {
        return Err(Error::InvalidParameter("alpha must be nonzero"));
    }
    let z0 = wp_invert(-beta / alpha, lattice, cfg)?;
    for root in [z0, lattice.reduce(-z0).xi()] {
        if let Some(q) = calibrate_wp(alpha, beta, root, lattice, cfg)? {
            return Ok((q, root));
        }
    }
    Err(Error::CalibrationFailed)
}

fn calibrate_wp(
    alpha: C64,
    beta: C64,
    z0: C64,
    lattice: &LatticeSpec,
    cfg: &EvalConfig,
) -> Result<Option<ThetaQuotient>, Error> {
    let zero = C64::new(0.0, 0.0);
    let d = Divisor::from_points(lattice, [(z0, 1), (-z0, 1), (zero, -2)]);
    let mut q = elliptic_from_divisor(&d)?;
    let target = |z: C64| wp_k(z, lattice, cfg).map(|p| alpha * p + beta);
    let mut calibrated = false;
    let mut verified = 0;
    for i in 0..256 {
        if verified == 8 {
            break;
        }
        let (s, t) = r2_coords(i);
        let z = lattice.from_coords(s, t);
        if q.near_support(z, 0.05) {
            continue;
        }
        let want = target(z)?;
        let got = q.evaluate(z, cfg)?;
        if !calibrated {
            q.set_constant(want / got);
            calibrated = true;
            continue;
        }
        if (got - want).norm() > 1e-7 * want.norm().max(got.norm()) {
            return Ok(None);
        }
        verified += 1;
    }
    Ok(if verified == 8 { Some(q) } else { None })
}

/// A factor `base(z + shift)^power` inside a product.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedFactor {
    pub base: EllipticCoefficient,
    pub shift: C64,
    pub power: i32,
}

/// `coeff · Π base(z + shift)^power`.
#[derive(Clone, Debug, PartialEq)]
pub struct Product {
    pub coeff: C64,
    pub factors: Vec<ShiftedFactor>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EllipticCoefficient {
    Constant(C64),
    /// `α·℘ₖ(z) + β` where `k` is the level of `lattice`.
    WpLinear {
        alpha: C64,
        beta: C64,
        lattice: LatticeSpec,
    },
    Quotient(ThetaQuotient),
    SumOfProducts(Vec<Product>),
}

impl EllipticCoefficient {
    pub fn is_identically_zero(&self) -> bool {
        match self {
            Self::Constant(c) => c.norm() == 0.0,
            Self::WpLinear { alpha, beta, .. } => alpha.norm() == 0.0 && beta.norm() == 0.0,
            Self::Quotient(q) => q.constant_factor().norm() == 0.0,
            Self::SumOfProducts(ps) => ps.iter().all(|p| p.coeff.norm() == 0.0),
        }
    }

    pub fn as_constant(&self) -> Option<C64> {
        match self {
            Self::Constant(c) => Some(*c),
            Self::WpLinear { alpha, beta, .. } if alpha.norm() == 0.0 => Some(*beta),
            Self::Quotient(q) if q.factors().is_empty() && q.twist() == 0 => Some(q.constant_factor()),
            _ => None,
        }
    }

    pub fn evaluate(&self, z: C64, cfg: &EvalConfig) -> Result<C64, Error> {
        match self {
            Self::Constant(c) => Ok(*c),
            Self::WpLinear { alpha, beta, lattice } => {
                if alpha.norm() == 0.0 {
                    return Ok(*beta);
                }
                Ok(*alpha * wp_k(z, lattice, cfg)? + *beta)
            }
            Self::Quotient(q) => q.evaluate(z, cfg),
            Self::SumOfProducts(ps) => {
                let mut total = C64::new(0.0, 0.0);
                for p in ps {
                    let mut v = p.coeff;
                    for f in &p.factors {
                        let b = f.base.evaluate(z + f.shift, cfg)?;
                        if f.power < 0 && b.norm() == 0.0 {
                            return Err(Error::PoleProximity { distance: 0.0 });
                        }
                        v *= b.powi(f.power);
                    }
                    total += v;
                }
                Ok(total)
            }
        }
    }

    /// Level at which the coefficient is naturally periodic.
    fn native_level(&self) -> u32 {
        match self {
            Self::Constant(_) => 1,
            Self::WpLinear { lattice, .. } => lattice.level(),
            Self::Quotient(q) => q.lattice().level(),
            Self::SumOfProducts(ps) => {
                ps.iter().flat_map(|p| p.factors.iter().map(|f| f.base.native_level())).fold(1, lcm)
            }
        }
    }

    fn express(d: Divisor, lattice: &LatticeSpec) -> Result<Divisor, Error> {
        if d.level() == lattice.level() {
            Ok(d)
        } else {
            d.lift(lattice.level())
        }
    }

    /// The divisor of the function on `ℂ/kΛ`, `k` the level of `lattice`.
    ///
    /// Only sums with a single product have one; other sums give
    /// `UnsupportedCoefficient`.
    pub fn exact_divisor(&self, lattice: &LatticeSpec, cfg: &EvalConfig) -> Result<Divisor, Error> {
        let native = lattice.at_level(self.native_level());
        let d = match self {
            Self::Constant(c) => {
                if c.norm() == 0.0 {
                    return Err(Error::UnsupportedCoefficient);
                }
                Divisor::zero(&native)
            }
            Self::WpLinear { alpha, beta, lattice: l } => {
                if alpha.norm() == 0.0 {
                    return Self::Constant(*beta).exact_divisor(lattice, cfg);
                }
                let z0 = wp_invert(-*beta / *alpha, l, cfg)?;
                Divisor::from_points(l, [(z0, 1), (-z0, 1), (C64::new(0.0, 0.0), -2)])
            }
            Self::Quotient(q) => q.divisor(),
            Self::SumOfProducts(ps) => {
                if ps.len() != 1 {
                    return Err(Error::UnsupportedCoefficient);
                }
                let mut acc = Divisor::zero(&native);
                for f in &ps[0].factors {
                    let d = f.base.exact_divisor(&native, cfg)?;
                    acc = acc.add(&d.shift(f.shift).scale(f.power))?;
                }
                acc
            }
        };
        Self::express(d, lattice)
    }

    /// An effective divisor dominating the pole divisor, on `ℂ/kΛ`.
    pub fn pole_bound(&self, lattice: &LatticeSpec, cfg: &EvalConfig) -> Result<Divisor, Error> {
        let native = lattice.at_level(self.native_level());
        let d = match self {
            Self::Constant(_) => Divisor::zero(&native),
            Self::WpLinear { alpha, lattice: l, .. } => {
                if alpha.norm() == 0.0 {
                    Divisor::zero(l)
                } else {
                    Divisor::point(l, C64::new(0.0, 0.0), 2)
                }
            }
            Self::Quotient(q) => q.divisor().negative_part(),
            Self::SumOfProducts(ps) => {
                let mut acc = Divisor::zero(&native);
                for p in ps {
                    if p.coeff.norm() == 0.0 {
                        continue;
                    }
                    acc = acc.join(&product_pole_bound(p, &native, cfg)?)?;
                }
                acc
            }
        };
        Self::express(d, lattice)
    }
}

fn product_pole_bound(p: &Product, lattice: &LatticeSpec, cfg: &EvalConfig) -> Result<Divisor, Error> {
    let mut acc = Divisor::zero(lattice);
    for f in &p.factors {
        let part = if f.power > 0 {
            f.base.pole_bound(lattice, cfg)?.scale(f.power)
        } else if f.power < 0 {
            f.base.exact_divisor(lattice, cfg)?.positive_part().scale(-f.power)
        } else {
            continue;
        };
        acc = acc.add(&part.shift(f.shift))?;
    }
    Ok(acc)
}

fn lcm(a: u32, b: u32) -> u32 {
    fn gcd(a: u32, b: u32) -> u32 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Join of the pole bounds of all coefficients.
pub fn common_denominator(
    coeffs: &[&EllipticCoefficient],
    lattice: &LatticeSpec,
    cfg: &EvalConfig,
) -> Result<Divisor, Error> {
    let mut acc = Divisor::zero(lattice);
    for c in coeffs {
        acc = acc.join(&c.pole_bound(lattice, cfg)?)?;
    }
    Ok(acc)
}
