//! θ, θₖ, ℘, ℘′ and the inverse of ℘.
//!
//! θ is summed from its q-series after pulling the argument back to the strip
//! `|Im z| ≤ Im τ / 2` with the exact quasi-periodicity multiplier. ℘ and ℘′
//! use the Fourier expansion around the same strip: the `n = 0` term is the
//! closed form `π²/sin²(πz)` and the rest are geometric tails.

use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::lattice::LatticeSpec;
use crate::{Error, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Truncation and pole-guard settings shared by all kernels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalConfig {
    /// Mixed absolute/relative tolerance for series tails.
    pub target_eps: f64,
    /// Hard cap on the number of series terms or product factors.
    pub max_terms: usize,
    /// Lattice-coordinate distance below which ℘ refuses to evaluate.
    pub pole_guard: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { target_eps: 1e-15, max_terms: 64, pole_guard: 1e-3 }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.target_eps > 0.0 && self.target_eps <= 1e-6) {
            return Err(Error::InvalidConfig("target_eps must lie in (0, 1e-6]"));
        }
        if self.max_terms < 8 {
            return Err(Error::InvalidConfig("max_terms must be at least 8"));
        }
        if !(self.pole_guard > 0.0 && self.pole_guard < 0.25) {
            return Err(Error::InvalidConfig("pole_guard must lie in (0, 0.25)"));
        }
        Ok(())
    }
}

fn cexp(z: C64) -> C64 {
    z.exp()
}

/// `e^{2iπ x}`.
fn e2pi(x: C64) -> C64 {
    cexp(I * (2.0 * PI) * x)
}

/// Series for θ at a point already inside the strip.
fn theta_series(z: C64, tau: C64, cfg: &EvalConfig) -> Result<C64, Error> {
    // Terms m and 1 − m share the quadratic exponent m(m − 1).
    let mut sum = C64::new(0.0, 0.0);
    for m in 1..=cfg.max_terms {
        let mf = m as f64;
        let quad = cexp(I * PI * (mf * (mf - 1.0)) * tau);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let pair = quad * sign * (e2pi(z * mf) - e2pi(z * (1.0 - mf)));
        sum += pair;
        if m >= 2 && pair.norm() < cfg.target_eps * (1.0 + sum.norm()) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergent { max_terms: cfg.max_terms })
}

/// θ(z) for the base lattice `ℤ + τℤ`; the level of `lattice` is ignored.
pub fn theta(z: C64, lattice: &LatticeSpec, cfg: &EvalConfig) -> Result<C64, Error> {
    let tau = lattice.tau();
    let (s, t) = lattice.base().coords(z);
    let b = t.round();
    let a = s.round();
    let zr = z - a - tau * b;
    let base = theta_series(zr, tau, cfg)?;
    if b == 0.0 {
        return Ok(base);
    }
    // θ(z' + bτ) = (−1)^b e^{−2iπ(b z' + τ b(b−1)/2)} θ(z')
    let sign = if (b as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let mult = e2pi(-(zr * b + tau * (b * (b - 1.0) / 2.0)));
    Ok(base * mult * sign)
}

/// Jacobi's triple product, evaluated without any argument reduction.
pub fn theta_triple_product(z: C64, lattice: &LatticeSpec, cfg: &EvalConfig) -> Result<C64, Error> {
    let q = e2pi(lattice.tau());
    let w = e2pi(z);
    let winv = w.inv();
    let one = C64::new(1.0, 0.0);
    let tol = cfg.target_eps / cfg.max_terms as f64;
    let mut prod = one;
    let mut qm = one;
    for _ in 1..=cfg.max_terms {
        let qprev = qm;
        qm *= q;
        let f1 = qm;
        let f2 = qprev * w;
        let f3 = qm * winv;
        prod *= (one - f1) * (one - f2) * (one - f3);
        if f1.norm() < tol && f2.norm() < tol && f3.norm() < tol {
            return Ok(prod);
        }
    }
    Err(Error::NonConvergent { max_terms: cfg.max_terms })
}

/// θₖ(z) = θ(z/k) with k the level of `lattice`.
pub fn theta_k(z: C64, lattice: &LatticeSpec, cfg: &EvalConfig) -> Result<C64, Error> {
    theta(z / lattice.level() as f64, lattice, cfg)
}

/// Both ℘ and ℘′ of the base lattice, no pole check.
fn wp_pair(z: C64, tau: C64, cfg: &EvalConfig) -> Result<(C64, C64), Error> {
    let base = LatticeSpec::unit(tau)?;
    let (s, t) = base.coords(z);
    let zr = base.from_coords(s - s.round(), t - t.round());

    let sin = (zr * PI).sin();
    let cos = (zr * PI).cos();
    let mut p = C64::new(PI * PI, 0.0) / (sin * sin);
    let mut dp = C64::new(-2.0 * PI * PI * PI, 0.0) * cos / (sin * sin * sin);

    let two_pi_i = I * (2.0 * PI);
    let c2 = two_pi_i * two_pi_i;
    let c3 = c2 * two_pi_i;
    let one = C64::new(1.0, 0.0);
    let q = e2pi(tau);
    let u = e2pi(zr);
    let uinv = u.inv();

    let mut series = C64::new(1.0 / 12.0, 0.0);
    let mut dseries = C64::new(0.0, 0.0);
    let mut qn = one;
    let small = cfg.target_eps * 1e-2;
    let mut done = false;
    for n in 1..=cfg.max_terms {
        qn *= q;
        let x = qn * u;
        let y = qn * uinv;
        let ox = one - x;
        let oy = one - y;
        series += x / (ox * ox) + y / (oy * oy) - qn * (2.0 * n as f64) / (one - qn);
        dseries += x * (one + x) / (ox * ox * ox) - y * (one + y) / (oy * oy * oy);
        if x.norm() < small && y.norm() < small && qn.norm() * (n as f64) < small {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::NonConvergent { max_terms: cfg.max_terms });
    }
    p += c2 * series;
    dp += c3 * dseries;
    Ok((p, dp))
}

fn pole_check(z: C64, lattice: &LatticeSpec, cfg: &EvalConfig) -> Result<(), Error> {
    let d = lattice.distance_to_lattice(z);
    if d < cfg.pole_guard {
        return Err(Error::PoleProximity { distance: d });
    }
    Ok(())
}

/// ℘ of the base lattice `ℤ + τℤ`.
pub fn wp(z: C64, lattice: &LatticeSpec, cfg: &EvalConfig) -> Result<C64, Error> {
    pole_check(z, &lattice.base(), cfg)?;
    Ok(wp_pair(z, lattice.tau(), cfg)?.0)
}

/// ℘′ of the base lattice.
pub fn wp_prime(z: C64, lattice: &LatticeSpec, cfg: &EvalConfig) -> Result<C64, Error> {
    pole_check(z, &lattice.base(), cfg)?;
    Ok(wp_pair(z, lattice.tau(), cfg)?.1)
}

/// ℘ₖ(z) = ℘(z/k).
pub fn wp_k(z: C64, lattice: &LatticeSpec, cfg: &EvalConfig) -> Result<C64, Error> {
    pole_check(z, lattice, cfg)?;
    Ok(wp_pair(z / lattice.level() as f64, lattice.tau(), cfg)?.0)
}

/// ℘ₖ′(z) = ℘′(z/k)/k.
pub fn wp_k_prime(z: C64, lattice: &LatticeSpec, cfg: &EvalConfig) -> Result<C64, Error> {
    pole_check(z, lattice, cfg)?;
    let k = lattice.level() as f64;
    Ok(wp_pair(z / k, lattice.tau(), cfg)?.1 / k)
}

/// Invariants `(g₂, g₃)` of `kΛ` from the Eisenstein q-series.
pub fn invariants(lattice: &LatticeSpec, cfg: &EvalConfig) -> Result<(C64, C64), Error> {
    let q = e2pi(lattice.tau());
    let mut s3 = C64::new(0.0, 0.0);
    let mut s5 = C64::new(0.0, 0.0);
    let mut qn = C64::new(1.0, 0.0);
    let mut done = false;
    for n in 1..=cfg.max_terms {
        qn *= q;
        let (mut d3, mut d5) = (0.0, 0.0);
        for d in 1..=n {
            if n % d == 0 {
                let df = d as f64;
                d3 += df * df * df;
                d5 += df * df * df * df * df;
            }
        }
        s3 += qn * d3;
        s5 += qn * d5;
        if qn.norm() * d5 < cfg.target_eps * 1e-2 {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::NonConvergent { max_terms: cfg.max_terms });
    }
    let k = lattice.level() as f64;
    let pi2 = PI * PI;
    let g2 = (C64::new(1.0, 0.0) + s3 * 240.0) * (4.0 * pi2 * pi2 / 3.0) / (k * k * k * k);
    let g3 = (C64::new(1.0, 0.0) - s5 * 504.0) * (8.0 * pi2 * pi2 * pi2 / 27.0) / (k * k * k * k * k * k);
    Ok((g2, g3))
}

fn close(a: C64, b: C64, c: C64) -> bool {
    (a - b).norm() <= 1e-8 * (1.0 + c.norm())
}

/// Plain Newton steps past the acceptance test, kept while they help.
fn polish<F>(mut z: C64, mut p: C64, mut dp: C64, c: C64, eval: &F) -> C64
where
    F: Fn(C64) -> Result<(C64, C64), Error>,
{
    for _ in 0..4 {
        if dp.norm() == 0.0 {
            break;
        }
        let next = z - (p - c) / dp;
        match eval(next) {
            Ok((np, ndp)) if (np - c).norm() < (p - c).norm() => {
                z = next;
                p = np;
                dp = ndp;
            }
            _ => break,
        }
    }
    z
}

/// One preimage of `c` under ℘ₖ, canonicalized to the lexicographically
/// smaller of `±z0` modulo `kΛ`.
pub fn wp_invert(c: C64, lattice: &LatticeSpec, cfg: &EvalConfig) -> Result<C64, Error> {
    let k = lattice.level() as f64;
    let tau = lattice.tau();
    let eval = |z: C64| wp_pair(z / k, tau, cfg).map(|(p, dp)| (p, dp / k));

    let finish = |z: C64| {
        let a = lattice.reduce(z);
        let b = lattice.reduce(-z);
        if b.canonical_cmp(&a) == core::cmp::Ordering::Less {
            b.xi()
        } else {
            a.xi()
        }
    };

    let one = C64::new(1.0, 0.0);
    for hp in [one * 0.5, tau * 0.5, (one + tau) * 0.5] {
        let z = hp * k;
        if close(eval(z)?.0, c, c) {
            return Ok(finish(z));
        }
    }

    let mut starts = alloc::vec::Vec::new();
    if c.norm() > 1e2 {
        starts.push(c.sqrt().inv());
    }
    for i in 0..8 {
        for j in 0..8 {
            starts.push(lattice.from_coords((i as f64 + 0.5) / 8.0, (j as f64 + 0.5) / 8.0));
        }
    }
    let max_step = 0.1 * k * (1.0f64).min(tau.norm());
    for z_start in starts {
        let mut z = z_start;
        for _ in 0..100 {
            if lattice.distance_to_lattice(z) < 1e-12 {
                break;
            }
            let (p, dp) = match eval(z) {
                Ok(v) => v,
                Err(_) => break,
            };
            if !(p.re.is_finite() && p.im.is_finite()) {
                break;
            }
            if close(p, c, c) {
                return Ok(finish(polish(z, p, dp, c, &eval)));
            }
            if dp.norm() == 0.0 || !dp.re.is_finite() {
                break;
            }
            let mut step = (p - c) / dp;
            let n = step.norm();
            if n > max_step {
                step *= max_step / n;
            }
            z -= step;
        }
    }
    Err(Error::NoConvergence)
}
