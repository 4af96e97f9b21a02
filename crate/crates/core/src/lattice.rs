//! The period lattice `Λ = ℤ + τℤ`, its dilates `kΛ`, and points of `ℂ/kΛ`.
//!
//! Every reduction happens in lattice coordinates: a complex number `w` is
//! written as `w = k·s + k·τ·t` with real `(s, t)`, and the canonical
//! representative of its class keeps the fractional parts of `s` and `t`.
//! Working in coordinates keeps far-away points stable and makes equality of
//! torus points independent of the shear of the basis.

use core::cmp::Ordering;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, C64};

/// Coordinate-space tolerance used for all torus-point identifications.
pub const TOL_LAT: f64 = 1e-9;

/// The lattice `kΛ` with `Λ = ℤ + τℤ`, `Im τ > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSpec {
    tau: C64,
    level: u32,
}

impl LatticeSpec {
    pub fn new(tau: C64, level: u32) -> Result<Self, Error> {
        if !tau.re.is_finite() || !tau.im.is_finite() || tau.im <= 0.0 {
            return Err(Error::InvalidLattice("Im(tau) must be positive"));
        }
        if level == 0 {
            return Err(Error::InvalidLattice("level must be at least 1"));
        }
        Ok(Self { tau, level })
    }

    /// The base lattice `Λ` (level 1).
    pub fn unit(tau: C64) -> Result<Self, Error> {
        Self::new(tau, 1)
    }

    pub fn tau(&self) -> C64 {
        self.tau
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Same `τ`, different level.
    pub fn at_level(&self, level: u32) -> Self {
        assert!(level >= 1, "lattice level must be at least 1");
        Self { tau: self.tau, level }
    }

    pub fn base(&self) -> Self {
        self.at_level(1)
    }

    /// Solves `w = s·k + t·k·τ` for real `(s, t)`.
    pub fn coords(&self, w: C64) -> (f64, f64) {
        let k = self.level as f64;
        let t = w.im / (k * self.tau.im);
        let s = (w.re - t * k * self.tau.re) / k;
        (s, t)
    }

    pub fn from_coords(&self, s: f64, t: f64) -> C64 {
        let k = self.level as f64;
        C64::new(k * s, 0.0) + self.tau * (k * t)
    }

    /// The canonical representative of `w + kΛ`.
    pub fn reduce(&self, w: C64) -> TorusPoint {
        let (s, t) = self.coords(w);
        TorusPoint::from_coords(self, s, t)
    }

    pub fn is_member(&self, w: C64, tol: f64) -> bool {
        let (s, t) = self.coords(w);
        coords_are_integral(s, t, tol)
    }

    /// Coordinate-space distance from `w` to the nearest lattice point.
    pub fn distance_to_lattice(&self, w: C64) -> f64 {
        let (s, t) = self.coords(w);
        coord_norm(s - s.round(), t - t.round())
    }
}

/// Sup-norm on lattice coordinates.
pub(crate) fn coord_norm(ds: f64, dt: f64) -> f64 {
    ds.abs().max(dt.abs())
}

pub(crate) fn coords_are_integral(s: f64, t: f64, tol: f64) -> bool {
    coord_norm(s - s.round(), t - t.round()) <= tol
}

/// Torus distance between two coordinate pairs (wrap-around in both directions).
pub(crate) fn torus_coord_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let ds = a.0 - b.0;
    let dt = a.1 - b.1;
    coord_norm(ds - ds.round(), dt - dt.round())
}

fn canonical_fraction(x: f64) -> f64 {
    let f = x - x.floor();
    if !(TOL_LAT..1.0 - TOL_LAT).contains(&f) {
        0.0
    } else {
        f
    }
}

/// A point of `ℂ/kΛ`, stored through its canonical representative.
///
/// Two points are equal when they live at the same level and their lattice
/// coordinates agree modulo `ℤ²` within [`TOL_LAT`].
#[derive(Clone, Copy, Debug)]
pub struct TorusPoint {
    xi: C64,
    s: f64,
    t: f64,
    lattice: LatticeSpec,
}

impl TorusPoint {
    fn from_coords(lattice: &LatticeSpec, s: f64, t: f64) -> Self {
        let s = canonical_fraction(s);
        let t = canonical_fraction(t);
        Self { xi: lattice.from_coords(s, t), s, t, lattice: *lattice }
    }

    /// Canonical representative in the fundamental parallelogram.
    pub fn xi(&self) -> C64 {
        self.xi
    }

    pub fn level(&self) -> u32 {
        self.lattice.level
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    /// Fractional lattice coordinates, both in `[0, 1)`.
    pub fn coords(&self) -> (f64, f64) {
        (self.s, self.t)
    }

    pub fn is_zero(&self) -> bool {
        self.s == 0.0 && self.t == 0.0
    }

    /// The class of `−ξ`.
    pub fn neg(&self) -> Self {
        Self::from_coords(&self.lattice, -self.s, -self.t)
    }

    /// The class of `ξ + δ`.
    pub fn translate(&self, delta: C64) -> Self {
        self.lattice.reduce(self.xi + delta)
    }

    pub fn distance(&self, other: &TorusPoint) -> f64 {
        torus_coord_distance((self.s, self.t), (other.s, other.t))
    }

    /// Deterministic total order on canonical coordinates.
    pub fn canonical_cmp(&self, other: &TorusPoint) -> Ordering {
        self.s
            .partial_cmp(&other.s)
            .unwrap_or(Ordering::Equal)
            .then(self.t.partial_cmp(&other.t).unwrap_or(Ordering::Equal))
    }
}

impl PartialEq for TorusPoint {
    fn eq(&self, other: &Self) -> bool {
        self.lattice.level == other.lattice.level && self.distance(other) <= TOL_LAT
    }
}

pub fn lattice_coords(w: C64, lattice: &LatticeSpec) -> (f64, f64) {
    lattice.coords(w)
}

pub fn reduce(w: C64, lattice: &LatticeSpec) -> TorusPoint {
    lattice.reduce(w)
}

pub fn is_lattice_member(w: C64, lattice: &LatticeSpec, tol: f64) -> bool {
    lattice.is_member(w, tol)
}

/// Smallest `n ≤ n_max` with `n·h ∈ Λ`, checked at level 1.
///
/// `None` only certifies that no such `n` exists up to `n_max`.
pub fn torsion_order(h: C64, lattice: &LatticeSpec, n_max: u32, tol: f64) -> Option<u32> {
    let (s, t) = lattice.base().coords(h);
    (1..=n_max).find(|&n| coords_are_integral(n as f64 * s, n as f64 * t, tol))
}

/// Bounded stand-in for `ℤh ∩ (ℓ·z0 + Λ) = {0}`.
///
/// Returns `false` as soon as some `1 ≤ |d| ≤ d_range`, `|ℓ| ≤ l_range` gives
/// `d·h ≡ ℓ·z0 (mod Λ)`.
pub fn check_independence(h: C64, z0: C64, l_range: u32, d_range: u32, lattice: &LatticeSpec, tol: f64) -> bool {
    let base = lattice.base();
    let (hs, ht) = base.coords(h);
    let (zs, zt) = base.coords(z0);
    let l_range = l_range as i64;
    for d in 1..=d_range as i64 {
        for l in -l_range..=l_range {
            let s = d as f64 * hs - l as f64 * zs;
            let t = d as f64 * ht - l as f64 * zt;
            if coords_are_integral(s, t, tol) {
                return false;
            }
        }
    }
    true
}
