//! Formal ℤ-combinations of points of `ℂ/kΛ`.
//!
//! A divisor is a short vector of `(point, multiplicity)` pairs sorted by
//! canonical coordinates. Keys are merged by torus distance at
//! [`TOL_LAT`](crate::lattice::TOL_LAT), so there is no grid whose cell
//! edges could split two representatives of the same point.

use alloc::vec::Vec;
use core::fmt;

use crate::lattice::{LatticeSpec, TorusPoint};
use crate::{Error, C64};

/// Default cap on the number of sub-divisors an enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: f64 = 1e7;

/// Default number of `h`-steps scanned when grouping points into orbits.
pub const DEFAULT_ORBIT_CAP: u32 = 128;

#[derive(Clone, Debug)]
pub struct Divisor {
    lattice: LatticeSpec,
    entries: Vec<(TorusPoint, i32)>,
}

impl Divisor {
    pub fn zero(lattice: &LatticeSpec) -> Self {
        Self { lattice: *lattice, entries: Vec::new() }
    }

    /// `mult·[z]`.
    pub fn point(lattice: &LatticeSpec, z: C64, mult: i32) -> Self {
        let mut d = Self::zero(lattice);
        d.add_at(z, mult);
        d
    }

    pub fn from_points<I: IntoIterator<Item = (C64, i32)>>(lattice: &LatticeSpec, points: I) -> Self {
        let mut d = Self::zero(lattice);
        for (z, m) in points {
            d.add_at(z, m);
        }
        d
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn level(&self) -> u32 {
        self.lattice.level()
    }

    pub fn entries(&self) -> &[(TorusPoint, i32)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Multiplicity at the class of `z`.
    pub fn multiplicity(&self, z: C64) -> i32 {
        let p = self.lattice.reduce(z);
        self.entries.iter().find(|(q, _)| *q == p).map_or(0, |e| e.1)
    }

    pub fn add_at(&mut self, z: C64, mult: i32) {
        let p = self.lattice.reduce(z);
        self.add_point(p, mult);
    }

    fn add_point(&mut self, p: TorusPoint, mult: i32) {
        if mult == 0 {
            return;
        }
        if let Some(i) = self.entries.iter().position(|(q, _)| *q == p) {
            self.entries[i].1 += mult;
            if self.entries[i].1 == 0 {
                self.entries.remove(i);
            }
            return;
        }
        let at = self
            .entries
            .iter()
            .position(|(q, _)| p.canonical_cmp(q) == core::cmp::Ordering::Less)
            .unwrap_or(self.entries.len());
        self.entries.insert(at, (p, mult));
    }

    fn check_level(&self, other: &Divisor) -> Result<(), Error> {
        if self.level() != other.level() {
            return Err(Error::LevelMismatch(self.level(), other.level()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Divisor) -> Result<Divisor, Error> {
        self.check_level(other)?;
        let mut out = self.clone();
        for (p, m) in &other.entries {
            out.add_point(*p, *m);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Divisor) -> Result<Divisor, Error> {
        self.add(&other.negate())
    }

    pub fn negate(&self) -> Divisor {
        self.scale(-1)
    }

    pub fn scale(&self, n: i32) -> Divisor {
        if n == 0 {
            return Self::zero(&self.lattice);
        }
        Self { lattice: self.lattice, entries: self.entries.iter().map(|(p, m)| (*p, m * n)).collect() }
    }

    pub fn positive_part(&self) -> Divisor {
        Self { lattice: self.lattice, entries: self.entries.iter().filter(|e| e.1 > 0).copied().collect() }
    }

    /// The pole part, with positive multiplicities: `D = D⁺ − D⁻`.
    pub fn negative_part(&self) -> Divisor {
        Self {
            lattice: self.lattice,
            entries: self.entries.iter().filter(|e| e.1 < 0).map(|(p, m)| (*p, -m)).collect(),
        }
    }

    /// Pointwise maximum.
    pub fn join(&self, other: &Divisor) -> Result<Divisor, Error> {
        self.check_level(other)?;
        let mut out = Self::zero(&self.lattice);
        for (p, m) in &self.entries {
            let o = other.mult_of(p);
            out.add_point(*p, (*m).max(o));
        }
        for (p, m) in &other.entries {
            if self.mult_of(p) == 0 {
                out.add_point(*p, (*m).max(0));
            }
        }
        Ok(out)
    }

    fn mult_of(&self, p: &TorusPoint) -> i32 {
        self.entries.iter().find(|(q, _)| q == p).map_or(0, |e| e.1)
    }

    /// `self ≤ other` pointwise.
    pub fn le(&self, other: &Divisor) -> bool {
        if self.level() != other.level() {
            return false;
        }
        self.entries.iter().all(|(p, m)| *m <= other.mult_of(p))
            && other.entries.iter().all(|(p, m)| *m >= 0 || self.mult_of(p) <= *m)
    }

    pub fn is_effective(&self) -> bool {
        self.entries.iter().all(|e| e.1 > 0)
    }

    pub fn degree(&self) -> i64 {
        self.entries.iter().map(|e| e.1 as i64).sum()
    }

    /// Total multiplicity `Σ |n_ξ|`.
    pub fn total_multiplicity(&self) -> i64 {
        self.entries.iter().map(|e| e.1.abs() as i64).sum()
    }

    /// `Σ mult·ξ` over canonical representatives, unreduced.
    pub fn weight_representative(&self) -> C64 {
        self.entries.iter().fold(C64::new(0.0, 0.0), |acc, (p, m)| acc + p.xi() * *m as f64)
    }

    pub fn weight(&self) -> TorusPoint {
        self.lattice.reduce(self.weight_representative())
    }

    /// Divisor of `z ↦ f(z + δ)` given the divisor of `f`: every key moves to `ξ − δ`.
    pub fn shift(&self, delta: C64) -> Divisor {
        let mut out = Self::zero(&self.lattice);
        for (p, m) in &self.entries {
            out.add_point(p.translate(-delta), *m);
        }
        out
    }

    /// Re-expresses a divisor on `ℂ/jΛ` on the cover `ℂ/kΛ`, `j | k`.
    pub fn lift(&self, level: u32) -> Result<Divisor, Error> {
        let j = self.level();
        if level == 0 || !level.is_multiple_of(j) {
            return Err(Error::LevelMismatch(j, level));
        }
        let m = level / j;
        let target = self.lattice.at_level(level);
        let tau = self.lattice.tau();
        let mut out = Self::zero(&target);
        for (p, mult) in &self.entries {
            for l1 in 0..m {
                for l2 in 0..m {
                    let w = p.xi() + (C64::new(l1 as f64, 0.0) + tau * l2 as f64) * j as f64;
                    out.add_at(w, *mult);
                }
            }
        }
        Ok(out)
    }

    /// Number of divisors `0 ≤ E ≤ self`, as a float to survive overflow.
    pub fn subdivisor_count(&self) -> f64 {
        self.entries.iter().map(|e| (e.1.max(0) + 1) as f64).product()
    }
}

impl PartialEq for Divisor {
    fn eq(&self, other: &Self) -> bool {
        self.level() == other.level()
            && self.entries.len() == other.entries.len()
            && self.entries.iter().all(|(p, m)| other.mult_of(p) == *m)
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        for (i, (p, m)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let (s, t) = p.coords();
            write!(f, "{}[{:.12}, {:.12}]", m, s, t)?;
        }
        write!(f, " @{}", self.level())
    }
}

/// Every `0 ≤ E ≤ bound`, multiplicities counted like an odometer whose last
/// digit turns fastest.
pub struct Subdivisors {
    lattice: LatticeSpec,
    points: Vec<(TorusPoint, i32)>,
    digits: Vec<i32>,
    done: bool,
}

impl Iterator for Subdivisors {
    type Item = Divisor;

    fn next(&mut self) -> Option<Divisor> {
        if self.done {
            return None;
        }
        let mut d = Divisor::zero(&self.lattice);
        for ((p, _), k) in self.points.iter().zip(&self.digits) {
            d.add_point(*p, *k);
        }
        self.done = true;
        for i in (0..self.digits.len()).rev() {
            if self.digits[i] < self.points[i].1 {
                self.digits[i] += 1;
                self.done = false;
                break;
            }
            self.digits[i] = 0;
        }
        Some(d)
    }
}

pub fn enumerate_subdivisors(bound: &Divisor, cap: f64) -> Result<Subdivisors, Error> {
    if !bound.is_effective() {
        return Err(Error::InvalidParameter("sub-divisor bound must be effective"));
    }
    let count = bound.subdivisor_count();
    if count > cap {
        return Err(Error::CombinatorialBlowup { count, cap });
    }
    Ok(Subdivisors {
        lattice: bound.lattice,
        points: bound.entries.clone(),
        digits: alloc::vec![0; bound.entries.len()],
        done: false,
    })
}

/// Smallest `1 ≤ n ≤ n_max` with `n·h ∈ kΛ`.
fn level_torsion(h: C64, lattice: &LatticeSpec, n_max: u32) -> Option<u32> {
    let (s, t) = lattice.coords(h);
    (1..=n_max).find(|&n| crate::lattice::coords_are_integral(n as f64 * s, n as f64 * t, crate::lattice::TOL_LAT))
}

/// Orbit offset `n` with `b ≡ a + n·h (mod kΛ)`, `|n| ≤ cap`.
fn orbit_offset(a: &TorusPoint, b: &TorusPoint, h: C64, cap: u32) -> Option<i64> {
    let lattice = a.lattice();
    let (hs, ht) = lattice.coords(h);
    let (as_, at) = a.coords();
    let (bs, bt) = b.coords();
    let cap = cap as i64;
    (-cap..=cap).find(|&n| {
        crate::lattice::torus_coord_distance((as_ + n as f64 * hs, at + n as f64 * ht), (bs, bt))
            <= crate::lattice::TOL_LAT
    })
}

/// Solves `D = shift(E, h) − E`, i.e. `D = div(φg/g)` when `div g = E`.
///
/// Points of `D` are grouped into `h`-orbits found within `orbit_cap` steps;
/// along each orbit `E` is the prefix sum of `D`. Returns `None` when some
/// orbit has nonzero total multiplicity.
///
/// Offsets are unique only when the order of `h` in `ℂ/kΛ` exceeds
/// `2·orbit_cap`; callers that verified torsion up to some bound should
/// pass at most half of it.
pub fn h_orbit_solve(d: &Divisor, h: C64, orbit_cap: u32) -> Result<Option<Divisor>, Error> {
    let lattice = d.lattice;
    if let Some(n) = level_torsion(h, &lattice, orbit_cap) {
        return Err(Error::OrbitCapExceeded(n));
    }
    let pts = &d.entries;
    let mut offset: Vec<Option<(usize, i64)>> = alloc::vec![None; pts.len()];
    let mut out = Divisor::zero(&lattice);
    for root in 0..pts.len() {
        if offset[root].is_some() {
            continue;
        }
        offset[root] = Some((root, 0));
        let mut queue = alloc::vec![root];
        let mut members = alloc::vec![root];
        while let Some(i) = queue.pop() {
            let oi = offset[i].map(|o| o.1).unwrap_or(0);
            for j in 0..pts.len() {
                if offset[j].is_some() {
                    continue;
                }
                if let Some(n) = orbit_offset(&pts[i].0, &pts[j].0, h, orbit_cap) {
                    offset[j] = Some((root, oi + n));
                    queue.push(j);
                    members.push(j);
                }
            }
        }
        let mut line: Vec<(i64, i32)> =
            members.iter().map(|&j| (offset[j].map(|o| o.1).unwrap_or(0), pts[j].1)).collect();
        line.sort_by_key(|e| e.0);
        let total: i64 = line.iter().map(|e| e.1 as i64).sum();
        if total != 0 {
            return Ok(None);
        }
        let lo = line[0].0;
        let hi = line[line.len() - 1].0;
        let base = pts[root].0.xi();
        let mut running = 0i32;
        let mut idx = 0;
        // E(n) = Σ_{j<n} D(j) for n in (lo, hi].
        for n in lo..hi {
            while idx < line.len() && line[idx].0 == n {
                running += line[idx].1;
                idx += 1;
            }
            if running != 0 {
                out.add_at(base + h * (n + 1) as f64, running);
            }
        }
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> LatticeSpec {
        LatticeSpec::unit(C64::new(0.0, 1.0)).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn parts_of_a_wp_divisor() {
        let l = sq();
        let z0 = c(0.2, 0.1);
        let d = Divisor::from_points(&l, [(z0, 1), (-z0, 1), (c(0.0, 0.0), -2)]);
        assert_eq!(d.positive_part(), Divisor::from_points(&l, [(z0, 1), (-z0, 1)]));
        assert_eq!(d.negative_part(), Divisor::point(&l, c(0.0, 0.0), 2));
        assert_eq!(d.degree(), 0);
        assert!(d.add(&d.negate()).unwrap().is_zero());
    }

    #[test]
    fn join_is_pointwise_max() {
        let l = sq();
        let o = c(0.0, 0.0);
        let x = c(0.4, 0.3);
        let a = Divisor::point(&l, o, 2);
        let b = Divisor::from_points(&l, [(o, 1), (x, 1)]);
        assert_eq!(a.join(&b).unwrap(), Divisor::from_points(&l, [(o, 2), (x, 1)]));
        assert!(a.le(&a.join(&b).unwrap()) && b.le(&a.join(&b).unwrap()));
    }

    #[test]
    fn level_mismatch_is_an_error() {
        let l = sq();
        let a = Divisor::point(&l, c(0.1, 0.0), 1);
        let b = Divisor::point(&l.at_level(2), c(0.1, 0.0), 1);
        assert_eq!(a.add(&b), Err(Error::LevelMismatch(1, 2)));
    }

    #[test]
    fn weight_of_symmetric_pair() {
        let l = sq();
        let z0 = c(0.2, 0.0);
        let d = Divisor::from_points(&l, [(z0, 1), (-z0, 1), (c(0.0, 0.0), -2)]);
        assert!(d.weight().is_zero());
        let single = Divisor::point(&l, c(1.3, 0.2), 1);
        assert_eq!(single.degree(), 1);
        assert!(single.weight() == l.reduce(c(0.3, 0.2)));
    }

    #[test]
    fn shift_examples() {
        let l = sq();
        let d = Divisor::point(&l, c(0.5, 0.0), 1);
        assert_eq!(d.shift(c(0.2, 0.0)), Divisor::point(&l, c(0.3, 0.0), 1));
        assert_eq!(d.shift(c(0.0, 0.0)), d);
        let d = Divisor::from_points(&l, [(c(0.1, 0.0), 1), (c(0.3, 0.0), 1)]);
        assert!(d.weight() == l.reduce(c(0.4, 0.0)));
        assert!(d.shift(c(0.25, 0.0)).weight() == l.reduce(c(0.9, 0.0)));
    }

    #[test]
    fn keys_merge_across_the_cell_edge() {
        let l = sq();
        let mut d = Divisor::point(&l, c(1.0 - 1e-12, 0.3), 1);
        d.add_at(c(1e-12, 0.3), 1);
        assert_eq!(d.len(), 1);
        assert_eq!(d.degree(), 2);
    }

    #[test]
    fn subdivisor_counts() {
        let l = sq();
        let b = Divisor::point(&l, c(0.0, 0.0), 2);
        let all: Vec<_> = enumerate_subdivisors(&b, DEFAULT_ENUMERATION_CAP).unwrap().collect();
        assert_eq!(all.len(), 3);
        let b = Divisor::from_points(&l, [(c(0.1, 0.0), 1), (c(0.2, 0.0), 1)]);
        assert_eq!(enumerate_subdivisors(&b, 1e7).unwrap().count(), 4);
        let b = Divisor::from_points(&l, [(c(0.1, 0.0), 2), (c(0.2, 0.0), 1), (c(0.3, 0.0), 1)]);
        assert_eq!(enumerate_subdivisors(&b, 1e7).unwrap().count(), 12);
        assert!(matches!(enumerate_subdivisors(&b, 11.0), Err(Error::CombinatorialBlowup { .. })));
    }

    #[test]
    fn lift_to_level_two() {
        let l = sq();
        let d = Divisor::point(&l, c(0.2, 0.1), 2);
        let up = d.lift(2).unwrap();
        assert_eq!(up.degree(), 8);
        assert_eq!(up.len(), 4);
        for (p, _) in up.entries() {
            assert!(l.reduce(p.xi()) == l.reduce(c(0.2, 0.1)));
        }
    }

    #[test]
    fn orbit_solve_examples() {
        let l = sq();
        let h = c(0.3127, 0.1711);
        let xi = c(0.05, 0.6);
        let d = Divisor::from_points(&l, [(xi - h, 1), (xi, -1)]);
        let e = h_orbit_solve(&d, h, DEFAULT_ORBIT_CAP).unwrap().unwrap();
        assert_eq!(e, Divisor::point(&l, xi, 1));

        let d = Divisor::point(&l, xi, 1);
        assert_eq!(h_orbit_solve(&d, h, DEFAULT_ORBIT_CAP).unwrap(), None);

        let d = Divisor::from_points(&l, [(xi - h * 2.0, 1), (xi, -1)]);
        let e = h_orbit_solve(&d, h, DEFAULT_ORBIT_CAP).unwrap().unwrap();
        assert_eq!(e, Divisor::from_points(&l, [(xi, 1), (xi - h, 1)]));
    }

    #[test]
    fn orbit_cap_sees_order_one_hundred() {
        let l = sq();
        let h = c(0.31, 0.17);
        let d = Divisor::point(&l, c(0.1, 0.1), 1);
        assert_eq!(h_orbit_solve(&d, h, 128), Err(Error::OrbitCapExceeded(100)));
        assert_eq!(h_orbit_solve(&d, h, 32), Ok(None));
    }

    #[test]
    fn orbit_solve_refuses_torsion_shift() {
        let l = sq();
        let h = c(0.25, 0.0);
        let d = Divisor::point(&l, c(0.1, 0.1), 1);
        assert_eq!(h_orbit_solve(&d, h, DEFAULT_ORBIT_CAP), Err(Error::OrbitCapExceeded(4)));
    }
}
