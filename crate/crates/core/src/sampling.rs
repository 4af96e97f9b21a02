//! Deterministic sample points in a fundamental parallelogram.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::lattice::LatticeSpec;
use crate::C64;

/// SplitMix64 finalizer, used to derive independent per-task seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Point `i` of the R2 low-discrepancy sequence, in lattice coordinates.
pub fn r2_coords(i: usize) -> (f64, f64) {
    const A1: f64 = 0.754_877_666_246_692_7;
    const A2: f64 = 0.569_840_290_998_053_2;
    let x = 0.5 + A1 * (i as f64 + 1.0);
    let y = 0.5 + A2 * (i as f64 + 1.0);
    (x - x.floor(), y - y.floor())
}

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform point of the fundamental parallelogram of `kΛ`.
    pub fn point(&mut self, lattice: &LatticeSpec) -> C64 {
        let s = self.unit();
        let t = self.unit();
        lattice.from_coords(s, t)
    }
}
