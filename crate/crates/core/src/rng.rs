//! Counter-based pseudo-random function.
//!
//! Every random quantity in the simulator is a pure function of a key built
//! by absorbing integers into a 64-bit state: `(seed, stream tag, t, x, k)`.
//! Nothing is drawn sequentially, so results do not depend on the order in
//! which sites or replicas are visited, and two processes that absorb the same
//! key see the same variate. That is what makes the couplings exact.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline(always)]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream tags. Disjoint streams under one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Environment = 0x656e_7600,
    Offspring = 0x6f66_6600,
    Displacement = 0x6469_7300,
    Ladder = 0x6c61_6400,
}

/// A partially absorbed key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Key(u64);

impl Key {
    pub fn new(seed: u64, stream: Stream) -> Self {
        Key(mix64(seed ^ GOLDEN)).absorb(stream as u64)
    }

    /// One SplitMix64 step offset by `v`: consecutive `v` under a fixed
    /// prefix give consecutive SplitMix64 outputs.
    #[inline(always)]
    pub fn absorb(self, v: u64) -> Self {
        Key(mix64(self.0.wrapping_add(v.wrapping_add(1).wrapping_mul(GOLDEN))))
    }

    #[inline(always)]
    pub fn absorb_i64(self, v: i64) -> Self {
        self.absorb(v as u64)
    }

    #[inline(always)]
    pub fn bits(self) -> u64 {
        self.0
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline(always)]
    pub fn uniform(self) -> f64 {
        (self.bits() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `{0, .., n-1}` via a widening multiply.
    #[inline(always)]
    pub fn below(self, n: u64) -> u64 {
        ((self.bits() as u128 * n as u128) >> 64) as u64
    }
}

/// FNV-1a over a tag string, used to name experiment streams.
fn tag_hash(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Seed ladder: `(master_seed, experiment tag, replica index)` to a child seed.
pub fn derive_seed(master_seed: u64, tag: &str, index: u64) -> u64 {
    Key::new(master_seed, Stream::Ladder)
        .absorb(tag_hash(tag))
        .absorb(index)
        .bits()
}
