//! Counter-based random numbers (Philox4x32-10).
//!
//! Every variate is a pure function of `(seed, replicate, purpose, index)`,
//! so replicates can be evaluated in any order, on any number of workers,
//! and still reproduce bit-for-bit.

use crate::math;

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = (a as u64) * (b as u64);
    ((p >> 32) as u32, p as u32)
}

/// One Philox4x32 block with ten rounds.
#[inline]
pub fn philox4x32(mut ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut k = key;
    for _ in 0..10 {
        let (hi0, lo0) = mulhilo(M0, ctr[0]);
        let (hi1, lo1) = mulhilo(M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0];
        k[0] = k[0].wrapping_add(W0);
        k[1] = k[1].wrapping_add(W1);
    }
    ctr
}

/// What a stream is used for; keeps noise and posterior draws independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Purpose {
    Noise = 0,
    PosteriorDraw = 1,
    Signal = 2,
    Other = 3,
}

/// Root of a family of streams, keyed by a 64-bit seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: [u32; 2],
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { key: [seed as u32, (seed >> 32) as u32] }
    }

    /// An independent stream for one replicate and purpose.
    pub fn stream(&self, replicate: u32, purpose: Purpose) -> Stream {
        Stream { key: self.key, hi: [replicate, purpose as u32] }
    }
}

/// Random access into one `(replicate, purpose)` stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stream {
    key: [u32; 2],
    hi: [u32; 2],
}

#[inline]
fn to_open_unit(x: u64) -> f64 {
    // 52 random bits at half-integer offsets, exactly representable inside (0, 1).
    ((x >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

impl Stream {
    /// Two 64-bit words for `index`.
    #[inline]
    pub fn words_at(&self, index: u64) -> [u64; 2] {
        let out = philox4x32([index as u32, (index >> 32) as u32, self.hi[0], self.hi[1]], self.key);
        [
            (out[0] as u64) | ((out[1] as u64) << 32),
            (out[2] as u64) | ((out[3] as u64) << 32),
        ]
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    pub fn uniform_at(&self, index: u64) -> f64 {
        to_open_unit(self.words_at(index)[0])
    }

    /// A pair of independent uniforms on `(0, 1)`.
    #[inline]
    pub fn uniform_pair_at(&self, index: u64) -> (f64, f64) {
        let w = self.words_at(index);
        (to_open_unit(w[0]), to_open_unit(w[1]))
    }

    /// Standard normal by Box–Muller on one block.
    #[inline]
    pub fn normal_at(&self, index: u64) -> f64 {
        let (u1, u2) = self.uniform_pair_at(index);
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(core::f64::consts::TAU * u2)
    }

    /// Index for the `draw`-th variate attached to `coordinate`.
    #[inline]
    pub fn index2(coordinate: usize, draw: usize) -> u64 {
        ((coordinate as u64) << 32) | (draw as u64 & 0xFFFF_FFFF)
    }

    /// Sequential cursor starting at `start`.
    pub fn cursor(&self, start: u64) -> Cursor {
        Cursor { stream: *self, next: start }
    }
}

/// Sequential reader over a [`Stream`].
#[derive(Debug, Clone)]
pub struct Cursor {
    stream: Stream,
    next: u64,
}

impl Cursor {
    pub fn uniform(&mut self) -> f64 {
        let u = self.stream.uniform_at(self.next);
        self.next += 1;
        u
    }

    pub fn normal(&mut self) -> f64 {
        let z = self.stream.normal_at(self.next);
        self.next += 1;
        z
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        let v = (self.uniform() * bound as f64) as usize;
        v.min(bound.saturating_sub(1))
    }
}
