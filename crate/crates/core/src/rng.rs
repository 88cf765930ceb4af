//! Counter-based random streams.
//!
//! Every source of randomness in the crate is a [`Stream`]: a keyed bijection
//! applied to an incrementing counter. Streams are cheap to fork by id, carry
//! no hidden global state, and produce the same values no matter how work is
//! scheduled across threads. The sampler keys a fresh stream per
//! (seed, iteration, block), which is what makes runs bit-identical across
//! worker counts and across checkpoint/resume.

use std::f64::consts::PI;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser; a 64-bit bijection with good avalanche.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A counter-based random stream: output i = f(key, i).
#[derive(Debug, Clone)]
pub struct Stream {
    key: u64,
    ctr: u64,
}

impl Stream {
    /// Root stream for a seed.
    pub fn root(seed: u64) -> Self {
        Stream {
            key: mix(seed ^ 0x5343_414C_454D_4958), // "SCALEMIX" tag
            ctr: 0,
        }
    }

    /// Derive an independent stream from this one's key and an id.
    /// Forking does not consume from or advance `self`.
    pub fn substream(&self, id: u64) -> Self {
        Stream {
            key: mix(self.key ^ mix(id)),
            ctr: 0,
        }
    }

    /// Stream keyed by a path of ids from a seed, e.g. (seed, iter, block).
    pub fn keyed(seed: u64, ids: &[u64]) -> Self {
        let mut s = Stream::root(seed);
        for &id in ids {
            s = s.substream(id);
        }
        s
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let c = self.ctr;
        self.ctr = self.ctr.wrapping_add(1);
        // two keyed mix rounds over the counter
        mix(mix(c.wrapping_mul(GOLDEN) ^ self.key) ^ self.key.rotate_left(29))
    }

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    /// Uniform on (lo, hi).
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller. Consumes exactly two uniforms, so the
    /// counter advance is data-independent (rejection-free).
    #[inline]
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    /// A pair of independent standard normals from one Box-Muller draw.
    #[inline]
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        (r * c, r * s)
    }

    /// Fill a slice with standard normals.
    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = self.normal();
        }
    }

    /// Index in 0..n, without modulo bias worth caring about at n << 2^64.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u64() % n as u64) as usize
    }
}
