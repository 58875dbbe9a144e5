//! Seedable, splittable random streams.
//!
//! Every randomized operation in this crate consumes draws from an
//! [`RngStream`]. A stream is identified by a 256-bit key (derived from the
//! user seed) and a 64-bit stream id; [`RngStream::split`] derives a child
//! stream with a new id, so independent units of work (replications, grid
//! cells, rows) get non-overlapping randomness without coordination.
//!
//! Graph sampling and edge flipping consume exactly one uniform draw per
//! upper-triangular pair, in row-major order, which pins bit-reproducibility
//! across refactors.

use rand::distr::{Distribution, OpenClosed01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A named, splittable, seedable random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

// splitmix64 finalizer; decorrelates child stream ids.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    /// Root stream for a user seed.
    pub fn seed(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Derive an independent child stream keyed by `id`.
    ///
    /// Children of distinct ids, and children at distinct depths, use
    /// distinct ChaCha streams; the parent is left untouched.
    pub fn split(&self, id: u64) -> Self {
        let mut child = self.rng.clone();
        child.set_stream(mix64(self.rng.get_stream() ^ mix64(id)));
        child.set_word_pos(0);
        Self { rng: child }
    }

    /// Child stream keyed by arbitrary bytes (e.g. grid-cell content), so
    /// results attach to parameter values rather than iteration order.
    pub fn split_by_content(&self, parts: &[u64]) -> Self {
        let mut acc = 0xcbf2_9ce4_8422_2325u64;
        for &p in parts {
            acc = mix64(acc ^ p);
        }
        self.split(acc)
    }

    /// One uniform draw from `(0, 1]`.
    ///
    /// The open-closed interval means an event of probability `p` tested as
    /// `u <= p` never fires when `p` underflows below the 2^-53 grid, and
    /// always fires when `p = 1`.
    pub fn uniform_oc(&mut self) -> f64 {
        OpenClosed01.sample(&mut self.rng)
    }

    /// Bernoulli event of probability `p`, consuming exactly one draw.
    pub fn event(&mut self, p: f64) -> bool {
        self.uniform_oc() <= p
    }

    /// Uniform draw from `[lo, hi]` (degenerate `lo == hi` allowed).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform_oc()
    }

    /// A raw 64-bit value, e.g. for seeding sub-components.
    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }
}
