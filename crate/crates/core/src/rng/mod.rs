//! Seeded random streams and the primitive samplers built on them.
//!
//! A [`RandomStream`] is addressed by `(master_seed, stream_id)`. The generator
//! is Philox4x32-10 keyed by the master seed, with the stream id occupying the
//! upper half of the 128-bit counter and a block index the lower half. Two
//! streams with different ids therefore never touch the same counter value,
//! and a stream's output depends on nothing but its address and how many
//! values have been drawn from it.

pub(crate) mod dist;
mod philox;

pub use dist::{
    sample_bernoulli, sample_dirichlet, sample_gamma, sample_multinomial, sample_normal,
    sample_poisson, CumulativeTable, ZipfTable,
};

/// Deterministic, single-owner pseudorandom stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    master_seed: u64,
    stream_id: u64,
    block: u64,
    buf: [u32; 4],
    pos: usize,
}

/// Returns the stream addressed by `(master_seed, stream_id)`.
pub fn derive_stream(master_seed: u64, stream_id: u64) -> RandomStream {
    RandomStream {
        master_seed,
        stream_id,
        block: 0,
        buf: [0; 4],
        pos: 4,
    }
}

/// Mixes a domain tag into a master seed so that different consumers of the
/// same user seed (e.g. graph chunks and review records) address disjoint
/// families of streams.
pub fn domain_seed(master_seed: u64, domain: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(domain.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    fn refill(&mut self) {
        let ctr = [
            self.block as u32,
            (self.block >> 32) as u32,
            self.stream_id as u32,
            (self.stream_id >> 32) as u32,
        ];
        let key = [self.master_seed as u32, (self.master_seed >> 32) as u32];
        self.buf = philox::philox4x32(ctr, key);
        self.block = self.block.wrapping_add(1);
        self.pos = 0;
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        if self.pos == 4 {
            self.refill();
        }
        let v = self.buf[self.pos];
        self.pos += 1;
        v
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let lo = u64::from(self.next_u32());
        let hi = u64::from(self.next_u32());
        (hi << 32) | lo
    }

    /// Uniform double in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in the open interval `(0, 1)`.
    #[inline]
    pub fn next_open_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform integer in `[0, bound)`; `bound` must be nonzero.
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        // Lemire's multiply-and-reject.
        let mut m = u128::from(self.next_u64()) * u128::from(bound);
        if (m as u64) < bound {
            let threshold = bound.wrapping_neg() % bound;
            while (m as u64) < threshold {
                m = u128::from(self.next_u64()) * u128::from(bound);
            }
        }
        (m >> 64) as u64
    }

    /// Uniform integer in the inclusive range `[lo, hi]`.
    pub fn next_in_range(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = hi.wrapping_sub(lo) as u64;
        if span == u64::MAX {
            return self.next_u64() as i64;
        }
        lo.wrapping_add(self.next_below(span + 1) as i64)
    }
}
