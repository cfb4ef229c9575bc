//! Per-replication random streams.
//!
//! A [`RandomStream`] is a ChaCha8 generator keyed by `seed` (expanded with
//! `SeedableRng::seed_from_u64`) and positioned on ChaCha stream `stream_id`.
//! Each stream has a 2^68-byte period and distinct stream ids index disjoint
//! keystreams, so `(seed, stream_id)` pins the whole uniform sequence.
//!
//! Every uniform consumes exactly one 64-bit output:
//!
//! - [`RandomStream::next_uniform`]: `(x >> 11) * 2^-53`, in `[0, 1)`.
//! - [`RandomStream::next_open_uniform`]: `((x >> 11) + 0.5) * 2^-53`, in `(0, 1)`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::normal::quantile_unchecked;

const SCALE: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
    consumed: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
            consumed: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of uniforms drawn so far.
    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    #[inline]
    fn next_bits(&mut self) -> u64 {
        self.consumed += 1;
        self.rng.next_u64() >> 11
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        self.next_bits() as f64 * SCALE
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    pub fn next_open_uniform(&mut self) -> f64 {
        (self.next_bits() as f64 + 0.5) * SCALE
    }

    /// Event with probability `p`: true iff `u < p`.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_uniform() < p
    }

    /// Standard normal variate by inverse-CDF transform of one open uniform.
    #[inline]
    pub fn next_standard_normal(&mut self) -> f64 {
        quantile_unchecked(self.next_open_uniform())
    }
}
