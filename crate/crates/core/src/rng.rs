//! Seeded random source shared by the solvers and problem generators.
//!
//! The integer stream is ChaCha8 seeded through `seed_from_u64`, which is
//! value-stable across platforms and crate versions. Derived quantities are
//! fixed transforms of that stream:
//!
//! * `uniform()` takes the top 53 bits of one `u64` and scales by `2^-53`,
//!   giving a value in `[0, 1)`.
//! * `gaussian()` is the Marsaglia polar method: draw `u, v = 2·uniform() − 1`
//!   until `0 < s = u² + v² < 1`, return `u·√(−2 ln s / s)` and cache
//!   `v·√(−2 ln s / s)` for the next call.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RandomSource {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Seed for an independent stream, e.g. one per thread or per trial.
    pub fn derive_seed(base: u64, stream: u64) -> u64 {
        splitmix64(base ^ splitmix64(stream.wrapping_add(0x9E37_79B9_7F4A_7C15)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn gaussian(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
