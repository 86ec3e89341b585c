//! Self-contained seeded random number generator.
//!
//! xoshiro256++ seeded through SplitMix64 (the seeding procedure
//! recommended by the xoshiro authors). Hand-rolled so that seeded runs
//! stay bit-identical across platforms and dependency upgrades, which
//! the replay and determinism guarantees rely on.

/// Deterministic xoshiro256++ stream.
#[derive(Debug, Clone)]
pub struct Rng {
    state: [u64; 4],
}

impl Rng {
    /// Build a generator from a 64-bit seed. Distinct seeds give
    /// statistically independent streams (SplitMix64 expansion).
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = seed;
        let mut state = [0u64; 4];
        for s in &mut state {
            // SplitMix64 step.
            sm = sm.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = sm;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            *s = z ^ (z >> 31);
        }
        Rng { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let [ref mut s0, ref mut s1, ref mut s2, ref mut s3] = self.state;
        let result = s0
            .wrapping_add(*s3)
            .rotate_left(23)
            .wrapping_add(*s0);
        let t = *s1 << 17;
        *s2 ^= *s0;
        *s3 ^= *s1;
        *s1 ^= *s2;
        *s0 ^= *s3;
        *s2 ^= t;
        *s3 = s3.rotate_left(45);
        result
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n` via widening multiply. `n` must be positive.
    pub fn uniform_usize(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (((self.next_u64() as u128) * (n as u128)) >> 64) as usize
    }

    /// Exponential variate with the given rate (mean `1/rate`).
    pub fn exp(&mut self, rate: f64) -> f64 {
        debug_assert!(rate > 0.0);
        let mut u = self.uniform();
        if u == 0.0 {
            u = f64::MIN_POSITIVE;
        }
        -u.ln() / rate
    }
}
