//! Small deterministic RNG for seeded sampling.
//!
//! Verification reports must be byte-identical across runs and platforms, so
//! sampling uses a fixed splitmix64 stream rather than an external generator.

/// splitmix64 stream; the same seed always yields the same sequence.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// A point of the sampling box `[-2, 2]^dim` used by the verification
    /// suites.
    pub fn sample_box(&mut self, dim: usize) -> alloc::vec::Vec<f64> {
        (0..dim).map(|_| self.uniform(-2.0, 2.0)).collect()
    }
}
