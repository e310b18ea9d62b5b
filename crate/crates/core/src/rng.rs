//! Small deterministic PRNG so every stage is reproducible from a seed,
//! independent of platform or crate-version churn.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Derives an independent stream for a sub-task (per-user, per-epoch).
    pub fn derive(&self, salt: u64) -> Self {
        let mut r = SplitMix64::new(self.state ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        r.next_u64();
        SplitMix64::new(r.next_u64())
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n). n must be > 0.
    #[inline]
    pub fn gen_range(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // modulo bias is negligible for the catalog sizes involved
        (self.next_u64() % n as u64) as usize
    }

    /// Draws `count` distinct elements from `pool` by partial Fisher-Yates.
    pub fn sample_distinct<T: Copy>(&mut self, pool: &mut [T], count: usize) -> alloc::vec::Vec<T> {
        let count = count.min(pool.len());
        let mut out = alloc::vec::Vec::with_capacity(count);
        let len = pool.len();
        for i in 0..count {
            let j = i + self.gen_range(len - i);
            pool.swap(i, j);
            out.push(pool[i]);
        }
        out
    }
}
