//! Seeded deterministic generator for sweep draws. SplitMix64: tiny, fast,
//! and stable across platforms, which keeps suite verdict tables and CSV
//! artifacts byte-identical for a given seed.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// A nonnegative two-bump radial test function with randomized amplitudes,
/// centers and widths; the workhorse field family for inequality sweeps.
pub fn random_bump(rng: &mut SplitMix64) -> impl Fn(f64) -> f64 {
    let a1 = rng.range(0.2, 2.0);
    let c1 = rng.range(0.0, 3.0);
    let w1 = rng.range(0.3, 1.5);
    let a2 = rng.range(0.0, 1.0);
    let c2 = rng.range(0.0, 4.0);
    let w2 = rng.range(0.4, 2.0);
    move |r: f64| {
        a1 * (-(r - c1) * (r - c1) / (w1 * w1)).exp()
            + a2 * (-(r - c2) * (r - c2) / (w2 * w2)).exp()
    }
}
