//! Halton low-discrepancy sequences with a seed-derived start offset.

const BASES: [u64; 3] = [2, 3, 5];

/// Radical inverse of `index` in the given base.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut f = 1.0 / base as f64;
    while index > 0 {
        result += f * (index % base) as f64;
        index /= base;
        f /= base as f64;
    }
    result
}

/// Streaming Halton point source in the unit cube. The seed selects a start
/// offset so distinct seeds give distinct deterministic clouds.
pub struct HaltonSampler<const N: usize> {
    index: u64,
}

impl<const N: usize> HaltonSampler<N> {
    pub fn new(seed: u64) -> Self {
        // burn-in past the degenerate leading entries, spread by seed
        let offset = 31 + (seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) % 65_536);
        HaltonSampler { index: offset }
    }

    pub fn next_point(&mut self) -> [f64; N] {
        let mut p = [0.0; N];
        for i in 0..N {
            p[i] = radical_inverse(self.index, BASES[i]);
        }
        self.index += 1;
        p
    }
}
