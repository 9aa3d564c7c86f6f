//! Deterministic test signals shared with the PyWavelets fixture generator.

pub struct SplitMix64(u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

const RATES: [f64; 3] = [60.0, 120.0, 250.0];

/// Same recipe as the Python generator, operation for operation.
pub fn oracle_signal(seed: u64) -> (Vec<f64>, f64) {
    let mut g = SplitMix64(seed);
    let n = 1500 + (g.next_u64() % 4500) as usize;
    let rate = RATES[(g.next_u64() % 3) as usize];
    let mean = 3.0 + 2.0 * g.uniform();
    let a = 0.9 + 0.09 * g.uniform();
    let walk = 0.01 + 0.05 * g.uniform();
    let white = 0.001 + 0.05 * g.uniform();
    let mut y = 0.0;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        y = a * y + (g.uniform() - 0.5) * walk;
        let mut d = mean + y + white * (2.0 * g.uniform() - 1.0);
        if g.uniform() < 0.01 {
            d += 0.5;
        }
        out.push(d);
    }
    (out, rate)
}
