//! Seeded Gaussian noise source.
//!
//! The stream is fully specified so other implementations can reproduce it:
//!
//! 1. The 64-bit seed is expanded into four state words by SplitMix64
//!    (`z += 0x9E3779B97F4A7C15; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
//!    z = (z ^ z>>27) * 0x94D049BB133111EB; out = z ^ z>>31`).
//! 2. Uniform 64-bit words come from xoshiro256** on that state.
//! 3. A uniform double in [0, 1) is `(word >> 11) * 2^-53`.
//! 4. Normals use Box–Muller on consecutive uniforms `u1, u2`:
//!    `r = sqrt(-2 ln(1 - u1))`, yielding `r cos(2π u2)` then `r sin(2π u2)`.

use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct NoiseRng {
    state: [u64; 4],
    spare: Option<f64>,
}

fn splitmix64(z: &mut u64) -> u64 {
    *z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut x = *z;
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl NoiseRng {
    pub fn new(seed: u64) -> Self {
        let mut z = seed;
        let state = [
            splitmix64(&mut z),
            splitmix64(&mut z),
            splitmix64(&mut z),
            splitmix64(&mut z),
        ];
        NoiseRng { state, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.standard_normal()).collect()
    }
}
