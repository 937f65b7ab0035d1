//! Deterministic pseudo-random generator used for every random choice in
//! the toolkit (splits, fold assignment, bootstraps, feature subsets,
//! synthetic samples).
//!
//! The generator is pinned by its update equations so any implementation,
//! in any language, reproduces identical streams from equal seeds:
//!
//! Seeding (`splitmix64`): starting from the user seed `s`,
//!
//! ```text
//! s := s + 0x9E3779B97F4A7C15                 (wrapping)
//! z := s
//! z := (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9 (wrapping)
//! z := (z XOR (z >> 27)) * 0x94D049BB133111EB (wrapping)
//! output z XOR (z >> 31)
//! ```
//!
//! Four consecutive outputs initialize the state `[s0, s1, s2, s3]` of a
//! `xoshiro256**` generator, whose step is
//!
//! ```text
//! result := rotl(s1 * 5, 7) * 9
//! t  := s1 << 17
//! s2 ^= s0;  s3 ^= s1;  s1 ^= s2;  s0 ^= s3
//! s2 ^= t;   s3 := rotl(s3, 45)
//! ```
//!
//! Derived quantities are likewise fixed:
//!
//! * `next_f64` takes the top 53 bits: `(next_u64 >> 11) * 2^-53` in [0, 1).
//! * `next_below(n)` rejects values under `2^64 mod n`, then reduces
//!   modulo `n` (unbiased).
//! * `shuffle` is a Fisher–Yates pass from the last index down, swapping
//!   index `i` with `next_below(i + 1)`.
//! * `next_normal` is the Box–Muller transform
//!   `sqrt(-2 ln u1) * (cos, sin)(2 pi u2)` with `u1 = 1 - next_f64()`;
//!   the sine mate is cached and returned by the following call.

const GOLDEN: u64 = 0x9E3779B97F4A7C15;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic 64-bit generator (splitmix64-seeded xoshiro256**).
#[derive(Debug, Clone)]
pub struct Rng {
    state: [u64; 4],
    cached_normal: Option<f64>,
}

impl Rng {
    /// Generator seeded from a single 64-bit value.
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let state = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng {
            state,
            cached_normal: None,
        }
    }

    /// Stream seed for substream `index` of a master seed, so per-tree and
    /// per-run substreams never overlap by construction.
    pub fn derive_seed(master: u64, index: u64) -> u64 {
        let mut sm = master ^ index.wrapping_mul(GOLDEN);
        splitmix64(&mut sm)
    }

    pub fn next_u64(&mut self) -> u64 {
        let [s0, s1, s2, s3] = self.state;
        let result = s1.wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s1 << 17;
        let mut n2 = s2 ^ s0;
        let mut n3 = s3 ^ s1;
        let n1 = s1 ^ n2;
        let n0 = s0 ^ n3;
        n2 ^= t;
        n3 = n3.rotate_left(45);
        self.state = [n0, n1, n2, n3];
        result
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform integer in [0, n).
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below(0)");
        let threshold = n.wrapping_neg() % n; // 2^64 mod n
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % n;
            }
        }
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// Standard normal draw (Box–Muller, pairwise with caching).
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.next_f64(); // (0, 1]
        let u2 = self.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.cached_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }
}
