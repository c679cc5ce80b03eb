//! Deterministic random streams.
//!
//! Every random object is drawn from a `ChaCha8Rng` seeded with an explicit
//! 64-bit seed. Sub-streams (per sample, per restart, per measured term) get
//! their own seed from [`derive_seed`], a SplitMix64 mix of the master seed,
//! a stream tag and a counter, so results never depend on scheduling order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64};

pub type StreamRng = ChaCha8Rng;

pub fn rng(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th draw of sub-stream `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
}

/// Stream tags used across the crate.
pub mod stream {
    pub const VALIDATE_STATES: u64 = 1;
    pub const VALIDATE_SEPARABLE: u64 = 2;
    pub const FEF_RESTART: u64 = 3;
    pub const KERNEL_SEARCH: u64 = 4;
    pub const MEASURE_TERM: u64 = 5;
    pub const SEPARABLE_TERM: u64 = 6;
}

/// Complex normal draw: real part then imaginary part, each `N(0, 1)`.
pub fn complex_normal(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn complex_normal_vec(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    (0..n).map(|_| complex_normal(rng)).collect()
}

/// Ginibre matrix, entries drawn in row-major order.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}
