//! Seed derivation and counter-based random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream keyed by
//! a 64-bit seed and a [`Stream`] tag. The `i`-th uniform of a stream belongs
//! to the `i`-th item (edge, node, point) in canonical order, so two rules
//! applied with the same seed see exactly the same per-item draws.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Independent purposes a seed can be spent on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Points = 1,
    LinkFailure = 2,
    NodeFailure = 3,
    Thresholds = 4,
    SeedLink = 5,
    Order = 6,
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a path of counters, e.g.
/// `(grid index, trial index)`. Distinct paths give unrelated seeds.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| {
        splitmix64(acc ^ splitmix64(p.wrapping_mul(GOLDEN_GAMMA) ^ 0xD6E8_FEB8_6659_FD93))
    })
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[inline]
fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The first `n` uniforms in `[0, 1)` of a stream.
pub fn uniforms(seed: u64, stream: Stream, n: usize) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Random access to the `index`-th uniform of a stream; agrees with
/// [`uniforms`].
pub fn uniform_at(seed: u64, stream: Stream, index: u64) -> f64 {
    let mut rng = stream_rng(seed, stream);
    rng.set_word_pos(u128::from(index) * 2);
    to_unit(rng.next_u64())
}
