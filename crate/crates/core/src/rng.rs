//! Seed splitting and keyed random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream whose
//! key is a 64-bit seed and whose 64-bit stream id names the consumer (a
//! site of the tree, or a replica). ChaCha is a counter-based cipher, so a
//! stream can be regenerated exactly from `(seed, stream id)` on any
//! machine, independent of evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser. A bijection on `u64`.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of replica `index` from a master seed.
///
/// The value is `mix64(master + (index + 1) * 0x9E3779B97F4A7C15)` with
/// wrapping arithmetic, where `mix64` is the SplitMix64 finaliser
/// (shifts 30/27/31, multipliers `0xBF58476D1CE4E5B9` and
/// `0x94D049BB133111EB`). Because the golden-ratio increment is odd and the
/// finaliser is a bijection, distinct indices always give distinct seeds for
/// the same master.
pub fn replicate_seeds(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Independent stream number `stream` under key `seed`.
pub fn keyed_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Exponential waiting time with the given rate.
#[inline]
pub(crate) fn exp_time<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    // U = 0 would give a zero gap; event times must be strictly increasing.
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return -u.ln() / rate;
        }
    }
}

/// Writes `k` distinct uniformly chosen elements of `pool` into `out[..k]`
/// (partial Fisher-Yates on a scratch copy).
#[inline]
pub(crate) fn choose_distinct<R: Rng + ?Sized>(
    rng: &mut R,
    pool: &[usize],
    k: usize,
    scratch: &mut Vec<usize>,
    out: &mut Vec<usize>,
) {
    debug_assert!(k <= pool.len());
    out.clear();
    if k == 1 {
        out.push(pool[rng.random_range(0..pool.len())]);
        return;
    }
    scratch.clear();
    scratch.extend_from_slice(pool);
    let n = scratch.len();
    for i in 0..k {
        let j = rng.random_range(i..n);
        scratch.swap(i, j);
        out.push(scratch[i]);
    }
}
