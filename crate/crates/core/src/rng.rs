//! Named, seeded random substreams.
//!
//! Every stochastic routine takes an explicit seed and derives independent
//! generators from `(seed, key...)` tuples, so results never depend on the
//! order in which work items run or on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_pcg::Pcg64Mcg;

pub type SimRng = ChaCha8Rng;

/// Cheap-to-seed generator for the many short per-step streams of a
/// simulation.
pub type StepRng = Pcg64Mcg;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed and a key path into a single 64-bit value.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    let mut state = seed;
    let mut acc = splitmix64(&mut state);
    for &k in keys {
        state ^= k.wrapping_mul(0xD6E8_FEB8_6659_FD93);
        acc ^= splitmix64(&mut state);
        acc = acc.rotate_left(17);
    }
    acc ^ splitmix64(&mut state)
}

/// A generator for the substream identified by `(seed, keys)`.
pub fn substream(seed: u64, keys: &[u64]) -> SimRng {
    let mut state = derive_seed(seed, keys);
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    SimRng::from_seed(bytes)
}

/// A [`StepRng`] for the substream identified by `(seed, keys)`.
pub fn step_stream(seed: u64, keys: &[u64]) -> StepRng {
    let mut state = derive_seed(seed, keys);
    let hi = splitmix64(&mut state);
    let lo = splitmix64(&mut state);
    Pcg64Mcg::new((u128::from(hi) << 64) | u128::from(lo))
}

/// Stable 64-bit key for a textual stream name.
pub fn name_key(name: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}
