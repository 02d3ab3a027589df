//! Deterministic counter-based RNG streams.
//!
//! Replicas of an annealing population are updated with independent streams
//! derived from `(seed, stream, substream)`, so results do not depend on how
//! replicas are scheduled across workers.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step; good avalanche for deriving stream keys.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent ChaCha8 generator from a base seed and two stream
/// coordinates (typically annealing step and replica index).
pub fn stream_rng(seed: u64, stream: u64, substream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = seed ^ 0xd1b5_4a32_d192_ed03;
    let mut words = [0u64; 4];
    words[0] = splitmix64(&mut state) ^ stream.wrapping_mul(0xa24b_aed4_963e_e407);
    words[1] = splitmix64(&mut state) ^ substream.wrapping_mul(0x9fb2_1c65_1e98_df25);
    words[2] = splitmix64(&mut state).wrapping_add(stream);
    words[3] = splitmix64(&mut state).wrapping_add(substream);
    // one more mixing pass so stream/substream bits diffuse into every word
    for w in words.iter_mut() {
        let mut s = *w;
        *w = splitmix64(&mut s);
    }
    for (i, w) in words.iter().enumerate() {
        key[i * 8..(i + 1) * 8].copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
