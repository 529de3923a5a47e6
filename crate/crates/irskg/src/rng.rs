//! Deterministic RNG derivation.
//!
//! Every random quantity in the crate flows from a `(seed, purpose, trial)`
//! triple so that Monte-Carlo sweeps can run trials in parallel while staying
//! byte-reproducible. The purpose tag selects an independent substream; the
//! trial index selects the ChaCha stream within it, so drawing order inside
//! one trial never affects any other trial.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// SplitMix64 step, used only to expand seeds into ChaCha keys.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Root RNG for a (seed, purpose) pair.
pub fn purpose_rng(seed: u64, purpose: u64) -> ChaCha8Rng {
    let mut state = seed ^ purpose.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// RNG for one trial of a (seed, purpose) stream.
pub fn trial_rng(seed: u64, purpose: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = purpose_rng(seed, purpose);
    rng.set_stream(trial.wrapping_add(1));
    rng
}

/// One circularly-symmetric complex Gaussian draw with the given variance:
/// independent real and imaginary parts, each with half the variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance * 0.5).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}
