//! Counter-based random streams.
//!
//! Every Monte Carlo trial draws from its own ChaCha8 stream, addressed by
//! `(seed, stream id)`. Results therefore do not depend on how trials are
//! scheduled across worker threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Bits of the stream id reserved for the trial index.
pub const TRIAL_BITS: u32 = 40;

/// A ChaCha8 generator positioned at `(seed, stream, word counter)`.
pub fn stream_rng(seed: u64, stream: u64, counter: u128) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(counter);
    rng
}

/// Stream id for trial `trial` of SNR point `point`.
pub fn trial_stream(point: usize, trial: u64) -> u64 {
    debug_assert!(trial < (1u64 << TRIAL_BITS));
    ((point as u64) << TRIAL_BITS) | trial
}

/// Circularly symmetric complex Gaussian with `E|z|^2 = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}
