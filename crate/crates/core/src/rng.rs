//! Counter-addressed random draws.
//!
//! Every draw is a pure function of `(seed, stream, index)`: a ChaCha8 block
//! cipher keyed by the seed, with the stream id selecting an independent
//! keystream and the index selecting the word position inside it. Results
//! therefore never depend on evaluation order or thread count.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream identifiers for every random quantity in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    RisToUplinkUsers = 1,
    UplinkUsersToBs = 2,
    DownlinkUsersFromRis = 3,
    DownlinkUsersFromBs = 4,
    RisInit = 16,
    PhaseDeviation = 17,
}

/// One addressable keystream.
pub struct KeyedStream {
    rng: ChaCha8Rng,
}

const WORDS_PER_DRAW: u128 = 4;

impl KeyedStream {
    pub fn new(seed: u64, stream: Stream) -> Self {
        Self::with_subkey(seed, stream, 0)
    }

    /// A stream further keyed by `subkey` (e.g. a sweep-point index).
    pub fn with_subkey(seed: u64, stream: Stream, subkey: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((stream as u64) << 32) | subkey as u64);
        Self { rng }
    }

    fn words(&mut self, index: u64) -> (u64, u64) {
        self.rng.set_word_pos(index as u128 * WORDS_PER_DRAW);
        (self.rng.next_u64(), self.rng.next_u64())
    }

    /// Uniform draw in `[0, 1)` at `index`.
    pub fn uniform(&mut self, index: u64) -> f64 {
        (self.words(index).0 >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Circularly-symmetric complex Gaussian with unit variance at `index`.
    pub fn complex_gaussian(&mut self, index: u64) -> Complex64 {
        let (a, b) = self.words(index);
        // Box–Muller on (0, 1] so the logarithm stays finite.
        let u1 = unit_open_closed(a);
        let u2 = unit_open_closed(b);
        let radius = (-u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        Complex64::from_polar(radius, angle)
    }
}

/// Maps 53 high bits to `(0, 1]`.
fn unit_open_closed(word: u64) -> f64 {
    ((word >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

/// SplitMix64 finalizer; derives per-trial seeds from a base seed.
pub fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
