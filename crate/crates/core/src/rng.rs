//! Seed derivation for reproducible parallel runs.
//!
//! Run `j` of an experiment uses ChaCha stream `j` under the master key, and
//! round `i` of that run starts at a fixed word offset inside the stream. A
//! round's randomness is therefore a function of `(master_seed, j, i)` alone,
//! whatever thread executes it and whatever other rounds consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Words reserved per round. A round draws at most a handful of values.
pub const WORDS_PER_ROUND: u128 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    key: <ChaCha8Rng as SeedableRng>::Seed,
    run: u64,
}

impl SeedStream {
    pub fn new(master_seed: u64, run: u64) -> Self {
        let mut key = [0u8; 32];
        // Spread the 64-bit seed over the key so nearby seeds share no words.
        let mut state = master_seed;
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        Self { key, run }
    }

    pub fn run(&self) -> u64 {
        self.run
    }

    pub fn round_rng(&self, round: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(self.run);
        rng.set_word_pos(round as u128 * WORDS_PER_ROUND);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
