//! Counter-based substream derivation.
//!
//! One master seed drives an entire experiment. Every (replicate, entry,
//! purpose) tuple gets its own ChaCha stream derived by hashing the tuple
//! into a 256-bit seed, so paths are bit-reproducible no matter in which
//! order or on how many threads replicates run.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream purpose tags keep substreams for different uses disjoint even
/// when the remaining coordinates coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    JumpTimes = 1,
    JumpMarks = 2,
    BrownianIncrements = 3,
    Auxiliary = 4,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent ChaCha stream from the master seed and a word
/// vector identifying the substream.
pub fn substream(master: u64, words: &[u64]) -> ChaCha8Rng {
    let mut state = master ^ 0xD6E8_FEB8_6659_FD93;
    for &w in words {
        state ^= splitmix64(&mut state) ^ w.wrapping_mul(0xA24B_AED4_963E_E407);
        splitmix64(&mut state);
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Substream coordinates for one replicate of one experiment.
#[derive(Debug, Clone, Copy)]
pub struct ReplicateStreams {
    pub master: u64,
    pub replicate: u64,
}

impl ReplicateStreams {
    pub fn new(master: u64, replicate: u64) -> Self {
        ReplicateStreams { master, replicate }
    }

    /// Stream for a given purpose and driver entry `(row, col)`.
    /// `attempt` is bumped when a path must be re-drawn.
    pub fn entry_stream(
        &self,
        kind: StreamKind,
        row: usize,
        col: usize,
        attempt: u64,
    ) -> ChaCha8Rng {
        substream(
            self.master,
            &[
                kind as u64,
                self.replicate,
                row as u64,
                col as u64,
                attempt,
            ],
        )
    }
}
