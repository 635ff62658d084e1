//! Seeded random streams.
//!
//! Every random consumer in a run draws from its own ChaCha8 stream derived
//! from the master seed, so runs are reproducible and streams never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type StreamRng = ChaCha8Rng;

/// Well-known stream ids. Per-index streams are `base + index`.
pub mod streams {
    pub const GROUND_TRUTH: u64 = 1;
    pub const CORPUS: u64 = 2;
    pub const TEST_CORPUS: u64 = 3;
    pub const GRAPH: u64 = 4;
    pub const EDGES: u64 = 5;
    pub const CENTRAL_BATCH: u64 = 6;
    pub const CENTRAL_ESTEP: u64 = 7;
    pub const NODE_BASE: u64 = 1 << 20;
    pub const EVAL_BASE: u64 = 1 << 40;
}

pub fn stream(master_seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}

/// Complete serializable position of a ChaCha8 stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

impl RngState {
    pub fn capture(rng: &StreamRng) -> Self {
        RngState {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos(),
        }
    }

    pub fn restore(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }

    pub fn to_text(&self) -> String {
        let hex: String = self.seed.iter().map(|b| format!("{b:02x}")).collect();
        format!("{hex} {} {}", self.stream, self.word_pos)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        if parts.len() != 3 || parts[0].len() != 64 {
            return Err(Error::Parse(format!("malformed rng state `{text}`")));
        }
        let mut seed = [0u8; 32];
        for (i, byte) in seed.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&parts[0][2 * i..2 * i + 2], 16)
                .map_err(|e| Error::Parse(format!("rng seed: {e}")))?;
        }
        let stream = parts[1].parse().map_err(|e| Error::Parse(format!("rng stream: {e}")))?;
        let word_pos = parts[2]
            .parse()
            .map_err(|e| Error::Parse(format!("rng word position: {e}")))?;
        Ok(RngState { seed, stream, word_pos })
    }
}
