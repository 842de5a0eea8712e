//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by
//! `(master seed, stream tag)` and positioned by the replicate index, so a
//! replicate's draws do not depend on which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies what a stream is used for, so that e.g. the constellation and
/// the fading of one replicate are independent but individually reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamTag {
    Constellation = 0x636f_6e73,
    Fading = 0x6661_6465,
    Observer = 0x6f62_7365,
    OrbitSet = 0x6f72_6269,
    Builder = 0x6275_696c,
}

/// Random stream for replicate `replicate` of the run keyed by `master_seed`.
pub fn stream(master_seed: u64, replicate: u64, tag: StreamTag) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&(tag as u64).to_le_bytes());
    key[16..24].copy_from_slice(b"satcox\0\0");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(replicate);
    rng
}
