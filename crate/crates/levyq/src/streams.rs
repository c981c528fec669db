//! Seed splitting.
//!
//! Every random stream is a ChaCha8 generator keyed by the 64-bit experiment
//! seed (`ChaCha8Rng::seed_from_u64(seed)`) with stream number
//!
//! ```text
//! stream = lane · 2^56 + replication · 16 + purpose
//! ```
//!
//! `lane` separates experiments that share a seed, `purpose` separates the
//! initial state, the path and the probes within one replication. Streams of
//! replication `r` depend only on `(seed, lane, r)`, so changing the number
//! of replications never alters earlier replications.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Lane {
    Simulate = 0,
    Estimate = 1,
    Consistency = 2,
    Coverage = 3,
    Resample = 4,
    FigureRealisations = 5,
    FigureInterval = 6,
    FigureResample = 7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 0,
    Path = 1,
    Probes = 2,
}

const MAX_REPLICATION: u64 = 1 << 52;

pub fn substream(seed: u64, lane: Lane, replication: u64, purpose: Purpose) -> ChaCha8Rng {
    assert!(replication < MAX_REPLICATION, "replication index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((lane as u64) << 56) | (replication << 4) | purpose as u64);
    rng
}
