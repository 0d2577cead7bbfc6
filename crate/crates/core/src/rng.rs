//! Per-trial random streams derived from a master seed.
//!
//! Every Monte Carlo trial gets its own ChaCha8 stream keyed by the master
//! seed and selected by the trial index. A trial's draws therefore depend
//! only on `(master_seed, index)`, never on which worker ran it or in what
//! order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream handed to samplers and protocols.
pub type Stream = ChaCha8Rng;

/// Stream for trial `index` under `master_seed`.
pub fn trial_stream(master_seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
