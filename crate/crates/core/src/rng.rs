//! Counter-based random streams.
//!
//! Sample `i` of a run seeded with `master` always draws from the same stream,
//! so output does not depend on how work is split across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn stream(master: u64, index: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(master);
    r.set_stream(index);
    r
}
