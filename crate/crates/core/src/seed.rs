//! Master-seed splitting. Every consumer of randomness gets its own ChaCha
//! stream of the master seed, so switching the regularizer never perturbs
//! the data or the initialization.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Data = 0,
    Init = 1,
    Shuffle = 2,
    Selection = 3,
    Dropout = 4,
    Oracle = 5,
}

pub fn rng_for(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}
