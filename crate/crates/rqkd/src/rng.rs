//! Counter-based RNG streams.
//!
//! Every stochastic consumer derives its own ChaCha stream from a master seed,
//! a domain tag, and an item id. Streams are independent of evaluation order
//! and thread count, which keeps all sampled outputs bit-identical across
//! serial and parallel runs.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stream domains. Each stochastic subsystem gets its own tag so ids never
/// collide across subsystems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Trajectory = 1,
    ShotAncilla = 2,
    ShotBitstring = 3,
    MatrixElement = 4,
    Repeat = 5,
}

/// Derive a deterministic RNG for `(master_seed, domain, id)`.
pub fn stream_rng(master_seed: u64, domain: Domain, id: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    // One stream per (domain, id); ids in practice stay far below 2^56.
    rng.set_stream(((domain as u64) << 56) ^ id);
    rng
}

/// Fold two ids into one (for per-(element, sub-item) streams).
pub fn pair_id(a: u64, b: u64) -> u64 {
    a.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(b)
}
