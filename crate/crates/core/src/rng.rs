//! Seed derivation for reproducible parallel sampling.
//!
//! Every stochastic task gets its own generator seeded from the run's master
//! seed and a stable task key, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TaskRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn derive_seed(master: u64, key: &str) -> u64 {
    splitmix64(master ^ splitmix64(fnv1a(key.as_bytes())))
}

pub fn task_rng(master: u64, key: &str) -> TaskRng {
    TaskRng::seed_from_u64(derive_seed(master, key))
}

pub fn indexed_rng(master: u64, key: &str, index: u64) -> TaskRng {
    TaskRng::seed_from_u64(splitmix64(derive_seed(master, key) ^ splitmix64(index)))
}
