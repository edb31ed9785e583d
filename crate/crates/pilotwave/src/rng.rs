//! Deterministic named RNG streams.
//!
//! Every random draw in the crate flows from a scenario seed through a named
//! stream, so adding a consumer never perturbs the draws of existing ones.
//! The stream key is sha256(seed_le_bytes ‖ stream_name) feeding ChaCha12.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Stream name for drawing initial trajectory positions.
pub const STREAM_SAMPLING: &str = "sampling";
/// Stream name for the Lyapunov companion-offset direction.
pub const STREAM_LYAPUNOV_OFFSET: &str = "lyapunov-offset";

/// Derive the RNG for (`seed`, `name`).
pub fn named_stream(seed: u64, name: &str) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(name.as_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    ChaCha12Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_independent() {
        let mut a1 = named_stream(42, STREAM_SAMPLING);
        let mut a2 = named_stream(42, STREAM_SAMPLING);
        let mut b = named_stream(42, STREAM_LYAPUNOV_OFFSET);
        let mut c = named_stream(43, STREAM_SAMPLING);
        let xs1: Vec<f64> = (0..8).map(|_| a1.gen()).collect();
        let xs2: Vec<f64> = (0..8).map(|_| a2.gen()).collect();
        let ys: Vec<f64> = (0..8).map(|_| b.gen()).collect();
        let zs: Vec<f64> = (0..8).map(|_| c.gen()).collect();
        assert_eq!(xs1, xs2);
        assert_ne!(xs1, ys);
        assert_ne!(xs1, zs);
    }
}
