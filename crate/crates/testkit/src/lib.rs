//! Seeded random inputs and brute-force reference implementations used by
//! the property and acceptance tests. Nothing here calls the prover, the
//! selection code or the page-tree builder it is used to check.

pub mod docs;
pub mod history;
pub mod horn;
pub mod pages;
pub mod terms;
pub mod yard_sim;

use rand::rngs::StdRng;
use rand::SeedableRng;

/// Deterministic generator for a test case number.
pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
