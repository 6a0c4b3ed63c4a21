//! Shared fixtures for the criterion benchmarks.

use netloc_core::{synth, Network};

/// Random connected benchmark network with roughly twice as many edges as
/// nodes.
pub fn bench_network(n: usize, seed: u64) -> Network {
    synth::random_connected(n, 2 * n, seed, &Default::default()).unwrap()
}
