//! Shared fixtures for the benchmarks.

use shqmm_core::datagen::{paper_classical, sample_hmm};
use shqmm_core::learning::{initial_shqmm, TrainConfig};
use shqmm_core::ShqmmModel;

/// Freshly initialised split model with hidden dimension `m` and the
/// default split structure over six symbols, plus `count` classical sequences of `length` symbols.
pub fn fixture(m: usize, count: usize, length: usize) -> (ShqmmModel, Vec<Vec<usize>>) {
    let cfg = TrainConfig {
        m,
        dim_o: 6,
        ..TrainConfig::default()
    };
    let model = initial_shqmm(&cfg).expect("valid default structure");
    let data = sample_hmm(&paper_classical(), count, length, 11).sequences;
    (model, data)
}
