//! Split hidden quantum Markov models (SHQMM).
//!
//! The hidden state is an ensemble of conditional density matrices
//! `ρ^(0..N_max−1)` coupled `k`-locally through `j = 2k+1` classes of Kraus
//! operators per symbol. Parameters are learned by maximum likelihood with
//! Cayley-transform gradient descent on the Stiefel manifold of stacked Kraus
//! operators. HQMM and classical HMM (Baum-Welch) baselines, seeded data
//! generators and the description-accuracy (DA) metric are included.
//!
//! ```
//! use shqmm_core::learning::{train, TrainConfig};
//! use shqmm_core::metrics::da_report;
//!
//! let data = vec![vec![0, 1, 0, 1, 0, 1], vec![1, 0, 1, 0, 1, 0]];
//! let cfg = TrainConfig { m: 2, dim_o: 2, n_max: 3, k: 1, epochs: 3, ..Default::default() };
//! let (model, history) = train(&cfg, &data, &data).unwrap();
//! assert_eq!(history.losses.len(), 3);
//! let report = da_report(&model, &data).unwrap();
//! assert!(report.mean <= 1.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod error;
pub mod learning;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod quantum;
pub mod random;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use model::{Boundary, HmmModel, HqmmModel, KrausModel, SequenceModel, ShqmmModel};
pub use quantum::{
    param_count, split_point, stack_bundle, validate_density, ConditionalDensityEnsemble, DensityMatrix,
    KrausBundle, StiefelPoint,
};
