//! Maximum-likelihood learning on the Stiefel manifold, Kraus and ensemble
//! initialization, and the Baum-Welch baseline.

mod baum_welch;
mod cayley;
mod init;
mod objective;
mod train;

pub use baum_welch::{baum_welch_train, BaumWelchFit};
pub use cayley::{cayley_update, stiefel_distance};
pub use init::{init_ensemble, init_stiefel, EnsembleInit};
pub use objective::{batch_loss, grad_kappa, loss_and_grad, GradientBlock};
pub use train::{
    fit, initial_hqmm, initial_shqmm, split_batches, train, train_hqmm, EpochRecord, LossScale, TrainConfig,
    TrainHistory, MAX_STEP_RETRIES,
};
