//! From-scratch training machinery: Adam, parameter initialization, the
//! summed-RMSE loss, and the mini-batch loop.

mod adam;
mod init;
mod loss;
mod train;

pub use adam::{AdamConfig, AdamState};
pub use init::init_network;
pub use loss::{loss_backward, loss_sum_rmse, per_target_rmse};
pub use train::{
    fit_network, full_set_loss, train_network, LossCurve, LossRow, TrainConfig, TrainSet,
};
