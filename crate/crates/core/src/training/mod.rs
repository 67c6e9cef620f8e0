//! Loss, optimizer, learning-rate schedule, the training loop and gradient checking.

mod adam;
mod config;
mod gradcheck;
mod gradients;
mod loss;
mod trainer;

pub use adam::{adam_step, AdamState};
pub use config::{lr_at, TrainConfig};
pub use gradcheck::{generic_params, grad_check, relative_error, GradCheckReport};
pub use gradients::{batch_loss, compute_gradients, evaluate, CHUNK};
pub use loss::{mae_gradient, mae_loss, metrics, ErrorSums, Metrics};
pub use trainer::{train, train_with, EpochRecord, TrainHistory};
