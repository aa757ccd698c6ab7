//! Minimal differentiable building blocks, double precision throughout.
//!
//! Layers keep no state besides parameter handles. Forward passes return
//! plain vectors, backward passes take the forward input back and accumulate
//! parameter gradients into the [`ParamStore`]. Sums run in ascending index
//! order so forward passes are bit-reproducible.

mod gradcheck;
mod layers;
mod loss;
mod optim;
mod params;
mod tensor;

pub use gradcheck::{grad_check, grad_check_coords, relative_error};
pub use layers::{
    conv2d_apply, conv2d_apply_backward, dense_apply, dense_apply_backward, maxpool2d,
    maxpool2d_backward, relu, relu_backward, Conv2d, ConvGeometry, Dense, Pooled,
};
pub use loss::{bce, bce_grad, bce_logit_grad, mse, mse_grad, multilabel_bce, multilabel_bce_grad, PROB_EPS};
pub use optim::{LrSchedule, Sgd};
pub use params::{Param, ParamId, ParamStore};
pub use tensor::Tensor;
