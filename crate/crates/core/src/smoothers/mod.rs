//! Concrete smoothing functions.

mod lse;
mod moreau;
mod nesterov;

pub use lse::{
    log_sum_exp, sample_index, softmax_into, AffineFamily, ComponentFamily, FnFamily,
    LogSumExpMaxSmoother,
};
pub use moreau::{moreau_hinge, MoreauHingeSmoother};
pub use nesterov::NesterovSimplexMaxSmoother;
