//! Numeric primitives for 1-D convolutional regression networks.
//!
//! Everything operates on flat `f64` buffers. A [`Series`] is a multichannel
//! signal stored channel-major; layer parameters are plain structs with
//! explicit shape fields. Forward passes return post-activation values,
//! backward passes take the cached forward input and output and return
//! gradients with the same layouts as the parameters.

mod conv;
mod dense;
mod dropout;
mod pool;
mod series;

pub use conv::{conv1d_backward, conv1d_forward, ConvGrads, ConvParams, Padding};
pub use dense::{dense_backward, dense_forward, Activation, DenseGrads, DenseParams};
pub use dropout::DropoutMask;
pub use pool::{maxpool_backward, maxpool_forward, PoolRecord};
pub use series::Series;
