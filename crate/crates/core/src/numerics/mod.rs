//! Dense linear algebra and hand-differentiated multilayer perceptrons.

mod activation;
mod adam;
pub mod gradcheck;
mod layer;
mod matrix;
mod mlp;

pub use activation::{sigmoid, Activation, SELU_ALPHA, SELU_SCALE};
pub use adam::AdamConfig;
pub use gradcheck::{gradient_check, GradCheck};
pub use layer::DenseLayer;
pub use matrix::{matmul, Matrix};
pub use mlp::Mlp;
