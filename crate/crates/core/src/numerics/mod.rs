//! Dense linear algebra, activations, seeded sampling and multiply-add counting.

mod counter;
mod rng;
mod tensor;

pub use counter::OpCounter;
pub use rng::{seeded_uniform, SeededRng};
pub use tensor::{elementwise, matmul, sigmoid, Elementwise, Tensor2};
