pub mod design;
pub mod error;
pub mod forest;
pub mod kendall;
pub mod linalg;
pub mod linear;
pub mod logistic;
pub mod neighbors;
pub mod stats;
pub mod table;
pub mod viz;
pub mod bias;
pub mod fair;
pub mod causal;
pub mod synth;
pub mod model_io;
pub mod cli;

pub use error::{Error, Result};
