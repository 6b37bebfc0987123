mod error;
pub mod linalg;
pub mod bench;
pub mod instance;
pub mod models;
pub mod postprocess;
pub mod select;
pub mod solvers;
pub mod spa;

pub use error::{Error, Result};
