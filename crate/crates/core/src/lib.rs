pub mod boundlab;
pub mod cli;
pub mod decomp;
pub mod error;
pub mod exactmat;
pub mod gensiegel;
pub mod gl2;
pub mod segments;
pub mod siegel;

pub use error::{Error, Result};
