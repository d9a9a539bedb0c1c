pub mod biortho;
pub mod dd;
pub mod error;
pub mod expand;
pub mod halfplane;
pub mod hfs;
pub mod kleingordon;
pub mod modular;
pub mod qseries;
pub mod quad;
pub mod real;
pub mod snpoly;
pub mod verify;

pub use error::{HfError, Result};
