pub mod error;
pub mod fracops;
pub mod funcspec;
pub mod gamma;
pub mod inversion;
pub mod output;
pub mod quadrature;
pub mod special;
pub mod timescale;
pub mod verify;
pub mod zdomain;

pub use error::{Error, Result};
