pub mod classical;
pub mod error;
pub mod expr;
pub mod fock;
pub mod lift;
pub mod poly;
pub mod quad;

pub use error::{Error, Result};
