pub mod ar;
pub mod diagnostics;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod par;
pub mod portmanteau;
pub mod quadrature;
pub mod special;
pub mod stable;

pub use error::{Error, Result};
