pub mod error;
pub mod fock;
pub mod gpc;
pub mod matels;
pub mod rdm;
pub mod scpt;

pub use error::{Error, Result};
