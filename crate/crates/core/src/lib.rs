pub mod analytic;
pub mod cli;
pub mod error;
pub mod fock;
pub mod gops;
pub mod interference;
pub mod par;
pub mod sampling;
pub mod states;

pub use error::{Error, Result};
