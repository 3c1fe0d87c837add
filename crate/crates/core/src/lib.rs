pub mod config;
pub mod error;
pub mod field;
pub mod kinematics;
pub mod quad;
pub mod signal;
pub mod specfun;
pub mod transfer;

pub use error::{Error, Result};
pub use transfer::{Method, TransferCurve};
