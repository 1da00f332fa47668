pub mod cli;
pub mod error;
pub mod exec;
pub mod fading;
pub mod moments;
pub mod montecarlo;
pub mod outage;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result, Strategy};
