pub mod backtest;
pub mod cli;
pub mod dependence;
pub mod dvalue;
pub mod error;
pub mod mixture;
pub mod month;
pub mod panel;
pub mod pipeline;
pub mod rng;
pub mod selection;
pub mod simlab;
pub mod stats;

pub use error::{Error, ErrorKind, Result};
