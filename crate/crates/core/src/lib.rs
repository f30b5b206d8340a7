//! Capacity bounds for relay channels.

pub mod bsc;
pub mod cli;
pub mod discrete;
pub mod error;
pub mod gaussian_primitive;
pub mod gaussian_relay;
pub mod iid;
pub mod info;
pub mod optim;

pub use error::{Error, Result};
pub use optim::SearchConfig;
