//! Wait maps, control allocation and fast-time encounter simulation for a
//! remotely piloted aircraft whose command link suffers latency.

pub mod actors;
pub mod agent;
pub mod cli;
pub mod encounters;
pub mod error;
pub mod geometry;
pub mod mdp;
pub mod sim;

pub use error::{Error, Result};
