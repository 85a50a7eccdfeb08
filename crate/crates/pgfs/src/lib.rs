//! Files, processes and the command line around [`pgfs_core`].

pub use pgfs_core;

pub mod blocks;
pub mod cli;
pub mod commands;
pub mod config;
pub mod corpus;
pub mod error;
pub mod external;
pub mod output;
pub mod persist;

pub use error::{Category, Error, Result};
