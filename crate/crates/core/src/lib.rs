//! Core of a forward-synthesis reinforcement-learning engine.
//!
//! Everything here is `no_std` with `alloc`; file formats, process control and
//! the command line live in the companion `pgfs` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod agent;
pub mod bundled;
pub mod datafile;
pub mod env;
pub mod featurize;
pub mod hash;
pub mod molgraph;
pub mod pattern;
pub mod scoring;
