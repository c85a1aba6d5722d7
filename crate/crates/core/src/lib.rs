//! Discrete-event simulator of approximate computation reuse on a grid of
//! satellites.

pub mod channel;
pub mod collab;
pub mod domain;
pub mod lsh;
pub mod reuse;
pub mod scrt;
pub mod similarity;
pub mod workload;
pub mod engine;
pub mod cli;
