//! Exact analysis of univoque sets of self-similar iterated function systems
//! with rational similitudes.

pub mod automaton;
pub mod builtin;
pub mod cache;
pub mod config;
pub mod dimension;
pub mod error;
pub mod gamma;
pub mod geometry;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
