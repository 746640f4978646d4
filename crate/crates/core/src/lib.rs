//! KAM normal forms for the truncated one-dimensional nonlinear Klein-Gordon
//! equation.

pub mod config;
pub mod hamalg;
pub mod indices;
pub mod kam;
pub mod nlkg;
pub mod report;
pub mod resonance;
pub mod rng;
pub mod verify;
