//! Deformed Airy-kernel Fredholm determinants and their asymptotics.

pub mod airy;
pub mod asymptotics;
pub mod error;
pub mod fredholm;
pub mod kpz_tails;
pub mod parallel;
pub mod quadrature;
pub mod report;
pub mod rh_scalars;
pub mod sigma;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
