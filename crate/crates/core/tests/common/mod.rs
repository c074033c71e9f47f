//! Test-side oracles, implemented independently of the library code paths.
#![allow(dead_code)]

pub mod dense;
pub mod haar;
pub mod partial_trace;
pub mod quadrature;
pub mod relative;
