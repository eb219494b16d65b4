//! Test-side oracles shared by the integration suites. Nothing here calls
//! into the code paths these oracles check.
#![allow(dead_code)]

pub mod fd;
pub mod theory;
