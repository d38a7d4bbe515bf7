//! Independent oracles shared by integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

pub mod candidates;
pub mod enumerate;
pub mod textbook;
