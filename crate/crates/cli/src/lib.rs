//! Configuration, catalog and batch runner behind the `homlab` binary.

pub mod catalog;
pub mod config;
pub mod runner;

/// Exit status of the binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const SOLVER: i32 = 3;
}
