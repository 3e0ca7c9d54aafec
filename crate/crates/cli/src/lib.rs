//! Command-line driver and experiment harness for the predflow library.

pub mod experiments;
