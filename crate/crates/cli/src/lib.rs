//! Command-line companion to `tcsp-core`: file IO, clocks, benchmark
//! campaigns, summaries, and the censored Wilcoxon analysis.

pub mod bench;
pub mod clock;
pub mod config;
pub mod report;
pub mod stats;
