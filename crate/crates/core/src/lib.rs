//! Offline toolkit for correlating search-trend relative search volumes
//! (RSV) of symptom keyword groups with epidemic case counts.
//!
//! The pipeline is: [`ingest`] exported files, build per-symptom signals and
//! correlate them with cases in [`surveillance`], and render the outcome with
//! [`report`]. [`synth`] produces fixtures with a known correlation structure.

pub mod series;
pub mod stats;
pub mod ingest;
pub mod surveillance;
pub mod synth;
pub mod report;
pub mod cli;
