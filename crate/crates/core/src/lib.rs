//! Statistical analysis of note distributions in raga performances.
//!
//! The pipeline turns a pitch track into note events ([`ingest`]), counts
//! notes per performance phase and checks them against a multinomial model
//! ([`stats`], [`analysis`]), picks the Vadi and Samvadi by stability, ranks
//! notes by duration, and summarizes the melodic contour ([`melody`]).
//! [`report`] ties everything together for the `ragastat` command-line tool.

pub mod analysis;
pub mod config;
pub mod ingest;
pub mod melody;
pub mod notation;
pub mod report;
pub mod stats;
