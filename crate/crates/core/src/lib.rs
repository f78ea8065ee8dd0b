//! Deterministic data engine and benchmark harness for fine-grained,
//! position-aware document understanding.
//!
//! The crate covers the full desk-scale pipeline: ingesting parsed document
//! pages, synthesizing figure/color hybrid pages, constructing the thirteen
//! position-aware instruction task families, mixing recipe-driven datasets,
//! and scoring predictions against the benchmark with the text-similarity
//! metric suite.

pub mod conversation;
pub mod corpus;
pub mod geometry;
pub mod metrics;
pub mod rng;
