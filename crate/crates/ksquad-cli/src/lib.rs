//! Batch verification driver for the ksquad library: seeded residual
//! suites with machine-readable reports, and level-set portraits of the
//! reduced quadrupolar phase plane.
//!
//! Everything here is deterministic: randomness comes from per-check
//! ChaCha8 streams derived from the report seed, quadratures use fixed
//! node counts, and timing is reported as work counters rather than
//! wall-clock numbers, so a report is byte-identical across runs with
//! the same configuration.

pub mod portrait;
pub mod report;
pub mod suites;
