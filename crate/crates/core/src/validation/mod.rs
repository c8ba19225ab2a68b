//! Independent oracles: brute-force marginal integration and Metropolis
//! sampling of the Boltzmann weight.

pub mod metropolis;
pub mod oracle;

pub use metropolis::{metropolis_sample, ChainReport, Histogram, McSettings, Proposal, SampleSet};
pub use oracle::{oracle_correlation, oracle_partition, OracleGrid};
