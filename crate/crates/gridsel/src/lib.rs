//! Power-grid simulation and learned dispatch selection.
//!
//! `gridsel` bundles everything needed to study congestion-aware solar
//! dispatch on a small transmission grid:
//!
//! * a grid data model with a plain-text file format ([`grid`]),
//! * an AC load-flow solver with branch-loading and congestion reports
//!   ([`powerflow`]),
//! * synthetic solar/load scenario generation and labeled dataset
//!   construction ([`scenario`]),
//! * a small from-scratch learning stack: dense neural nets trained with
//!   Adam, and a linear SVM ([`ml`]),
//! * pipelines that train congestion classifiers ([`congestion`]) and a
//!   dispatch-penalty regressor used to pick which solar units to switch
//!   off ([`subset`]),
//! * a command-line front end ([`cli`]).
//!
//! Everything is deterministic: every random draw flows from an explicit
//! seed, so datasets, trained models, and dispatch decisions reproduce
//! byte-for-byte.
//!
//! # Quick start
//!
//! ```
//! use gridsel::grid::reference_network;
//! use gridsel::powerflow::{injections_at, solve_ac};
//!
//! let net = reference_network();
//! let inj = injections_at(&net, 1.0);
//! let sol = solve_ac(&net, &inj, 1e-8, 30).unwrap();
//! assert!(sol.converged);
//! ```

pub mod cli;
pub mod congestion;
pub mod grid;
pub mod ml;
pub mod powerflow;
pub mod scenario;
pub mod subset;

pub mod book;

/// Version string stamped into artifact metadata.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 digest, used to fingerprint datasets and input files in
/// reports and metadata sidecars.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
