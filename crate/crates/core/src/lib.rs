//! Topological descriptors of local atomic environments in bond networks,
//! empirical distributions of their equivalence classes, and statistics for
//! comparing networks.

pub mod crystals;
pub mod descriptors;
pub mod error;
pub mod ingest;
pub mod network;
pub mod stats;

pub use descriptors::{describe, describe_with, DescriptorConfig, DescriptorKey, DescriptorTag};
pub use error::{Error, Result};
pub use network::{extract_environment, BondNetwork, LocalEnvironment};
