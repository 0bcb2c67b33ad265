pub mod error;
pub mod consistency;
pub mod freq_oracle;
pub mod harness;
pub mod hierarchy;
pub mod query;
pub mod rng;
pub mod wavelet;
