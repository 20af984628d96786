//! Exact counts, correlations and asymptotics for Aztec regions with
//! holes and separations on a diagonal.

pub mod asymptotics;
pub mod correlation;
pub mod error;
pub mod exact_count;
pub mod exact_value;
pub mod hist;
pub mod kernels;
pub mod lattice;
pub mod match_oracle;
pub mod numeric;
pub mod par;
pub mod primes;
pub mod suites;

pub use error::{Error, Result};
pub use exact_value::ExactValue;
pub use lattice::{parse_config, translate, DefectConfig, Kind};
pub use numeric::NumericContext;
