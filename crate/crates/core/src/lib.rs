pub mod error;
pub mod galois;
pub mod network;
pub mod factorgraph;
pub mod sumprod;
pub mod support;
pub mod decoder;

pub use decoder::{decode_gaussian, decode_mp, DecodeOptions, DecodeResult, TargetOutcome};
pub use error::{Error, Result};
pub use factorgraph::{build_ncfg, FactorGraph};
pub use galois::{Coset, FVector, Field, Gf, Subspace};
pub use network::{Network, Observation};
