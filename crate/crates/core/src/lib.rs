pub mod combiner;
pub mod confirmation;
pub mod encoding;
pub mod error;
pub mod group_math;
pub mod keygen;
pub mod presets;
pub mod shamir;
pub mod signing;
pub mod sim;
pub mod verification;
pub mod wire;

pub use error::{Error, Result};
