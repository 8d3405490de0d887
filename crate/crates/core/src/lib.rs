pub mod cayley;
pub mod cli;
pub mod error;
pub mod extrapolate;
pub mod flatperm;
pub mod groups;
pub mod metric;
pub mod series;
pub mod spectral;
pub mod words;

pub use error::{Error, Result};
pub use groups::{CanonicalKey, GroupElement, GroupId};
