pub mod bergman;
pub mod decomposition;
pub mod error;
pub mod gamma;
pub mod lattice;
pub mod oracle;
pub mod quadrature;
pub mod special;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
