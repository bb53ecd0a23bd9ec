use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("weight exponent must satisfy lambda > -1, got {0}")]
    InvalidWeight(f64),

    #[error("combinatorial count overflows 64-bit range (n = {n}, cap = {cap})")]
    Overflow { n: usize, cap: u32 },

    #[error("fiber label {label:?} exceeds degree cap {cap}")]
    CapExceeded { label: Vec<u32>, cap: u32 },

    #[error("point is not strictly inside the unit ball (|z|^2 = {norm_sq})")]
    OutsideBall { norm_sq: f64 },

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("invalid quadrature parameters: {0}")]
    InvalidQuadrature(String),

    #[error("non-finite value {value} encountered at node {node:?}")]
    NonFinite { value: f64, node: Vec<f64> },

    #[error("quadrature did not converge: {coarse} ({coarse_nodes} nodes) vs {fine} ({fine_nodes} nodes)")]
    NonConvergence {
        coarse: f64,
        fine: f64,
        coarse_nodes: usize,
        fine_nodes: usize,
    },

    #[error("at fiber label {label:?}: {source}")]
    AtLabel { label: Vec<u32>, source: Box<Error> },

    #[error("operator metadata mismatch: {0}")]
    MetadataMismatch(String),

    #[error("index {index} out of range (expected 1..={max})")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix does not respect the block structure of {0:?}")]
    BlockStructure(Vec<usize>),

    #[error("partition {coarse:?} is not below {fine:?} in the refinement order")]
    NotRefinement {
        coarse: Vec<usize>,
        fine: Vec<usize>,
    },

    #[error("window {window} exceeds degree cap {cap}")]
    WindowTooLarge { window: u32, cap: u32 },

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn at_label(self, label: &[u32]) -> Self {
        Error::AtLabel {
            label: label.to_vec(),
            source: Box::new(self),
        }
    }

    /// True when the error (or the error it wraps) is a quadrature failure.
    pub fn is_quadrature_failure(&self) -> bool {
        match self {
            Error::NonConvergence { .. } | Error::NonFinite { .. } => true,
            Error::AtLabel { source, .. } => source.is_quadrature_failure(),
            _ => false,
        }
    }
}
