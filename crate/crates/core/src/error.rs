use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not line up. Shapes are `(rows, cols)`.
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    /// Backward pass requested before a forward pass populated the caches.
    MissingCache,
    /// Optimizer step requested with no accumulated gradients.
    NoGradients,
    IndexOutOfRange { index: usize, len: usize },
    /// Fewer than two samples where a batch statistic is required.
    DegenerateBatch(usize),
    /// AUROC needs both classes present.
    SingleClass,
    InvalidConfig(String),
    InvalidArgument(String),
    /// A loss or activation became NaN or infinite.
    NonFinite(&'static str),
    EmptyDataset,
    /// Every attribute was disqualified, or none were supplied.
    NoQualifiedAttributes,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape { op, left, right } => write!(
                f,
                "{op}: shape mismatch between {}x{} and {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::MissingCache => f.write_str("backward called without a preceding forward pass"),
            Error::NoGradients => f.write_str("optimizer step without accumulated gradients"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::DegenerateBatch(k) => {
                write!(f, "batch of {k} sample(s) is too small; at least 2 required")
            }
            Error::SingleClass => f.write_str("AUROC undefined: labels contain a single class"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NonFinite(what) => write!(f, "non-finite value encountered in {what}"),
            Error::EmptyDataset => f.write_str("dataset is empty"),
            Error::NoQualifiedAttributes => f.write_str("no attribute qualifies for scoring"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
