use crate::lattice::Point;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("operation requires a nonempty site set")]
    EmptySiteSet,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("dimension {0} out of supported range 1..={max}", max = crate::lattice::MAX_DIM)]
    BadDimension(usize),

    #[error("volume of {got} sites exceeds enumeration cap {cap}")]
    VolumeOverCap { got: usize, cap: usize },

    #[error("local function shape of {got} sites exceeds cap {cap}")]
    ShapeOverCap { got: usize, cap: usize },

    #[error("no spin value available at {0}")]
    MissingSpin(Point),

    #[error("site {0} lies outside the volume")]
    SiteOutsideVolume(Point),

    #[error("site set {0:?} is not contained in the volume")]
    NotSubset(Vec<Point>),

    #[error("kernel sum diverges: exponent s = {s} but the {norm} norm requires s > {min}")]
    KernelDivergent { s: f64, min: f64, norm: &'static str },

    #[error("dependence set of {got} sites exceeds enumeration cap {cap}; use the variation-norm criterion instead")]
    DependenceOverCap { got: usize, cap: usize },

    #[error("truncation radius {radius} too small: {need}")]
    TruncationTooSmall { radius: u32, need: String },

    #[error("contour is not part of the configuration's contour family")]
    ContourNotPresent,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("boundary condition invalid: {0}")]
    InvalidBoundary(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
