use alloc::string::String;

/// Errors raised by the core machinery.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("window is empty")]
    EmptyWindow,
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("region is not contained in the geometry window")]
    RegionOutsideWindow,
    #[error("region {what} is not a subset of the ambient region")]
    NotSubset { what: &'static str },
    #[error("vertex ({x}, {y}, {layer}) is outside the symmetrized box")]
    VertexOutsideBox { x: i32, y: i32, layer: u32 },
    #[error("{edges} edges exceed the enumeration cap of {cap}")]
    EnumerationCap { edges: usize, cap: usize },
    #[error("open and close sets overlap on edge {0}")]
    OverlappingSets(u32),
    #[error("configuration has {got} edges, geometry has {expected}")]
    EdgeCountMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("the property is trivial for k = 0")]
    TrivialWidth,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
