use std::fmt;

/// Failures surfaced by the library. Each variant names the violated
/// predicate so callers can report it verbatim.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A probability argument fell outside the required interval.
    ProbabilityOutOfRange { name: &'static str, value: f64 },
    /// Analytics operation requires 0 < delta2 < delta1 < 1.
    DegenerateParams { delta1: f64, delta2: f64 },
    /// Requested lattice exceeds what the bit planes can address.
    DimensionOverflow { x: u32, y: u32 },
    /// Coordinates outside the sampled rectangle.
    OutOfRange { x: u32, y: u32, dims: (u32, u32) },
    /// Exact enumeration cap `x * y <= 16` exceeded.
    EnumerationCap { x: u32, y: u32 },
    /// The two-point Laplacian needs `x >= 2`.
    TwoPointNeedsInterior { x: u32 },
    /// The dense boundary law does not dominate the sparse one at this slot.
    NonDominatingBoundary { slot: String },
    /// The pair of ensembles is not edgewise ordered (internal bug signal).
    DominationViolated { at: (u32, u32) },
    /// Boundary slot occupied/empty contrary to what the construction needs.
    SlotConflict { slot: String, expected_present: bool },
    /// Microscopic concavity needs 1 > delta1 > delta2 >= 0 and delta2 <= 1/2.
    ConcavityHypotheses { delta1: f64, delta2: f64 },
    /// Biased-walk environment has two adjacent open edges.
    InvalidEnvironment { x: i64, n: u32 },
    /// characteristic inversion target outside (y*kappa, y/kappa).
    InversionOutOfRange { x1: f64, lo: f64, hi: f64 },
    /// Step-data direction outside the admissible cone (sigma^3 <= 0).
    InadmissibleDirection { x: f64, y: f64 },
    /// ASEP window too small for the requested horizon.
    WindowTooSmall { required: i64, got: i64 },
    /// Fewer abscissae than the fit requires.
    TooFewAbscissae { got: usize, need: usize },
    /// `(b1, b2)` does not satisfy the stationary odds relation.
    NonStationaryPair { b1: f64, b2: f64 },
    /// Estimator invoked with an empty sample set.
    EmptySample,
    /// A trace ended before leaving the box.
    TruncatedTrace,
    /// Malformed binary ensemble dump.
    BadDump(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Error::*;
        match self {
            ProbabilityOutOfRange { name, value } => {
                write!(f, "{name} = {value} is not a valid probability for this operation")
            }
            DegenerateParams { delta1, delta2 } => write!(
                f,
                "requires 0 < delta2 < delta1 < 1, got delta1={delta1}, delta2={delta2}"
            ),
            DimensionOverflow { x, y } => write!(f, "bit planes cannot address {x} x {y}"),
            OutOfRange { x, y, dims } => {
                write!(f, "({x},{y}) outside sampled rectangle {}x{}", dims.0, dims.1)
            }
            EnumerationCap { x, y } => {
                write!(f, "enumeration cap x*y <= 16 exceeded by {x} x {y}")
            }
            TwoPointNeedsInterior { x } => write!(f, "two-point Laplacian needs x >= 2, got {x}"),
            NonDominatingBoundary { slot } => {
                write!(f, "dense boundary does not dominate sparse boundary at {slot}")
            }
            DominationViolated { at } => {
                write!(f, "edgewise domination violated at ({}, {})", at.0, at.1)
            }
            SlotConflict { slot, expected_present } => write!(
                f,
                "boundary slot {slot} must be {} for this construction",
                if *expected_present { "present" } else { "absent" }
            ),
            ConcavityHypotheses { delta1, delta2 } => write!(
                f,
                "concavity coupling needs 1 > delta1 > delta2 >= 0 and delta2 <= 1/2, got ({delta1}, {delta2})"
            ),
            InvalidEnvironment { x, n } => {
                write!(f, "environment has c({x},{n}) = c({},{n}) = 1", x + 1)
            }
            InversionOutOfRange { x1, lo, hi } => {
                write!(f, "inversion target {x1} outside ({lo}, {hi})")
            }
            InadmissibleDirection { x, y } => {
                write!(f, "direction ({x}, {y}) outside the admissible cone")
            }
            WindowTooSmall { required, got } => {
                write!(f, "ASEP window half-width {got} below required {required}")
            }
            TooFewAbscissae { got, need } => write!(f, "need at least {need} abscissae, got {got}"),
            NonStationaryPair { b1, b2 } => {
                write!(f, "({b1}, {b2}) violates the stationary odds relation beta1 = kappa beta2")
            }
            EmptySample => write!(f, "empty sample set"),
            TruncatedTrace => write!(f, "trace ends inside the box"),
            BadDump(msg) => write!(f, "malformed ensemble dump: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
