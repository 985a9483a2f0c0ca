use thiserror::Error;

/// Every failure the library can report.
///
/// Variants split into two families. Domain errors mean the input lies
/// outside the region where the requested quantity is defined (a tangent
/// chord, a target frequency outside the range). Numeric errors mean a
/// well-posed computation failed to converge.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("semiaxes must be positive and strictly increasing: {0}")]
    DegenerateEllipsoid(String),
    #[error("degenerate chord at step {step}: ray grazes the ellipsoid")]
    DegenerateChord { step: usize },
    #[error("singular caustic: {0}")]
    SingularCaustic(String),
    #[error("phase point outside the annulus r^2 < a sin^2(phi) + b cos^2(phi)")]
    OutsideAnnulus,
    #[error("integration interval collapsed (length {length:e} below {threshold:e})")]
    CollapsedInterval { length: f64, threshold: f64 },
    #[error("adaptive quadrature did not converge: {0}")]
    NonConvergent(String),
    #[error("pole at distance {distance:e} from the integration interval")]
    PoleTooClose { distance: f64 },
    #[error("caustic parameter within {gap:e} of a collapse; use the extended frequency map")]
    NearCollapse { gap: f64 },
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("parameter sits at a singular value: {0}")]
    SingularParameter(String),
    #[error("edge formulas are only available for n <= 2 (got n = {0})")]
    UnsupportedDimension(usize),
    #[error("target frequency is not in the range of the frequency map: {0}")]
    NotInRange(String),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("argument too close to an endpoint; limit value is {limit}")]
    NearEndpoint { limit: f64 },
    #[error("collapse kind does not match the configuration: {0}")]
    KindMismatch(String),
    #[error("orbit does not close (residual {residual:e})")]
    NotClosed { residual: f64 },
    #[error("ambiguous winding count: {0}")]
    AmbiguousCount(String),
    #[error("no transition found on this slice")]
    EmptySlice,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures of numerical procedures on well-posed input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonConvergent(_) | Error::SingularSystem(_) | Error::NoConvergence(_) | Error::AmbiguousCount(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
