//! Error type shared by all solver components.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Inconsistent matrix/vector dimensions or non-finite input data.
    Dimension(String),
    /// An operation requiring a nonempty polyhedron received an empty one.
    EmptyPolyhedron,
    /// A cut removed every vertex of an outer approximation. The algorithms
    /// never produce such cuts; this signals inconsistent caller state.
    CutMakesEmpty,
    /// The cone has empty interior; the caller must lift the problem first.
    NonSolidCone,
    /// The cone contains a line, so outer approximations have no vertices.
    ConeNotPointed,
    /// An LP required by the algorithm was infeasible or unbounded in a way
    /// that contradicts the solver's assumptions (S nonempty, C-boundedness,
    /// weight inside the dual cone).
    AssumptionViolated(String),
    /// The LP backend hit a numerical breakdown (pivot below threshold,
    /// singular basis, or failed post-solve checks).
    LpFailure(String),
    /// The objective returned NaN or +inf at a point where the algorithm
    /// needs a usable value.
    ObjectiveImproper(String),
    /// No feasible preimage exists for a point claimed to lie in P[S].
    PreimageInfeasible,
    /// A lifted solution failed the hyperplane membership check.
    ProjectionResidual(f64),
    /// Invalid problem-family parameters.
    InvalidInstance(String),
    /// Iteration cap reached before convergence.
    IterationLimit(usize),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(m) => write!(f, "dimension error: {m}"),
            Error::EmptyPolyhedron => write!(f, "polyhedron is empty"),
            Error::CutMakesEmpty => write!(f, "cut makes polyhedron empty (inconsistent caller state)"),
            Error::NonSolidCone => write!(f, "cone has empty interior; lift the problem first"),
            Error::ConeNotPointed => write!(f, "cone is not pointed"),
            Error::AssumptionViolated(m) => write!(f, "assumption violated: {m}"),
            Error::LpFailure(m) => write!(f, "lp failure: {m}"),
            Error::ObjectiveImproper(m) => write!(f, "objective improper: {m}"),
            Error::PreimageInfeasible => write!(f, "no feasible preimage for the requested image point"),
            Error::ProjectionResidual(r) => write!(f, "lifted solution off the projection hyperplane (residual {r:.3e})"),
            Error::InvalidInstance(m) => write!(f, "invalid instance: {m}"),
            Error::IterationLimit(n) => write!(f, "iteration limit of {n} reached"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
