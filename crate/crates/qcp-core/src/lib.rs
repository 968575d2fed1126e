//! Solver toolkit for global optimization problems with a quasi-concave
//! objective and linear constraints (QCP):
//!
//! ```text
//!     min f(Px)   s.t.   Ax >= b
//! ```
//!
//! where `f` is quasi-concave and monotone with respect to a polyhedral
//! ordering cone `C`. The optimum is attained at a vertex of the upper image
//! `P[S] + C` of the associated vector linear program, and the solvers locate
//! it by cutting-plane refinement of outer polyhedral approximations, on the
//! primal side ([`qcp::solve_primal_qcp`]) or simultaneously on the primal and
//! dual side ([`qcp::solve_dual_qcp`]). Non-solid monotonicity cones
//! (including `C = {0}`) are handled by a one-dimension lifting
//! ([`lifting::lift_problem`]).
//!
//! The building blocks are public: polyhedron representations with
//! incremental vertex enumeration ([`polyhedral`]), a self-contained
//! primal/dual LP solver ([`lp`]), the scalarizations coupling the two images
//! ([`scalarize`]), full image solvers with a geometric duality cross-check
//! ([`vlp`]), and constructors for the supported problem families
//! ([`problems`]).

pub mod error;
pub mod lifting;
pub mod lp;
pub mod polyhedral;
pub mod problems;
pub mod qcp;
pub mod rng;
pub mod scalarize;
pub mod vlp;

pub use error::Error;

/// Default feasibility / comparison tolerance used throughout the toolkit.
pub const DEFAULT_TOL: f64 = 1e-7;
