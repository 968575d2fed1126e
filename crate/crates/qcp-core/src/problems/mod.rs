//! Constructors for the supported problem families: linear multiplicative
//! programs, concave quadratic programs, difference-of-convex programs with
//! one polyhedral component, and convex minimization over the boundary of a
//! polytope, plus JSON instance files and built-in demo instances.

mod boundary;
mod builtin;
mod conjugate;
mod cqp;
mod dc;
mod fw;
mod io;
mod lmp;

pub use boundary::make_boundary_problem;
pub use builtin::{boundary_example, chain_value, dc_chain, dc_chain_dual, example41};
pub use conjugate::{eval_epigraph, polyhedral_conjugate};
pub use cqp::{gen_cqp_random, make_cqp, sin_floor_matrix};
pub use dc::{make_dc, make_dc_dual, make_dc_primal, DcInstance, DcOrientation};
pub use fw::neg_conjugate_quadratic;
pub use io::{ObjectiveSpec, ProblemFile};
pub use lmp::{gen_lmp_random, make_lmp, LmpInstance};
