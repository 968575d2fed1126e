//! Self-contained linear programming backend.
//!
//! [`solve_lp`] runs a dense two-phase revised simplex returning primal and
//! dual optimal solutions. The [`LpBackend`] trait allows substituting an
//! external solver behind the same contract; the bundled simplex is the
//! reference implementation.

mod simplex;

pub use simplex::SimplexBackend;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    Ge,
    Eq,
    Le,
}

/// `min objective^T x` subject to `constraint_matrix x (sense) rhs` and
/// `lower <= x <= upper` (entries may be infinite).
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: DVector<f64>,
    pub constraint_matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub senses: Vec<RowSense>,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
}

impl LinearProgram {
    /// All variables free, all rows `>=`.
    pub fn with_ge_rows(objective: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = objective.len();
        let senses = vec![RowSense::Ge; a.nrows()];
        LinearProgram::new(
            objective,
            a,
            b,
            senses,
            DVector::from_element(n, f64::NEG_INFINITY),
            DVector::from_element(n, f64::INFINITY),
        )
    }

    pub fn new(
        objective: DVector<f64>,
        constraint_matrix: DMatrix<f64>,
        rhs: DVector<f64>,
        senses: Vec<RowSense>,
        lower: DVector<f64>,
        upper: DVector<f64>,
    ) -> Result<Self> {
        let n = objective.len();
        let m = constraint_matrix.nrows();
        if constraint_matrix.ncols() != n || rhs.len() != m || senses.len() != m {
            return Err(Error::Dimension(format!(
                "lp dims: A {}x{}, c {}, b {}, senses {}",
                m,
                constraint_matrix.ncols(),
                n,
                rhs.len(),
                senses.len()
            )));
        }
        if lower.len() != n || upper.len() != n {
            return Err(Error::Dimension("bound vectors must match variable count".into()));
        }
        let finite = |v: f64| v.is_finite();
        if objective.iter().any(|v| !finite(*v))
            || constraint_matrix.iter().any(|v| !finite(*v))
            || rhs.iter().any(|v| !finite(*v))
        {
            return Err(Error::Dimension("non-finite coefficient in lp".into()));
        }
        Ok(LinearProgram {
            objective,
            constraint_matrix,
            rhs,
            senses,
            lower,
            upper,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot below threshold, singular basis, or failed post-solve checks.
    NumericalBreakdown,
}

/// Solution bundle. When `status` is `Optimal` the backend guarantees primal
/// feasibility (1e-7), dual feasibility (1e-7), complementary slackness
/// (1e-6) and equal primal/dual objectives (1e-6), scaled by problem size.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: DVector<f64>,
    /// One multiplier per row; `>= 0` for `Ge`, `<= 0` for `Le`, free for
    /// `Eq` rows (minimization convention).
    pub duals: DVector<f64>,
    pub objective_value: f64,
}

pub trait LpBackend {
    fn solve(&mut self, lp: &LinearProgram) -> LpSolution;
    fn feasibility_tol(&self) -> f64;
}

/// Solves with a fresh bundled simplex instance.
pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    SimplexBackend::default().solve(lp)
}
