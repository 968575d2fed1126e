//! Conjugation of polyhedral functions through their epigraph
//! P-representations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpBackend, LpStatus};
use crate::polyhedral::PPolyhedron;

/// Evaluates the polyhedral function whose epigraph is the given
/// P-representation (projected space `(x, r)`, `r` the last coordinate):
/// `h(x) = min { r : (x, r) in epi }`, `+inf` when `x` is outside the domain.
pub fn eval_epigraph(epi: &PPolyhedron, x: &DVector<f64>, backend: &mut dyn LpBackend) -> Result<f64> {
    let dim = epi.dim();
    if x.len() + 1 != dim {
        return Err(Error::Dimension(format!(
            "epigraph lives in dim {dim}, argument has dim {}",
            x.len()
        )));
    }
    let k = x.len();
    let m = epi.a.nrows();
    let aux = epi.aux_dim();
    // Variables (r, u): rows  p r + B u >= b - A_x x.
    let mut a = DMatrix::zeros(m, 1 + aux);
    for i in 0..m {
        a[(i, 0)] = epi.a[(i, k)];
        for j in 0..aux {
            a[(i, 1 + j)] = epi.b_mat[(i, j)];
        }
    }
    let mut rhs = epi.b.clone();
    for i in 0..m {
        for j in 0..k {
            rhs[i] -= epi.a[(i, j)] * x[j];
        }
    }
    let mut objective = DVector::zeros(1 + aux);
    objective[0] = 1.0;
    let lp = LinearProgram::with_ge_rows(objective, a, rhs)?;
    let sol = backend.solve(&lp);
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective_value),
        LpStatus::Infeasible => Ok(f64::INFINITY),
        LpStatus::Unbounded => Ok(f64::NEG_INFINITY),
        LpStatus::NumericalBreakdown => Err(Error::LpFailure("epigraph evaluation broke down".into())),
    }
}

/// Conjugate of a proper polyhedral function from the P-representation of
/// its epigraph.
///
/// With `epi h = { (x, r) : exists u, A x + p r + B u >= b }`, LP duality on
/// `sup_x { y^T x - h(x) }` gives
///
/// ```text
///   epi h* = { (y, r*) : exists lambda >= 0,
///              A^T lambda = -y,  B^T lambda = 0,  p^T lambda = 1,
///              -b^T lambda <= r* }
/// ```
///
/// which is again a P-representation with the multipliers as auxiliaries.
pub fn polyhedral_conjugate(epi: &PPolyhedron) -> Result<PPolyhedron> {
    let dim = epi.dim();
    if dim < 2 {
        return Err(Error::InvalidInstance(
            "epigraph must have at least one argument coordinate".into(),
        ));
    }
    let k = dim - 1;
    let m = epi.a.nrows();
    let aux = epi.aux_dim();
    let a_x = epi.a.view((0, 0), (m, k)).clone_owned(); // m x k
    let p_col = epi.a.view((0, k), (m, 1)).clone_owned(); // m x 1
    let b_aux = &epi.b_mat; // m x aux
    let rhs = &epi.b;

    // Projected variables (y, r*); auxiliaries lambda in R^m.
    // Row blocks: +-(y + A^T lambda) >= 0, +-(B^T lambda) >= 0,
    // +-(p^T lambda) >= +-1, r* + b^T lambda >= 0, lambda >= 0.
    let rows = 2 * k + 2 * aux + 2 + 1 + m;
    let mut a_new = DMatrix::zeros(rows, k + 1);
    let mut b_mat_new = DMatrix::zeros(rows, m);
    let mut b_new = DVector::zeros(rows);
    let mut r = 0;
    for sign in [1.0, -1.0] {
        for i in 0..k {
            a_new[(r, i)] = sign;
            for l in 0..m {
                b_mat_new[(r, l)] = sign * a_x[(l, i)];
            }
            r += 1;
        }
    }
    for sign in [1.0, -1.0] {
        for j in 0..aux {
            for l in 0..m {
                b_mat_new[(r, l)] = sign * b_aux[(l, j)];
            }
            r += 1;
        }
    }
    for sign in [1.0, -1.0] {
        for l in 0..m {
            b_mat_new[(r, l)] = sign * p_col[(l, 0)];
        }
        b_new[r] = sign;
        r += 1;
    }
    a_new[(r, k)] = 1.0;
    for l in 0..m {
        b_mat_new[(r, l)] = rhs[l];
    }
    r += 1;
    for l in 0..m {
        b_mat_new[(r, l)] = 1.0;
        r += 1;
    }
    debug_assert_eq!(r, rows);
    PPolyhedron::new(a_new, b_mat_new, b_new)
}
