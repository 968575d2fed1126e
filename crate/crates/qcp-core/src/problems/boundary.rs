//! Minimizing a convex function over the boundary of a polytope.
//!
//! For a polytope `Q` with `0` interior, the positively homogeneous function
//! `h_c` whose epigraph is the cone generated by `Q x {c}` penalizes the
//! interior: with `c` exceeding the Lipschitz constant of `g` times the
//! radius of `Q`, minimizing `g - (h_c - c)` over `Q` has the same solutions
//! as minimizing `g` over the boundary of `Q`. The penalized problem is a
//! difference of convex functions with polyhedral concave part, handled in
//! the dual orientation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::polyhedral::PPolyhedron;
use crate::qcp::Objective;

use super::dc::{DcInstance, DcOrientation};

/// Epigraph of `h_c` (the gauge of `Q` scaled by `c`): the cone generated by
/// `Q x {c}`, as rows `A x + B u - (1/c) b r >= 0` and `r >= 0`.
pub(crate) fn gauge_epigraph(q_poly: &PPolyhedron, penalty: f64) -> PPolyhedron {
    let k = q_poly.dim();
    let m = q_poly.a.nrows();
    let aux = q_poly.aux_dim();
    let mut a = DMatrix::zeros(m + 1, k + 1);
    a.view_mut((0, 0), (m, k)).copy_from(&q_poly.a);
    for i in 0..m {
        a[(i, k)] = -q_poly.b[i] / penalty;
    }
    a[(m, k)] = 1.0;
    let mut b_mat = DMatrix::zeros(m + 1, aux);
    b_mat.view_mut((0, 0), (m, aux)).copy_from(&q_poly.b_mat);
    PPolyhedron::new(a, b_mat, DVector::zeros(m + 1)).expect("consistent rows")
}

/// Builds the penalized reformulation as a dual-orientation DC instance.
///
/// `g_conjugate` must evaluate the conjugate of the convex objective
/// (extended by `+inf` outside `Q`); for the quadratic `x^T x` this is
/// `-`[`super::neg_conjugate_quadratic`]. The guarantee requires the penalty
/// to exceed `lipschitz * radius`, where `radius` bounds the norm over `Q`.
pub fn make_boundary_problem(
    q_poly: &PPolyhedron,
    g_conjugate: Objective,
    lipschitz: f64,
    radius: f64,
    penalty: f64,
) -> Result<DcInstance> {
    if !(penalty > lipschitz * radius) {
        return Err(Error::InvalidInstance(format!(
            "penalty {penalty} must exceed lipschitz * radius = {}",
            lipschitz * radius
        )));
    }
    // h = h_c - penalty: shift the epigraph variable.
    let gauge = gauge_epigraph(q_poly, penalty);
    let k = gauge.dim() - 1;
    let m = gauge.a.nrows();
    // (x, r) in epi h  iff  (x, r + penalty) in epi h_c.
    let mut b = DVector::zeros(m);
    for i in 0..m {
        b[i] = -penalty * gauge.a[(i, k)];
    }
    let epi = PPolyhedron::new(gauge.a.clone(), gauge.b_mat.clone(), b)?;
    Ok(DcInstance {
        epi,
        nonpoly: g_conjugate,
        orientation: DcOrientation::Dual,
    })
}
