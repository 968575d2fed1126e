//! Concave quadratic programs `min -x^T M x` over a box, with
//! `M = P^T P` for a low-rank integer matrix `P`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::polyhedral::PolyCone;
use crate::qcp::{Objective, QcpProblem};
use crate::rng::Rng;
use crate::scalarize::VlpProblem;

/// `P_ij = floor(q * sin((j-1) q + i))` with 1-based indices.
pub fn sin_floor_matrix(q: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(q, n, |i0, j0| {
        let (i, j) = (i0 as f64 + 1.0, j0 as f64 + 1.0);
        (q as f64 * ((j - 1.0) * q as f64 + i).sin()).floor()
    })
}

fn box_rows(n: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut a = DMatrix::zeros(2 * n, n);
    for j in 0..n {
        a[(j, j)] = 1.0;
        a[(n + j, j)] = -1.0;
    }
    (a, DVector::from_element(2 * n, -1.0))
}

fn cqp_from_matrix(p_mat: DMatrix<f64>) -> Result<QcpProblem> {
    let q = p_mat.nrows();
    let n = p_mat.ncols();
    if q > n {
        return Err(Error::InvalidInstance("rank parameter must satisfy q <= n".into()));
    }
    let (a, b) = box_rows(n);
    // Monotonicity only holds for the trivial cone, so the solvers route the
    // problem through the lifting. The interior-point slot is unused.
    let mut c = DVector::zeros(q);
    c[q - 1] = 1.0;
    let vlp = VlpProblem::new(p_mat, a, b, PolyCone::zero(q), c)?;
    Ok(QcpProblem::new(vlp, Objective::neg_squared_norm()))
}

/// `min -x^T (P^T P) x` over `[-e, e]` with the deterministic sin-floor `P`.
pub fn make_cqp(q: usize, n: usize) -> Result<QcpProblem> {
    Ok(cqp_from_matrix(sin_floor_matrix(q, n))?)
}

/// Seeded variant: integer entries of `P` uniform in `[-q, q]` (the same
/// range the sin-floor construction produces), box `[-e, e]`.
pub fn gen_cqp_random(q: usize, n: usize, seed: u64) -> Result<QcpProblem> {
    let mut rng = Rng::new(seed);
    let p_mat = DMatrix::from_row_iterator(
        q,
        n,
        (0..q * n).map(|_| rng.int_in(-(q as i64), q as i64) as f64),
    );
    cqp_from_matrix(p_mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::{lift_problem, project_back};
    use crate::lp::SimplexBackend;
    use crate::qcp::solve_primal_qcp;
    use crate::vlp::SolveOptions;

    #[test]
    fn sin_floor_two_by_two() {
        let p = sin_floor_matrix(2, 2);
        assert_eq!(p, nalgebra::dmatrix![1.0, 0.0; 1.0, -2.0]);
    }

    #[test]
    fn sin_floor_one_by_one() {
        assert_eq!(sin_floor_matrix(1, 1)[(0, 0)], 0.0);
    }

    #[test]
    fn sin_floor_entries_bounded() {
        let q = 4;
        let p = sin_floor_matrix(q, 30);
        assert!(p.iter().all(|v| -(q as f64) <= *v && *v <= q as f64));
    }

    #[test]
    fn zero_cone_lifts_to_orthant() {
        let p = make_cqp(2, 4).unwrap();
        assert!(!p.vlp.cone.is_solid());
        let lifted = lift_problem(&p).unwrap();
        assert_eq!(
            lifted.lifted.vlp.cone.generators.clone_owned(),
            DMatrix::identity(3, 3)
        );
    }

    #[test]
    fn small_cqp_matches_image_vertex_scan() {
        // Oracle: enumerate the lifted upper image completely and scan f.
        let p = make_cqp(2, 4).unwrap();
        let lifted = lift_problem(&p).unwrap();
        let mut backend = SimplexBackend::default();
        let opts = SolveOptions::default();
        let r = project_back(
            &lifted,
            solve_primal_qcp(&lifted.lifted, &mut backend, &opts).unwrap(),
        )
        .unwrap();
        let (outer, _) =
            crate::vlp::initial_outer_approx(&lifted.lifted.vlp, &mut backend).unwrap();
        let (pair, _) =
            crate::vlp::benson_primal(&lifted.lifted.vlp, outer, &mut backend, &opts).unwrap();
        let oracle = pair
            .primal_points
            .iter()
            .map(|v| lifted.lifted.f.eval(v))
            .fold(f64::INFINITY, f64::min);
        assert!((r.value - oracle).abs() < 1e-6 * (1.0 + oracle.abs()));
        // The maximum of the concave objective is 0 at the origin; the
        // minimum over a full-dimensional image must be strictly below it.
        assert!(r.value < -1e-6);
    }

    #[test]
    fn seeded_cqp_reproducible() {
        let a = gen_cqp_random(2, 6, 9).unwrap();
        let b = gen_cqp_random(2, 6, 9).unwrap();
        assert_eq!(a.vlp.objective_matrix, b.vlp.objective_matrix);
        assert!(a
            .vlp
            .objective_matrix
            .iter()
            .all(|v| v.abs() <= 2.0 && v.fract() == 0.0));
    }
}
