//! One-dimension lifting for non-solid monotonicity cones.
//!
//! When the ordering cone `C` has empty interior (including `C = {0}`), the
//! solvers cannot run directly. The problem is reformulated one dimension
//! higher: the image map becomes `x -> (Px, -e^T Px)`, the ordering cone
//! becomes the solid pointed cone
//!
//! ```text
//!     R = cone( columns of I_{q+1}  and  (g, -e^T g) for generators g of C )
//! ```
//!
//! and the objective is extended by `fbar(y, eta) = f(y)` when
//! `e^T y + eta >= 0`, `-inf` otherwise. The original upper image is the
//! projection of the lifted one intersected with the hyperplane
//! `{ e^T y = 0 }`, so optimal values and decision vectors carry over.
//!
//! Replacing the cone by the plain orthant `R^{q+1}_+` instead of `R` leaves
//! every feasible problem with `C != {0}` unbounded, which the solvers
//! report as a violated boundedness assumption.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::polyhedral::PolyCone;
use crate::qcp::{Objective, QcpProblem, QcpResult};
use crate::scalarize::VlpProblem;

/// Membership slack for the lifted indicator `e^T y + eta >= 0`, so that
/// vertices on the projection hyperplane are admitted.
const INDICATOR_TOL: f64 = 1e-7;

/// A problem together with its lifted reformulation.
#[derive(Clone, Debug)]
pub struct LiftedProblem {
    pub base: QcpProblem,
    pub lifted: QcpProblem,
}

/// Generators of the lifted cone: the identity columns and `(g, -e^T g)` for
/// every generator `g` of the base cone.
fn lifted_generators(cone: &PolyCone) -> DMatrix<f64> {
    let q = cone.dim();
    let o = cone.generators.ncols();
    let mut gens = DMatrix::zeros(q + 1, q + 1 + o);
    for i in 0..q + 1 {
        gens[(i, i)] = 1.0;
    }
    for j in 0..o {
        let g = cone.generators.column(j);
        let mut s = 0.0;
        for i in 0..q {
            gens[(i, q + 1 + j)] = g[i];
            s += g[i];
        }
        gens[(q, q + 1 + j)] = -s;
    }
    gens
}

/// Lifts a problem with a pointed (possibly non-solid) cone into dimension
/// `q + 1` where the cone is solid and pointed, and monotonicity and
/// boundedness carry over from the base problem.
pub fn lift_problem(p: &QcpProblem) -> Result<LiftedProblem> {
    let base_vlp = &p.vlp;
    let q = base_vlp.image_dim();
    let n = base_vlp.num_vars();
    if !base_vlp.cone.is_pointed() {
        return Err(Error::ConeNotPointed);
    }

    let cone = PolyCone::from_generators(lifted_generators(&base_vlp.cone))?;
    if !cone.is_pointed() {
        return Err(Error::ConeNotPointed);
    }
    if !cone.is_solid() {
        return Err(Error::NonSolidCone);
    }

    // Interior point: mean of the generators, pushed along e_{q+1} (always a
    // generator) when its last coordinate is not positive, then scaled to
    // last coordinate 1.
    let mut c = DVector::zeros(q + 1);
    for j in 0..cone.generators.ncols() {
        c += cone.generators.column(j);
    }
    c /= cone.generators.ncols() as f64;
    if c[q] <= 1e-9 {
        let boost = c[q].abs() + 0.5 * (1.0 + c.amax());
        c[q] += boost;
    }
    c /= c[q];

    // Lifted objective matrix (P; -e^T P).
    let mut pbar = DMatrix::zeros(q + 1, n);
    pbar.view_mut((0, 0), (q, n))
        .copy_from(&base_vlp.objective_matrix);
    for j in 0..n {
        let mut s = 0.0;
        for i in 0..q {
            s += base_vlp.objective_matrix[(i, j)];
        }
        pbar[(q, j)] = -s;
    }

    let base_f = p.f.clone();
    let fbar = Objective::new(format!("lifted({})", p.f.description()), move |yb: &DVector<f64>| {
        // e^T y + eta is the sum of all coordinates of the lifted point.
        if yb.sum() >= -INDICATOR_TOL {
            let q = yb.len() - 1;
            base_f.eval(&yb.rows(0, q).into_owned())
        } else {
            f64::NEG_INFINITY
        }
    });

    let lifted_vlp = VlpProblem::new(
        pbar,
        base_vlp.constraints.clone(),
        base_vlp.rhs.clone(),
        cone,
        c,
    )?;
    Ok(LiftedProblem {
        base: p.clone(),
        lifted: QcpProblem {
            vlp: lifted_vlp,
            f: fbar,
            sign_flipped: p.sign_flipped,
        },
    })
}

/// Maps a lifted result back: decision vector and value are unchanged, the
/// image point drops its last coordinate after verifying that the solution
/// lies on the projection hyperplane.
pub fn project_back(lifted: &LiftedProblem, result: QcpResult) -> Result<QcpResult> {
    let q = lifted.base.vlp.image_dim();
    if result.y.len() != q + 1 {
        return Err(Error::Dimension(format!(
            "lifted image has dim {}, expected {}",
            result.y.len(),
            q + 1
        )));
    }
    let residual = result.y.sum().abs();
    if residual > 1e-6 * (1.0 + result.y.amax()) {
        return Err(Error::ProjectionResidual(residual));
    }
    Ok(QcpResult {
        y: result.y.rows(0, q).into_owned(),
        ..result
    })
}

/// Solves with the primal algorithm (`rule = None`) or the dual algorithm
/// under the given selection rule, lifting first when the monotonicity cone
/// is non-solid and projecting the result back.
pub fn solve_auto(
    p: &QcpProblem,
    rule: Option<crate::qcp::DualSelectionRule>,
    backend: &mut dyn crate::lp::LpBackend,
    opts: &crate::vlp::SolveOptions,
) -> Result<QcpResult> {
    use crate::qcp::{solve_dual_qcp, solve_primal_qcp};
    if p.vlp.cone.is_solid() {
        match rule {
            None => solve_primal_qcp(p, backend, opts),
            Some(r) => solve_dual_qcp(p, r, backend, opts),
        }
    } else {
        let lifted = lift_problem(p)?;
        let result = match rule {
            None => solve_primal_qcp(&lifted.lifted, backend, opts)?,
            Some(r) => solve_dual_qcp(&lifted.lifted, r, backend, opts)?,
        };
        project_back(&lifted, result)
    }
}

/// Naive one-dimension lifting that keeps the plain orthant as ordering
/// cone: variables `(x, y)` with `y` forced above `Px` in the `C`-order and
/// image `(y, -e^T y)`. Feasible instances with `C != {0}` are unbounded in
/// this formulation; it exists to demonstrate why the enlarged cone is
/// required.
pub fn naive_lifted_vlp(base: &VlpProblem) -> Result<VlpProblem> {
    let q = base.image_dim();
    let n = base.num_vars();
    let m = base.constraints.nrows();
    let p_cols = base.cone.normals.ncols();
    // Rows: [A 0] (x part) and [-Z^T P  Z^T] >= 0.
    let mut a = DMatrix::zeros(m + p_cols, n + q);
    a.view_mut((0, 0), (m, n)).copy_from(&base.constraints);
    let ztp = base.cone.normals.transpose() * &base.objective_matrix;
    for i in 0..p_cols {
        for j in 0..n {
            a[(m + i, j)] = -ztp[(i, j)];
        }
        for j in 0..q {
            a[(m + i, n + j)] = base.cone.normals[(j, i)];
        }
    }
    let mut b = DVector::zeros(m + p_cols);
    b.rows_mut(0, m).copy_from(&base.rhs);
    // Image map (y, -e^T y) over the (x, y) variables.
    let mut pbar = DMatrix::zeros(q + 1, n + q);
    for j in 0..q {
        pbar[(j, n + j)] = 1.0;
        pbar[(q, n + j)] = -1.0;
    }
    VlpProblem::new(
        pbar,
        a,
        b,
        PolyCone::nonneg_orthant(q + 1),
        DVector::from_element(q + 1, 1.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::SimplexBackend;
    use crate::qcp::{solve_dual_qcp, solve_primal_qcp, DualSelectionRule};
    use crate::vlp::{initial_outer_approx, SolveOptions};
    use nalgebra::{dmatrix, dvector};

    /// `min y1 - y2^2` over the band `-e <= x, x1 <= 1, x3 <= 1` with
    /// `y = Px`; the largest usable monotonicity cone is the non-solid ray
    /// through `(1, 0)`. Optimal value -5 at `x = (1,-1,1)` or `(-1,-1,-1)`.
    fn nonsolid_demo() -> QcpProblem {
        let p = dmatrix![1.0, 1.0, -1.0; 1.0, 0.0, 1.0];
        let a = dmatrix![
            1.0, 0.0, 0.0;
            0.0, 1.0, 0.0;
            0.0, 0.0, 1.0;
            -1.0, 0.0, 0.0;
            0.0, 0.0, -1.0
        ];
        let b = dvector![-1.0, -1.0, -1.0, -1.0, -1.0];
        let cone = PolyCone::from_generators(DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let f = Objective::new("y1 - y2^2", |y: &DVector<f64>| y[0] - y[1] * y[1]);
        // c is irrelevant for a non-solid cone; the constructor would reject
        // any candidate, so assemble the problem directly.
        QcpProblem {
            vlp: VlpProblem::new(p, a, b, cone, dvector![0.0, 1.0]).unwrap(),
            f,
            sign_flipped: false,
        }
    }

    #[test]
    fn zero_cone_lifts_to_orthant() {
        let gens = lifted_generators(&PolyCone::zero(2));
        assert_eq!(gens, DMatrix::identity(3, 3));
        let cone = PolyCone::from_generators(gens).unwrap();
        assert!(cone.is_solid() && cone.is_pointed());
    }

    #[test]
    fn ray_cone_lifts_with_extra_generator() {
        let ray = PolyCone::from_generators(DMatrix::from_column_slice(2, 1, &[0.0, 1.0])).unwrap();
        let gens = lifted_generators(&ray);
        assert_eq!(gens.ncols(), 4);
        assert_eq!(
            gens.column(3).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 1.0, -1.0]
        );
    }

    #[test]
    fn nonsolid_demo_solves_to_minus_five() {
        let base = nonsolid_demo();
        let lifted = lift_problem(&base).unwrap();
        assert!(lifted.lifted.vlp.cone.is_solid());
        let mut backend = SimplexBackend::default();
        let opts = SolveOptions::default();
        let r = project_back(
            &lifted,
            solve_primal_qcp(&lifted.lifted, &mut backend, &opts).unwrap(),
        )
        .unwrap();
        assert!((r.value + 5.0).abs() < 1e-6, "value {}", r.value);
        let x: Vec<f64> = r.x.iter().copied().collect();
        let near = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-6);
        assert!(
            near(&x, &[1.0, -1.0, 1.0]) || near(&x, &[-1.0, -1.0, -1.0]),
            "solution {x:?}"
        );
        // Dual run agrees.
        let rd = project_back(
            &lifted,
            solve_dual_qcp(&lifted.lifted, DualSelectionRule::MinPhi, &mut backend, &opts).unwrap(),
        )
        .unwrap();
        assert!((rd.value + 5.0).abs() < 1e-6);
    }

    #[test]
    fn naive_lifting_is_rejected_as_unbounded() {
        let base = nonsolid_demo();
        // The direction (c, -e^T c) for c in C recedes inside the naive
        // lifted image but leaves the orthant.
        let c_dir = dvector![1.0, 0.0];
        assert!(base.vlp.cone.contains(&c_dir, 0.0));
        let lifted_dir = dvector![1.0, 0.0, -1.0];
        assert!(!PolyCone::nonneg_orthant(3).contains(&lifted_dir, 1e-9));
        let naive = naive_lifted_vlp(&base.vlp).unwrap();
        let mut backend = SimplexBackend::default();
        let err = initial_outer_approx(&naive, &mut backend).unwrap_err();
        assert!(matches!(err, Error::AssumptionViolated(_)), "{err}");
    }

    #[test]
    fn projection_residual_guard() {
        let base = nonsolid_demo();
        let lifted = lift_problem(&base).unwrap();
        let bogus = QcpResult {
            x: dvector![0.0, 0.0, 0.0],
            y: dvector![1.0, 2.0, 3.0], // off the hyperplane: sum = 6
            value: 0.0,
            iterations: 0,
            lp_solves: 0,
            failed_cuts: 0,
            history: Vec::new(),
            snapshots: Vec::new(),
        };
        assert!(matches!(
            project_back(&lifted, bogus),
            Err(Error::ProjectionResidual(_))
        ));
    }

    #[test]
    fn lifted_objective_is_quasi_concave_on_samples() {
        // Super-level-set convexity spot check on midpoints of sampled pairs.
        let base = nonsolid_demo();
        let lifted = lift_problem(&base).unwrap();
        let f = &lifted.lifted.f;
        let mut rng = crate::rng::Rng::new(123);
        for _ in 0..500 {
            let a = DVector::from_fn(3, |_, _| rng.uniform_in(-3.0, 3.0));
            let b = DVector::from_fn(3, |_, _| rng.uniform_in(-3.0, 3.0));
            let mid = (&a + &b) / 2.0;
            let fm = f.eval(&mid);
            let bound = f.eval(&a).min(f.eval(&b));
            assert!(
                fm >= bound - 1e-9,
                "quasi-concavity violated at {a:?}, {b:?}"
            );
        }
    }
}

#[cfg(test)]
mod solid_lift_tests {
    use super::*;
    use crate::lp::SimplexBackend;
    use crate::qcp::solve_primal_qcp;
    use crate::vlp::SolveOptions;

    /// Lifting a problem whose cone is already solid must not change the
    /// optimal value.
    #[test]
    fn base_and_lifted_values_agree_for_solid_cones() {
        let base = crate::problems::example41();
        let lifted = lift_problem(&base).unwrap();
        let mut backend = SimplexBackend::default();
        let opts = SolveOptions::default();
        let rb = solve_primal_qcp(&base, &mut backend, &opts).unwrap();
        let rl = project_back(
            &lifted,
            solve_primal_qcp(&lifted.lifted, &mut backend, &opts).unwrap(),
        )
        .unwrap();
        assert!((rb.value - rl.value).abs() < 1e-6, "{} vs {}", rb.value, rl.value);
        assert!((rb.y - rl.y).amax() < 1e-5);
    }
}
