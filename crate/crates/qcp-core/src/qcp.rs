//! Quasi-concave minimization over linear constraints.
//!
//! Both solvers exploit that the optimum of `min f(Px)` over `Ax >= b` is
//! attained at a vertex of the upper image `P[S] + C` whenever `f` is
//! quasi-concave and `C`-monotone and the image is `C`-bounded. Instead of
//! enumerating the whole image, each iteration selects the vertex of the
//! current outer approximation with the smallest objective value:
//!
//! * [`solve_primal_qcp`] refines the primal outer approximation and stops
//!   at the first vertex confirmed to lie in the image;
//! * [`solve_dual_qcp`] refines outer approximations of both images at once
//!   and stops when the selected vertex satisfies the coupling optimality
//!   condition against every known lower-image vertex.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpBackend, LpStatus, RowSense};
use crate::polyhedral::lex_cmp;
use crate::scalarize::{coupling_phi, omega, solve_p1_d1, solve_p2_d2, VlpProblem};
use crate::vlp::{initial_outer_approx, ApproxSnapshot, SolveOptions};

/// Extended-real objective handle: `-inf` marks points outside the domain,
/// NaN is rejected, `+inf` at a selected vertex aborts the solve.
#[derive(Clone)]
pub struct Objective {
    eval: Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>,
    description: String,
}

impl std::fmt::Debug for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Objective({})", self.description)
    }
}

impl Objective {
    pub fn new<F>(description: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    {
        Objective {
            eval: Arc::new(eval),
            description: description.into(),
        }
    }

    pub fn eval(&self, y: &DVector<f64>) -> f64 {
        (self.eval)(y)
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `prod_i y_i` on the nonnegative orthant, `-inf` outside.
    pub fn product_positive() -> Self {
        Objective::new("product over nonnegative orthant", |y: &DVector<f64>| {
            if y.iter().any(|v| *v < 0.0) {
                f64::NEG_INFINITY
            } else {
                y.iter().product()
            }
        })
    }

    /// `-y^T y`.
    pub fn neg_squared_norm() -> Self {
        Objective::new("negated squared norm", |y: &DVector<f64>| -y.dot(y))
    }

    pub fn constant(value: f64) -> Self {
        Objective::new(format!("constant {value}"), move |_: &DVector<f64>| value)
    }

    /// Same objective evaluated at `-y` (sign-flip reformulation).
    pub fn flipped(&self) -> Self {
        let inner = self.eval.clone();
        Objective {
            eval: Arc::new(move |y: &DVector<f64>| inner(&(-y))),
            description: format!("flipped({})", self.description),
        }
    }
}

/// A vector linear program together with the quasi-concave objective on its
/// image space. `sign_flipped` records that the data was negated to obtain
/// an interior point with positive last coordinate; reported image points
/// are mapped back.
#[derive(Clone, Debug)]
pub struct QcpProblem {
    pub vlp: VlpProblem,
    pub f: Objective,
    pub sign_flipped: bool,
}

impl QcpProblem {
    pub fn new(vlp: VlpProblem, f: Objective) -> Self {
        QcpProblem {
            vlp,
            f,
            sign_flipped: false,
        }
    }

    /// Builds the problem choosing the cone interior point automatically,
    /// applying the sign-flip reformulation when the interior point can only
    /// be normalized to last coordinate -1.
    pub fn with_auto_interior_point(
        objective_matrix: DMatrix<f64>,
        constraints: DMatrix<f64>,
        rhs: DVector<f64>,
        cone: crate::polyhedral::PolyCone,
        f: Objective,
    ) -> Result<Self> {
        let c = crate::polyhedral::cone_interior_point(&cone)?;
        let q = c.len();
        if c[q - 1] > 0.0 {
            let vlp = VlpProblem::new(objective_matrix, constraints, rhs, cone, c)?;
            Ok(QcpProblem::new(vlp, f))
        } else {
            let vlp = VlpProblem::new(-objective_matrix, constraints, rhs, cone.negated(), -c)?;
            Ok(QcpProblem {
                vlp,
                f: f.flipped(),
                sign_flipped: true,
            })
        }
    }
}

/// Lower-image vertex selection rule of the dual solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualSelectionRule {
    /// Strongest violation of the coupling optimality condition.
    MinPhi,
    /// First vertex (insertion order) violating the condition; reproduces
    /// the earlier multiplicative-programming variant of the algorithm.
    FirstViolating,
}

/// One row of the solver iteration log.
#[derive(Clone, Debug)]
pub struct QcpIterRecord {
    pub index: usize,
    pub t: Vec<f64>,
    pub f_t: f64,
    /// Dual solver only: the reference vertex processed this iteration.
    pub t_star: Option<Vec<f64>>,
    /// Dual solver: `min phi(t, .)` over the known lower-image vertices.
    pub phi: Option<f64>,
    /// Primal solver: the translative value `z`. Dual solver: the sign-test
    /// value deciding the lower-image cut.
    pub measure: f64,
    /// Dual solver: the primal cut failed to remove the previous vertex.
    pub cut_failed: Option<bool>,
}

impl QcpIterRecord {
    pub fn csv_header() -> &'static str {
        "iteration,t,f_t,t_star,phi,measure,cut_failed"
    }

    pub fn to_csv_row(&self) -> String {
        let fmt = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(";")
        };
        format!(
            "{},{},{},{},{},{},{}",
            self.index,
            fmt(&self.t),
            self.f_t,
            self.t_star.as_deref().map(fmt).unwrap_or_default(),
            self.phi.map(|p| p.to_string()).unwrap_or_default(),
            self.measure,
            self.cut_failed.map(|b| b.to_string()).unwrap_or_default(),
        )
    }
}

#[derive(Clone, Debug)]
pub struct QcpResult {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub value: f64,
    pub iterations: usize,
    pub lp_solves: usize,
    pub failed_cuts: usize,
    pub history: Vec<QcpIterRecord>,
    pub snapshots: Vec<ApproxSnapshot>,
}

/// Minimizer of `f` over a vertex set under the extended-real order with
/// `-inf` smallest; exact-value ties break lexicographically.
pub fn vertex_argmin_f(f: &Objective, vertices: &[DVector<f64>]) -> Result<(DVector<f64>, f64)> {
    let mut best: Option<(&DVector<f64>, f64)> = None;
    for v in vertices {
        let val = f.eval(v);
        if val.is_nan() {
            return Err(Error::ObjectiveImproper(format!(
                "objective returned NaN at {:?}",
                v.iter().collect::<Vec<_>>()
            )));
        }
        best = Some(match best {
            None => (v, val),
            Some((bv, bval)) => {
                if val < bval || (val == bval && lex_cmp(v, bv) == std::cmp::Ordering::Less) {
                    (v, val)
                } else {
                    (bv, bval)
                }
            }
        });
    }
    let (v, val) = best.ok_or(Error::EmptyPolyhedron)?;
    Ok((v.clone(), val))
}

fn reject_improper(val: f64, where_: &str) -> Result<()> {
    if val == f64::INFINITY {
        return Err(Error::ObjectiveImproper(format!(
            "objective is +inf at the selected vertex during {where_}; \
             it must be proper on the outer approximations"
        )));
    }
    Ok(())
}

fn finish(
    p: &QcpProblem,
    x: DVector<f64>,
    iterations: usize,
    lp_solves: usize,
    failed_cuts: usize,
    history: Vec<QcpIterRecord>,
    snapshots: Vec<ApproxSnapshot>,
) -> Result<QcpResult> {
    let y_internal = p.vlp.image(&x);
    let value = p.f.eval(&y_internal);
    if value.is_nan() {
        return Err(Error::ObjectiveImproper("objective NaN at the solution".into()));
    }
    let y = if p.sign_flipped { -y_internal } else { y_internal };
    Ok(QcpResult {
        x,
        y,
        value,
        iterations,
        lp_solves,
        failed_cuts,
        history,
        snapshots,
    })
}

/// Modified primal run: each iteration processes the outer-approximation
/// vertex minimizing `f` and stops as soon as one such vertex is confirmed
/// to lie in the upper image, returning its preimage.
pub fn solve_primal_qcp(
    p: &QcpProblem,
    backend: &mut dyn LpBackend,
    opts: &SolveOptions,
) -> Result<QcpResult> {
    let vlp = &p.vlp;
    if !vlp.cone.is_solid() {
        return Err(Error::NonSolidCone);
    }
    let (mut outer, mut lp_solves) = initial_outer_approx(vlp, backend)?;
    let mut history: Vec<QcpIterRecord> = Vec::new();
    let mut snapshots = Vec::new();
    let mut iterations = 0;
    loop {
        if iterations >= opts.max_iterations {
            return Err(Error::IterationLimit(opts.max_iterations));
        }
        iterations += 1;
        // The min-vertex value is a lower bound on the optimum; for globally
        // cone-monotone objectives it is nondecreasing across iterations
        // (the history carries it so tests can check that trend).
        let (t, f_t) = vertex_argmin_f(&p.f, &outer.vertices)?;
        reject_improper(f_t, "the primal run")?;
        let sol = solve_p2_d2(vlp, &t, backend)?;
        lp_solves += 1;
        history.push(QcpIterRecord {
            index: iterations,
            t: t.iter().copied().collect(),
            f_t,
            t_star: None,
            phi: None,
            measure: sol.z,
            cut_failed: None,
        });
        if sol.z > opts.tolerance {
            let eff = outer.add_halfspace(&sol.w, sol.support_offset(&vlp.rhs))?;
            if !eff.removed_vertices.iter().any(|rv| (rv - &t).amax() <= 1e-7) {
                // The supporting cut failed to separate the selected vertex:
                // it lies on the image boundary at the resolution the
                // enumeration can distinguish, which is the z = 0 situation.
                return finish(p, sol.x, iterations, lp_solves, 0, history, snapshots);
            }
            if opts.record_approx {
                snapshots.push(ApproxSnapshot {
                    iteration: iterations,
                    side: "primal",
                    vertices: outer
                        .vertices
                        .iter()
                        .map(|v| v.iter().copied().collect())
                        .collect(),
                });
            }
        } else {
            // z = 0: the image of x equals the selected vertex and solves
            // the problem.
            return finish(p, sol.x, iterations, lp_solves, 0, history, snapshots);
        }
    }
}

/// Modified dual run: refines the lower image while mirroring every
/// weighted-sum cut onto the primal outer approximation, stopping when the
/// best primal vertex couples nonnegatively with every lower-image vertex.
/// Iterations whose primal cut does not remove the currently selected vertex
/// are counted as failed cuts.
pub fn solve_dual_qcp(
    p: &QcpProblem,
    rule: DualSelectionRule,
    backend: &mut dyn LpBackend,
    opts: &SolveOptions,
) -> Result<QcpResult> {
    let vlp = &p.vlp;
    let q = vlp.image_dim();
    if !vlp.cone.is_solid() {
        return Err(Error::NonSolidCone);
    }
    let (mut outer, mut lp_solves) = initial_outer_approx(vlp, backend)?;
    let mut dual = crate::vlp::DualState::new(vlp)?;

    let mut w_sum = DVector::zeros(q);
    for i in 0..vlp.cone.normals.ncols() {
        w_sum += vlp.cone.normals.column(i);
    }
    let cw = vlp.c.dot(&w_sum);
    if cw.abs() < 1e-12 {
        return Err(Error::AssumptionViolated(
            "degenerate cone: c orthogonal to the sum of inequality normals".into(),
        ));
    }
    let mut t_star = w_sum / cw;
    t_star[q - 1] = f64::INFINITY;

    let mut history: Vec<QcpIterRecord> = Vec::new();
    let mut snapshots = Vec::new();
    let mut iterations = 0;
    let mut failed_cuts = 0;
    let mut prev_t: Option<DVector<f64>> = None;

    loop {
        if iterations >= opts.max_iterations {
            return Err(Error::IterationLimit(opts.max_iterations));
        }
        iterations += 1;
        let w = omega(&t_star, &vlp.c);
        let sol = solve_p1_d1(vlp, &w, backend)?;
        lp_solves += 1;
        let image_point = vlp.image(&sol.x);
        let sign_value = t_star[q - 1] - sol.value;
        if sign_value > opts.tolerance {
            let removed = dual.cut(&image_point, &vlp.c)?;
            // Stall guard: a reference vertex surviving its own cut belongs
            // to the lower image at the achievable resolution.
            if t_star[q - 1].is_finite()
                && !removed.iter().any(|rv| (rv - &t_star).amax() <= 1e-7)
            {
                dual.approx_mut().mark_processed(&t_star);
            }
        } else {
            dual.approx_mut().mark_processed(&t_star);
        }

        // Mirror the supporting half-space onto the primal approximation.
        let eff = outer.add_halfspace(&w, sol.value)?;
        let cut_failed = prev_t.as_ref().map(|tp| {
            !eff.removed_vertices
                .iter()
                .any(|rv| (rv - tp).amax() <= 1e-7)
        });
        if cut_failed == Some(true) {
            failed_cuts += 1;
        }
        if opts.record_approx {
            snapshots.push(ApproxSnapshot {
                iteration: iterations,
                side: "primal",
                vertices: outer
                    .vertices
                    .iter()
                    .map(|v| v.iter().copied().collect())
                    .collect(),
            });
            snapshots.push(ApproxSnapshot {
                iteration: iterations,
                side: "dual",
                vertices: dual
                    .approx_ref()
                    .vertices
                    .iter()
                    .map(|v| v.iter().copied().collect())
                    .collect(),
            });
        }

        let (t, f_t) = vertex_argmin_f(&p.f, &outer.vertices)?;
        reject_improper(f_t, "the dual run")?;
        let min_phi = dual
            .approx_ref()
            .vertices
            .iter()
            .map(|u| coupling_phi(&t, u, &vlp.c))
            .fold(f64::INFINITY, f64::min);
        history.push(QcpIterRecord {
            index: iterations,
            t: t.iter().copied().collect(),
            f_t,
            t_star: Some(t_star.iter().copied().collect()),
            phi: Some(min_phi),
            measure: sign_value,
            cut_failed,
        });

        if min_phi >= -1e-9 {
            let x = recover_preimage(vlp, &t, backend)?;
            lp_solves += 1;
            return finish(p, x, iterations, lp_solves, failed_cuts, history, snapshots);
        }

        // Select the next lower-image vertex among the unconfirmed ones.
        // When none remain the lower image is fully confirmed, so the
        // currently selected vertex is optimal at the achievable resolution.
        let approx = dual.approx_ref();
        let candidates = approx.unprocessed();
        if candidates.is_empty() {
            let x = recover_preimage(vlp, &t, backend)?;
            lp_solves += 1;
            return finish(p, x, iterations, lp_solves, failed_cuts, history, snapshots);
        }
        t_star = match rule {
            DualSelectionRule::MinPhi => {
                let mut best = candidates[0];
                let mut best_phi = coupling_phi(&t, best, &vlp.c);
                for cand in &candidates[1..] {
                    let phi = coupling_phi(&t, cand, &vlp.c);
                    if phi < best_phi
                        || (phi == best_phi && lex_cmp(cand, best) == std::cmp::Ordering::Less)
                    {
                        best = cand;
                        best_phi = phi;
                    }
                }
                best.clone()
            }
            DualSelectionRule::FirstViolating => candidates
                .iter()
                .find(|cand| coupling_phi(&t, cand, &vlp.c) < -1e-9)
                .copied()
                .unwrap_or(candidates[0])
                .clone(),
        };
        prev_t = Some(t);
    }
}

/// Finds `x` feasible with `Px = t`; used to recover the decision vector for
/// a vertex of the upper image.
pub fn recover_preimage(
    vlp: &VlpProblem,
    t: &DVector<f64>,
    backend: &mut dyn LpBackend,
) -> Result<DVector<f64>> {
    let q = vlp.image_dim();
    let n = vlp.num_vars();
    let m = vlp.constraints.nrows();
    let mut a = DMatrix::zeros(m + q, n);
    a.view_mut((0, 0), (m, n)).copy_from(&vlp.constraints);
    a.view_mut((m, 0), (q, n)).copy_from(&vlp.objective_matrix);
    let mut b = DVector::zeros(m + q);
    b.rows_mut(0, m).copy_from(&vlp.rhs);
    b.rows_mut(m, q).copy_from(t);
    let mut senses = vec![RowSense::Ge; m];
    senses.extend(std::iter::repeat(RowSense::Eq).take(q));
    let lp = LinearProgram::new(
        DVector::zeros(n),
        a,
        b,
        senses,
        DVector::from_element(n, f64::NEG_INFINITY),
        DVector::from_element(n, f64::INFINITY),
    )?;
    let sol = backend.solve(&lp);
    match sol.status {
        LpStatus::Optimal => {
            let residual = (vlp.image(&sol.x) - t).amax();
            if residual > 1e-6 * (1.0 + t.amax()) {
                return Err(Error::LpFailure(format!(
                    "preimage misses the target by {residual:.3e}"
                )));
            }
            Ok(sol.x)
        }
        LpStatus::Infeasible => Err(Error::PreimageInfeasible),
        other => Err(Error::LpFailure(format!("preimage solve ended {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::SimplexBackend;
    use crate::polyhedral::PolyCone;
    use nalgebra::dvector;

    fn tiny_problem(f: Objective) -> QcpProblem {
        let vlp = VlpProblem::new(
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            dvector![0.0, 0.0],
            PolyCone::nonneg_orthant(2),
            dvector![1.0, 1.0],
        )
        .unwrap();
        QcpProblem::new(vlp, f)
    }

    #[test]
    fn argmin_picks_smaller_product() {
        let f = Objective::product_positive();
        let vs = [dvector![1.0, 1.0], dvector![2.0, 0.1]];
        let (v, val) = vertex_argmin_f(&f, &vs).unwrap();
        assert_eq!(v, dvector![2.0, 0.1]);
        assert!((val - 0.2).abs() < 1e-12);
    }

    #[test]
    fn argmin_prefers_neg_infinity() {
        let f = Objective::product_positive();
        let vs = [dvector![1.0, 1.0], dvector![-0.5, 3.0]];
        let (v, val) = vertex_argmin_f(&f, &vs).unwrap();
        assert_eq!(v, dvector![-0.5, 3.0]);
        assert_eq!(val, f64::NEG_INFINITY);
    }

    #[test]
    fn argmin_breaks_ties_lexicographically() {
        let f = Objective::constant(4.0);
        let vs = [dvector![2.0, 0.0], dvector![1.0, 5.0], dvector![1.0, 3.0]];
        let (v, _) = vertex_argmin_f(&f, &vs).unwrap();
        assert_eq!(v, dvector![1.0, 3.0]);
    }

    #[test]
    fn primal_on_tiny_instance_stops_at_origin() {
        // f(y) = y1 + y2 is linear (hence quasi-concave) and orthant-monotone;
        // the minimum over R^2_+ is the origin.
        let p = tiny_problem(Objective::new("sum", |y: &DVector<f64>| y.sum()));
        let mut backend = SimplexBackend::default();
        let r = solve_primal_qcp(&p, &mut backend, &SolveOptions::default()).unwrap();
        assert!(r.y.amax() < 1e-9);
        assert!(r.value.abs() < 1e-9);
        assert_eq!(r.iterations, 1); // single vertex, confirmed immediately
    }

    #[test]
    fn constant_objective_terminates_on_first_confirmation() {
        let p = tiny_problem(Objective::constant(3.5));
        let mut backend = SimplexBackend::default();
        let r = solve_primal_qcp(&p, &mut backend, &SolveOptions::default()).unwrap();
        assert_eq!(r.value, 3.5);
        assert_eq!(r.iterations, 1);
        let rd = solve_dual_qcp(
            &p,
            DualSelectionRule::MinPhi,
            &mut backend,
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(rd.value, 3.5);
        assert_eq!(rd.failed_cuts, 0);
    }

    #[test]
    fn dual_matches_primal_on_tiny_instance() {
        let p = tiny_problem(Objective::new("sum", |y: &DVector<f64>| y.sum()));
        let mut backend = SimplexBackend::default();
        let r = solve_dual_qcp(
            &p,
            DualSelectionRule::MinPhi,
            &mut backend,
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(r.y.amax() < 1e-9);
        assert!(r.value.abs() < 1e-9);
    }

    #[test]
    fn preimage_roundtrip_and_outside_failure() {
        let p = tiny_problem(Objective::constant(0.0));
        let mut backend = SimplexBackend::default();
        let x0 = dvector![0.5, 2.0];
        let t = p.vlp.image(&x0);
        let x = recover_preimage(&p.vlp, &t, &mut backend).unwrap();
        assert!((p.vlp.image(&x) - &t).amax() < 1e-8);
        // Outside the image plus cone: no preimage.
        let err = recover_preimage(&p.vlp, &dvector![-1.0, -1.0], &mut backend).unwrap_err();
        assert_eq!(err, Error::PreimageInfeasible);
    }

    #[test]
    fn improper_objective_rejected() {
        let p = tiny_problem(Objective::constant(f64::INFINITY));
        let mut backend = SimplexBackend::default();
        let err = solve_primal_qcp(&p, &mut backend, &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::ObjectiveImproper(_)));
    }

    #[test]
    fn sign_flip_reformulation_round_trips() {
        // Cone -R^2_+ only admits interior points with negative last
        // coordinate, forcing the flip. f(y) = -(y1+y2) is monotone for it
        // on the image of S = {x <= 0} under P = I.
        let cone = PolyCone::from_generators(nalgebra::dmatrix![-1.0, 0.0; 0.0, -1.0]).unwrap();
        let p = QcpProblem::with_auto_interior_point(
            DMatrix::identity(2, 2),
            -DMatrix::identity(2, 2),
            dvector![0.0, 0.0],
            cone,
            Objective::new("negated sum", |y: &DVector<f64>| -y.sum()),
        )
        .unwrap();
        assert!(p.sign_flipped);
        let mut backend = SimplexBackend::default();
        let r = solve_primal_qcp(&p, &mut backend, &SolveOptions::default()).unwrap();
        // Original problem: min -(y1+y2) over y <= 0 has optimum 0 at 0.
        assert!(r.value.abs() < 1e-9);
        assert!(r.y.amax() < 1e-9);
    }
}
