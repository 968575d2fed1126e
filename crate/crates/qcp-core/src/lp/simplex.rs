//! Dense two-phase revised simplex over bounded variables.
//!
//! Each row `a_i^T x (sense) b_i` is rewritten as `a_i^T x - s_i = 0` with the
//! sense folded into the bounds of the logical variable `s_i`. Phase 1
//! minimizes the total bound violation of the basic variables starting from
//! the all-logical basis; phase 2 runs textbook bounded-variable pricing.
//! Dantzig pricing with lowest-index tie-breaking keeps runs deterministic;
//! Bland's rule engages after `2(m+n)` consecutive degenerate pivots.

use nalgebra::{DMatrix, DVector};

use super::{LinearProgram, LpBackend, LpSolution, LpStatus, RowSense};

/// Pivots smaller than this abort the solve as a numerical breakdown.
const PIVOT_TOL: f64 = 1e-9;
/// Pricing threshold for reduced costs.
const PRICE_TOL: f64 = 1e-9;
/// Basis inverse is rebuilt from scratch at this pivot cadence.
const REFACTOR_EVERY: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable parked at zero.
    Free,
}

pub struct SimplexBackend {
    tol: f64,
}

impl Default for SimplexBackend {
    /// Reads the `QCP_LP_TOL` environment variable, falling back to the
    /// global 1e-7 feasibility tolerance.
    fn default() -> Self {
        let tol = std::env::var("QCP_LP_TOL")
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|t| *t > 0.0 && t.is_finite())
            .unwrap_or(crate::DEFAULT_TOL);
        SimplexBackend { tol }
    }
}

impl SimplexBackend {
    pub fn with_tolerance(tol: f64) -> Self {
        SimplexBackend { tol }
    }
}

impl LpBackend for SimplexBackend {
    fn solve(&mut self, lp: &LinearProgram) -> LpSolution {
        Worker::new(lp, self.tol).run()
    }

    fn feasibility_tol(&self) -> f64 {
        self.tol
    }
}

struct Worker<'a> {
    lp: &'a LinearProgram,
    n: usize,
    m: usize,
    total: usize,
    lower: DVector<f64>,
    upper: DVector<f64>,
    status: Vec<VarStatus>,
    basis: Vec<usize>,
    binv: DMatrix<f64>,
    x: DVector<f64>,
    tol: f64,
    pivots_since_refactor: usize,
    degenerate_streak: usize,
    bland: bool,
}

enum Step {
    Optimal,
    Unbounded,
    Progress,
    Breakdown,
}

impl<'a> Worker<'a> {
    fn new(lp: &'a LinearProgram, tol: f64) -> Self {
        let n = lp.num_vars();
        let m = lp.num_rows();
        let total = n + m;
        let mut lower = DVector::from_element(total, f64::NEG_INFINITY);
        let mut upper = DVector::from_element(total, f64::INFINITY);
        for j in 0..n {
            lower[j] = lp.lower[j];
            upper[j] = lp.upper[j];
        }
        for i in 0..m {
            match lp.senses[i] {
                RowSense::Ge => lower[n + i] = lp.rhs[i],
                RowSense::Le => upper[n + i] = lp.rhs[i],
                RowSense::Eq => {
                    lower[n + i] = lp.rhs[i];
                    upper[n + i] = lp.rhs[i];
                }
            }
        }
        let mut status = vec![VarStatus::Basic; total];
        let mut x = DVector::zeros(total);
        for j in 0..n {
            status[j] = if lower[j].is_finite() && (!upper[j].is_finite() || lower[j].abs() <= upper[j].abs()) {
                x[j] = lower[j];
                VarStatus::AtLower
            } else if upper[j].is_finite() {
                x[j] = upper[j];
                VarStatus::AtUpper
            } else {
                x[j] = 0.0;
                VarStatus::Free
            };
        }
        let basis: Vec<usize> = (n..total).collect();
        let binv = -DMatrix::<f64>::identity(m, m);
        let mut w = Worker {
            lp,
            n,
            m,
            total,
            lower,
            upper,
            status,
            basis,
            binv,
            x,
            tol,
            pivots_since_refactor: 0,
            degenerate_streak: 0,
            bland: false,
        };
        w.recompute_basics();
        w
    }

    /// Column j of W = [A | -I].
    fn col_dot(&self, j: usize, v: &DVector<f64>) -> f64 {
        if j < self.n {
            let mut acc = 0.0;
            for i in 0..self.m {
                acc += self.lp.constraint_matrix[(i, j)] * v[i];
            }
            acc
        } else {
            -v[j - self.n]
        }
    }

    fn ftran(&self, j: usize) -> DVector<f64> {
        if j < self.n {
            &self.binv * self.lp.constraint_matrix.column(j)
        } else {
            -self.binv.column(j - self.n).into_owned()
        }
    }

    fn recompute_basics(&mut self) {
        let mut rhs = DVector::zeros(self.m);
        for j in 0..self.total {
            if self.status[j] != VarStatus::Basic && self.x[j] != 0.0 {
                if j < self.n {
                    for i in 0..self.m {
                        rhs[i] -= self.lp.constraint_matrix[(i, j)] * self.x[j];
                    }
                } else {
                    rhs[j - self.n] += self.x[j];
                }
            }
        }
        let xb = &self.binv * rhs;
        for (r, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[r];
        }
    }

    fn refactor(&mut self) -> bool {
        let mut b = DMatrix::zeros(self.m, self.m);
        for (r, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                b.column_mut(r).copy_from(&self.lp.constraint_matrix.column(j));
            } else {
                b[(j - self.n, r)] = -1.0;
            }
        }
        match b.lu().try_inverse() {
            Some(inv) => {
                self.binv = inv;
                self.pivots_since_refactor = 0;
                self.recompute_basics();
                true
            }
            None => false,
        }
    }

    fn infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .map(|&j| {
                let v = self.x[j];
                (self.lower[j] - v).max(0.0) + (v - self.upper[j]).max(0.0)
            })
            .sum()
    }

    fn feas_scale(&self) -> f64 {
        1.0 + self.lp.rhs.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.upper[j] - self.lower[j] <= 1e-12
    }

    /// Dual vector for the given basic cost assignment.
    fn btran(&self, cb: &DVector<f64>) -> DVector<f64> {
        self.binv.transpose() * cb
    }

    fn run(mut self) -> LpSolution {
        let iter_cap = 10_000 + 200 * self.total;
        let mut iters = 0;

        // Phase 1.
        while self.infeasibility() > self.tol * self.feas_scale() {
            iters += 1;
            if iters > iter_cap {
                return self.failed();
            }
            match self.phase1_step() {
                Step::Progress => {}
                // No improving column while infeasibility remains: the
                // piecewise-linear infeasibility sum is at its minimum.
                Step::Optimal => return self.finished(LpStatus::Infeasible),
                Step::Unbounded | Step::Breakdown => return self.failed(),
            }
        }

        // Phase 2.
        self.degenerate_streak = 0;
        self.bland = false;
        loop {
            iters += 1;
            if iters > iter_cap {
                return self.failed();
            }
            match self.phase2_step() {
                Step::Progress => {}
                Step::Optimal => return self.extract(),
                Step::Unbounded => return self.finished(LpStatus::Unbounded),
                Step::Breakdown => return self.failed(),
            }
        }
    }

    fn phase1_step(&mut self) -> Step {
        // Gradient of the infeasibility sum with respect to the basics.
        let mut gamma = DVector::zeros(self.m);
        for (r, &j) in self.basis.iter().enumerate() {
            let v = self.x[j];
            if v < self.lower[j] - self.tol {
                gamma[r] = -1.0;
            } else if v > self.upper[j] + self.tol {
                gamma[r] = 1.0;
            }
        }
        let y = self.btran(&gamma);
        let price = |j: usize, w: &Self| -> f64 { -w.col_dot(j, &y) };
        self.pivot_with(price, true)
    }

    fn phase2_step(&mut self) -> Step {
        let mut cb = DVector::zeros(self.m);
        for (r, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                cb[r] = self.lp.objective[j];
            }
        }
        let y = self.btran(&cb);
        let price = |j: usize, w: &Self| -> f64 {
            let c = if j < w.n { w.lp.objective[j] } else { 0.0 };
            c - w.col_dot(j, &y)
        };
        self.pivot_with(price, false)
    }

    /// One pricing + ratio-test + pivot step shared by both phases.
    fn pivot_with<F: Fn(usize, &Self) -> f64>(&mut self, price: F, phase1: bool) -> Step {
        // Entering variable.
        let mut entering: Option<(usize, f64, f64)> = None; // (col, reduced cost, direction)
        for j in 0..self.total {
            if self.status[j] == VarStatus::Basic || self.is_fixed(j) {
                continue;
            }
            let d = price(j, self);
            let dir = match self.status[j] {
                VarStatus::AtLower if d < -PRICE_TOL => 1.0,
                VarStatus::AtUpper if d > PRICE_TOL => -1.0,
                VarStatus::Free if d.abs() > PRICE_TOL => -d.signum(),
                _ => continue,
            };
            if self.bland {
                entering = Some((j, d, dir));
                break;
            }
            match entering {
                Some((_, best, _)) if d.abs() <= best.abs() => {}
                _ => entering = Some((j, d, dir)),
            }
        }
        let Some((e, _, sigma)) = entering else {
            return Step::Optimal;
        };

        let alpha = self.ftran(e);

        // Ratio test. dx_basic[r]/dt = -sigma * alpha[r].
        let own_range = self.upper[e] - self.lower[e];
        let mut t_best = f64::INFINITY;
        let mut leaving: Option<(usize, VarStatus)> = None; // basis position + bound hit
        for r in 0..self.m {
            let delta = -sigma * alpha[r];
            if delta.abs() <= PIVOT_TOL {
                continue;
            }
            let j = self.basis[r];
            let v = self.x[j];
            let (lo, up) = (self.lower[j], self.upper[j]);
            let (target, hit) = if phase1 && v < lo - self.tol {
                // Infeasible below: blocks when climbing back to its lower bound.
                if delta > 0.0 {
                    (lo, VarStatus::AtLower)
                } else {
                    continue;
                }
            } else if phase1 && v > up + self.tol {
                if delta < 0.0 {
                    (up, VarStatus::AtUpper)
                } else {
                    continue;
                }
            } else if delta > 0.0 {
                (up, VarStatus::AtUpper)
            } else {
                (lo, VarStatus::AtLower)
            };
            if !target.is_finite() {
                continue;
            }
            let t = ((target - v) / delta).max(0.0);
            let better = match leaving {
                None => t < t_best,
                Some((cur, _)) => {
                    t < t_best - 1e-12
                        || (t <= t_best + 1e-12
                            && if self.bland {
                                self.basis[r] < self.basis[cur]
                            } else {
                                alpha[r].abs() > alpha[cur].abs()
                            })
                }
            };
            if better {
                t_best = t;
                leaving = Some((r, hit));
            }
        }

        if own_range < t_best {
            // Bound flip: the entering variable crosses to its other bound.
            if !own_range.is_finite() {
                return if phase1 { Step::Breakdown } else { Step::Unbounded };
            }
            self.apply_move(e, sigma, own_range, &alpha);
            self.status[e] = match self.status[e] {
                VarStatus::AtLower => VarStatus::AtUpper,
                VarStatus::AtUpper => VarStatus::AtLower,
                s => s,
            };
            self.x[e] = if self.status[e] == VarStatus::AtUpper {
                self.upper[e]
            } else {
                self.lower[e]
            };
            self.degenerate_streak = 0;
            return Step::Progress;
        }

        let Some((r, hit)) = leaving else {
            return if phase1 { Step::Breakdown } else { Step::Unbounded };
        };
        if alpha[r].abs() < PIVOT_TOL {
            return Step::Breakdown;
        }

        if t_best <= 1e-12 {
            self.degenerate_streak += 1;
            if self.degenerate_streak > 2 * self.total {
                self.bland = true;
            }
        } else {
            self.degenerate_streak = 0;
        }

        self.apply_move(e, sigma, t_best, &alpha);
        let out = self.basis[r];
        // Park the leaving variable exactly on the bound it reached.
        self.x[out] = if hit == VarStatus::AtLower {
            self.lower[out]
        } else {
            self.upper[out]
        };
        self.status[out] = hit;
        self.status[e] = VarStatus::Basic;
        self.basis[r] = e;

        // Product-form update of the inverse.
        let pivot = alpha[r];
        let pivot_row = self.binv.row(r).into_owned() / pivot;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = alpha[i];
            if f != 0.0 {
                for k in 0..self.m {
                    self.binv[(i, k)] -= f * pivot_row[k];
                }
            }
        }
        self.binv.row_mut(r).copy_from(&pivot_row);

        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= REFACTOR_EVERY && !self.refactor() {
            return Step::Breakdown;
        }
        Step::Progress
    }

    fn apply_move(&mut self, e: usize, sigma: f64, t: f64, alpha: &DVector<f64>) {
        if t == 0.0 {
            return;
        }
        for r in 0..self.m {
            let j = self.basis[r];
            self.x[j] -= sigma * t * alpha[r];
        }
        self.x[e] += sigma * t;
    }

    fn failed(&self) -> LpSolution {
        LpSolution {
            status: LpStatus::NumericalBreakdown,
            x: DVector::zeros(self.n),
            duals: DVector::zeros(self.m),
            objective_value: f64::NAN,
        }
    }

    fn finished(&self, status: LpStatus) -> LpSolution {
        LpSolution {
            status,
            x: self.x.rows(0, self.n).into_owned(),
            duals: DVector::zeros(self.m),
            objective_value: f64::NAN,
        }
    }

    /// Refactors once more, recomputes everything from scratch and verifies
    /// the optimality certificates before reporting.
    fn extract(&mut self) -> LpSolution {
        if !self.refactor() {
            return self.failed();
        }
        let mut cb = DVector::zeros(self.m);
        for (r, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                cb[r] = self.lp.objective[j];
            }
        }
        let y = self.btran(&cb);
        let x = self.x.rows(0, self.n).into_owned();
        let objective_value = self.lp.objective.dot(&x);

        let scale = self.feas_scale() + self.x.amax();
        // Primal feasibility: rows and bounds.
        for i in 0..self.m {
            let row_val = self.lp.constraint_matrix.row(i).transpose().dot(&x);
            let s = self.x[self.n + i];
            if (row_val - s).abs() > self.tol * scale * 10.0 {
                return self.failed();
            }
        }
        for j in 0..self.total {
            let v = self.x[j];
            if v < self.lower[j] - self.tol * scale || v > self.upper[j] + self.tol * scale {
                return self.failed();
            }
        }
        // Dual feasibility and complementary slackness on nonbasics. The
        // rows are homogeneous (the rhs lives in the logical bounds), so the
        // dual objective is the sum of reduced costs times active bounds.
        let mut dual_obj = 0.0;
        for j in 0..self.total {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let c = if j < self.n { self.lp.objective[j] } else { 0.0 };
            let d = c - self.col_dot(j, &y);
            match self.status[j] {
                VarStatus::AtLower if !self.is_fixed(j) => {
                    if d < -self.tol * scale * 10.0 {
                        return self.failed();
                    }
                }
                VarStatus::AtUpper if !self.is_fixed(j) => {
                    if d > self.tol * scale * 10.0 {
                        return self.failed();
                    }
                }
                VarStatus::Free => {
                    if d.abs() > self.tol * scale * 10.0 {
                        return self.failed();
                    }
                }
                _ => {}
            }
            dual_obj += d * self.x[j];
        }
        // Strong duality within 1e-6 scale.
        if (dual_obj - objective_value).abs() > 1e-6 * (1.0 + objective_value.abs() + scale) {
            return self.failed();
        }

        LpSolution {
            status: LpStatus::Optimal,
            x,
            duals: y,
            objective_value,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve_lp;
    use nalgebra::{dmatrix, dvector};

    fn ge(objective: Vec<f64>, a: DMatrix<f64>, b: Vec<f64>, lo: Vec<f64>, up: Vec<f64>) -> LinearProgram {
        let senses = vec![RowSense::Ge; a.nrows()];
        LinearProgram::new(
            DVector::from_vec(objective),
            a,
            DVector::from_vec(b),
            senses,
            DVector::from_vec(lo),
            DVector::from_vec(up),
        )
        .unwrap()
    }

    #[test]
    fn maximize_on_segment() {
        // min -x s.t. 0 <= x <= 1 -> x = 1, value -1
        let lp = ge(vec![-1.0], DMatrix::zeros(0, 1), vec![], vec![0.0], vec![1.0]);
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-9);
        assert!((sol.objective_value + 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        // min x s.t. x >= 1, x <= 0
        let lp = LinearProgram::new(
            dvector![1.0],
            dmatrix![1.0; 1.0],
            dvector![1.0, 0.0],
            vec![RowSense::Ge, RowSense::Le],
            dvector![f64::NEG_INFINITY],
            dvector![f64::INFINITY],
        )
        .unwrap();
        assert_eq!(solve_lp(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        // min -x s.t. x >= 0
        let lp = ge(
            vec![-1.0],
            dmatrix![1.0],
            vec![0.0],
            vec![f64::NEG_INFINITY],
            vec![f64::INFINITY],
        );
        assert_eq!(solve_lp(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn duals_satisfy_strong_duality() {
        // min -2x1 - 3x2 s.t. -x1 - x2 >= -4, -x1 - 2x2 >= -6, x >= 0
        let lp = ge(
            vec![-2.0, -3.0],
            dmatrix![-1.0, -1.0; -1.0, -2.0],
            vec![-4.0, -6.0],
            vec![0.0, 0.0],
            vec![f64::INFINITY, f64::INFINITY],
        );
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 2.0).abs() < 1e-8 && (sol.x[1] - 2.0).abs() < 1e-8);
        assert!((sol.objective_value + 10.0).abs() < 1e-8);
        // b^T u = objective for this instance (no active variable bounds with
        // nonzero reduced cost at the optimum), and Ge duals are nonnegative.
        let by_duals = -4.0 * sol.duals[0] - 6.0 * sol.duals[1];
        assert!((by_duals - sol.objective_value).abs() < 1e-6);
        assert!(sol.duals[0] >= -1e-9 && sol.duals[1] >= -1e-9);
    }

    #[test]
    fn equality_rows_and_free_variables() {
        // min x1 + x2 s.t. x1 + x2 = 1, x1 - x2 = 0 -> (0.5, 0.5)
        let lp = LinearProgram::new(
            dvector![1.0, 1.0],
            dmatrix![1.0, 1.0; 1.0, -1.0],
            dvector![1.0, 0.0],
            vec![RowSense::Eq, RowSense::Eq],
            dvector![f64::NEG_INFINITY, f64::NEG_INFINITY],
            dvector![f64::INFINITY, f64::INFINITY],
        )
        .unwrap();
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 0.5).abs() < 1e-9 && (sol.x[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn deterministic_resolve() {
        let lp = ge(
            vec![-2.0, -3.0, 1.0],
            dmatrix![-1.0, -1.0, 0.5; -1.0, -2.0, 0.0; 0.0, 1.0, -1.0],
            vec![-4.0, -6.0, -3.0],
            vec![0.0, 0.0, 0.0],
            vec![f64::INFINITY, f64::INFINITY, 10.0],
        );
        let a = solve_lp(&lp);
        let b = solve_lp(&lp);
        assert_eq!(a.status, b.status);
        assert_eq!(a.x, b.x);
        assert_eq!(a.duals, b.duals);
        assert_eq!(a.objective_value, b.objective_value);
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Classic cycling instance for textbook pivoting; Bland's rule must
        // rescue it. min -0.75x1 + 150x2 - 0.02x3 + 6x4
        let lp = LinearProgram::new(
            dvector![-0.75, 150.0, -0.02, 6.0],
            dmatrix![
                0.25, -60.0, -0.04, 9.0;
                0.5, -90.0, -0.02, 3.0;
                0.0, 0.0, 1.0, 0.0
            ],
            dvector![0.0, 0.0, 1.0],
            vec![RowSense::Le, RowSense::Le, RowSense::Le],
            dvector![0.0, 0.0, 0.0, 0.0],
            DVector::from_element(4, f64::INFINITY),
        )
        .unwrap();
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value + 0.05).abs() < 1e-9);
    }

    #[test]
    fn env_tolerance_override() {
        std::env::set_var("QCP_LP_TOL", "1e-5");
        let backend = SimplexBackend::default();
        assert_eq!(backend.feasibility_tol(), 1e-5);
        std::env::remove_var("QCP_LP_TOL");
        let backend = SimplexBackend::default();
        assert_eq!(backend.feasibility_tol(), crate::DEFAULT_TOL);
    }

    #[test]
    fn random_instances_match_dense_enumeration() {
        // Small random LPs cross-checked against brute-force vertex
        // enumeration of the feasible box-polytope.
        use crate::rng::Rng;
        let mut rng = Rng::new(77);
        for trial in 0..25 {
            let n = 2 + (trial % 2);
            let m = 3;
            let a = DMatrix::from_fn(m, n, |_, _| rng.uniform_in(-1.0, 1.0));
            let b = DVector::from_fn(m, |_, _| rng.uniform_in(-2.0, -0.5));
            let c = DVector::from_fn(n, |_, _| rng.uniform_in(-1.0, 1.0));
            let lp = LinearProgram::new(
                c.clone(),
                a.clone(),
                b.clone(),
                vec![RowSense::Ge; m],
                DVector::from_element(n, 0.0),
                DVector::from_element(n, 1.0),
            )
            .unwrap();
            let sol = solve_lp(&lp);
            assert_eq!(sol.status, LpStatus::Optimal, "trial {trial}");
            // Brute force over the grid of candidate actives: enumerate all
            // vertices of the feasible region by pairing constraints/bounds
            // via dd_convert on the H-representation.
            let mut normals = DMatrix::zeros(m + 2 * n, n);
            let mut offsets = DVector::zeros(m + 2 * n);
            normals.view_mut((0, 0), (m, n)).copy_from(&a);
            offsets.view_mut((0, 0), (m, 1)).copy_from(&b);
            for j in 0..n {
                normals[(m + j, j)] = 1.0;
                offsets[m + j] = 0.0;
                normals[(m + n + j, j)] = -1.0;
                offsets[m + n + j] = -1.0;
            }
            let h = crate::polyhedral::HPolyhedron::new(normals, offsets).unwrap();
            let v = crate::polyhedral::dd_convert(&h).unwrap();
            let best = v
                .points
                .iter()
                .map(|p| c.dot(p))
                .fold(f64::INFINITY, f64::min);
            assert!(
                (sol.objective_value - best).abs() < 1e-6,
                "trial {trial}: simplex {} vs enumeration {}",
                sol.objective_value,
                best
            );
        }
    }
}
