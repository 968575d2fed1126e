//! Scalarized LP pairs tying the upper image to the lower image, and the
//! bi-affine coupling algebra between them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpBackend, LpStatus};
use crate::polyhedral::PolyCone;

/// Vector linear program data: `min_C Px  s.t.  Ax >= b`, together with an
/// interior point `c` of the ordering cone with last coordinate 1.
#[derive(Clone, Debug)]
pub struct VlpProblem {
    pub objective_matrix: DMatrix<f64>, // P, q x n
    pub constraints: DMatrix<f64>,      // A, m x n
    pub rhs: DVector<f64>,              // b
    pub cone: PolyCone,                 // C
    pub c: DVector<f64>,
}

impl VlpProblem {
    pub fn new(
        objective_matrix: DMatrix<f64>,
        constraints: DMatrix<f64>,
        rhs: DVector<f64>,
        cone: PolyCone,
        c: DVector<f64>,
    ) -> Result<Self> {
        let q = objective_matrix.nrows();
        let n = objective_matrix.ncols();
        if constraints.ncols() != n || constraints.nrows() != rhs.len() {
            return Err(Error::Dimension(format!(
                "P is {q}x{n} but A is {}x{} with {} rhs entries",
                constraints.nrows(),
                constraints.ncols(),
                rhs.len()
            )));
        }
        if cone.dim() != q || c.len() != q {
            return Err(Error::Dimension("cone and c must live in image space".into()));
        }
        if !cone.is_pointed() {
            return Err(Error::ConeNotPointed);
        }
        if (c[q - 1] - 1.0).abs() > 1e-9 {
            return Err(Error::Dimension(format!(
                "interior point must be scaled to c_q = 1, got {}",
                c[q - 1]
            )));
        }
        // For non-solid cones no interior point exists; the field is unused
        // there and the lifting reformulation chooses its own.
        if cone.is_solid() {
            for i in 0..cone.normals.ncols() {
                if cone.normals.column(i).dot(&c) <= 0.0 {
                    return Err(Error::Dimension("c is not interior to the cone".into()));
                }
            }
        }
        Ok(VlpProblem {
            objective_matrix,
            constraints,
            rhs,
            cone,
            c,
        })
    }

    pub fn image_dim(&self) -> usize {
        self.objective_matrix.nrows()
    }

    pub fn num_vars(&self) -> usize {
        self.objective_matrix.ncols()
    }

    pub fn image(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.objective_matrix * x
    }
}

/// The coupling function
/// `phi(y, y*) = sum_{i<q} y_i y*_i + y_q (1 - sum_{i<q} c_i y*_i) - y*_q`.
pub fn coupling_phi(y: &DVector<f64>, y_star: &DVector<f64>, c: &DVector<f64>) -> f64 {
    let q = y.len();
    let mut acc = 0.0;
    let mut wq = 1.0;
    for i in 0..q - 1 {
        acc += y[i] * y_star[i];
        wq -= c[i] * y_star[i];
    }
    acc + y[q - 1] * wq - y_star[q - 1]
}

/// `omega(t*) = (t*_1, ..., t*_{q-1}, 1 - sum_{i<q} c_i t*_i)`; independent of
/// the last coordinate of `t*`.
pub fn omega(t_star: &DVector<f64>, c: &DVector<f64>) -> DVector<f64> {
    let q = c.len();
    let mut w = DVector::zeros(q);
    let mut last = 1.0;
    for i in 0..q - 1 {
        w[i] = t_star[i];
        last -= c[i] * t_star[i];
    }
    w[q - 1] = last;
    w
}

/// The half-space `{ y* : phi(y, y*) >= 0 }` as a linear row
/// `(normal, offset)` with `normal^T y* >= offset`. Its last normal component
/// is exactly -1.
pub fn dual_cut_row(y: &DVector<f64>, c: &DVector<f64>) -> (DVector<f64>, f64) {
    let q = y.len();
    let mut normal = DVector::zeros(q);
    for i in 0..q - 1 {
        normal[i] = y[i] - y[q - 1] * c[i];
    }
    normal[q - 1] = -1.0;
    (normal, -y[q - 1])
}

/// Solution of the translative scalarization and its dual, extracted from one
/// LP solve.
#[derive(Clone, Debug)]
pub struct TranslativeSolution {
    pub x: DVector<f64>,
    pub z: f64,
    pub u: DVector<f64>,
    pub w: DVector<f64>,
}

impl TranslativeSolution {
    /// Offset of the supporting half-space `{ y : w^T y >= b^T u }`.
    pub fn support_offset(&self, rhs: &DVector<f64>) -> f64 {
        rhs.dot(&self.u)
    }
}

/// Solves `min z  s.t.  Ax >= b,  Z^T P x <= Z^T t + z Z^T c` and extracts
/// the dual pair `(u, w)` from the LP duals, with `w` normalized so that
/// `c^T w = 1`. The half-space `{ y : w^T y >= b^T u }` supports the upper
/// image and `s = t + z c` lies on its boundary; `z > 0` iff `t` is outside
/// the upper image.
pub fn solve_p2_d2(
    vlp: &VlpProblem,
    t: &DVector<f64>,
    backend: &mut dyn LpBackend,
) -> Result<TranslativeSolution> {
    let n = vlp.num_vars();
    let m = vlp.constraints.nrows();
    let p = vlp.cone.normals.ncols();
    // Variables (x, z); rows: Ax >= b, then -Z^T P x + (Z^T c) z >= -Z^T t.
    let mut a = DMatrix::zeros(m + p, n + 1);
    a.view_mut((0, 0), (m, n)).copy_from(&vlp.constraints);
    let ztp = vlp.cone.normals.transpose() * &vlp.objective_matrix; // p x n
    let ztc = vlp.cone.normals.transpose() * &vlp.c; // p
    for i in 0..p {
        for j in 0..n {
            a[(m + i, j)] = -ztp[(i, j)];
        }
        a[(m + i, n)] = ztc[i];
    }
    let mut b = DVector::zeros(m + p);
    b.rows_mut(0, m).copy_from(&vlp.rhs);
    let ztt = vlp.cone.normals.transpose() * t;
    for i in 0..p {
        b[m + i] = -ztt[i];
    }
    let mut objective = DVector::zeros(n + 1);
    objective[n] = 1.0;
    let lp = LinearProgram::with_ge_rows(objective, a, b)?;
    let sol = backend.solve(&lp);
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible | LpStatus::Unbounded => {
            return Err(Error::AssumptionViolated(format!(
                "translative scalarization is {:?}: S empty or image not C-bounded",
                sol.status
            )))
        }
        LpStatus::NumericalBreakdown => {
            return Err(Error::LpFailure("translative scalarization broke down".into()))
        }
    }
    let x = sol.x.rows(0, n).into_owned();
    let z = sol.objective_value;
    let u = sol.duals.rows(0, m).into_owned();
    let lambda = sol.duals.rows(m, p).into_owned();
    let mut w = &vlp.cone.normals * lambda;
    // Guard against LP-dual scaling drift: D2 requires c^T w = 1.
    let cw = vlp.c.dot(&w);
    if cw.abs() < 1e-12 {
        return Err(Error::LpFailure("degenerate dual weight from translative solve".into()));
    }
    w /= cw;
    let u = u / cw;
    Ok(TranslativeSolution { x, z, u, w })
}

/// Solution of the weighted-sum scalarization.
#[derive(Clone, Debug)]
pub struct WeightedSumSolution {
    pub x: DVector<f64>,
    pub u: DVector<f64>,
    pub value: f64,
}

/// Solves `min w^T P x  s.t.  Ax >= b`. The point `Px` lies on the boundary
/// of the upper image when `w` comes from `omega` on the dual start region.
pub fn solve_p1_d1(
    vlp: &VlpProblem,
    w: &DVector<f64>,
    backend: &mut dyn LpBackend,
) -> Result<WeightedSumSolution> {
    let objective = (w.transpose() * &vlp.objective_matrix).transpose();
    let lp = LinearProgram::with_ge_rows(objective, vlp.constraints.clone(), vlp.rhs.clone())?;
    let sol = backend.solve(&lp);
    match sol.status {
        LpStatus::Optimal => Ok(WeightedSumSolution {
            x: sol.x,
            u: sol.duals,
            value: sol.objective_value,
        }),
        LpStatus::Unbounded => Err(Error::AssumptionViolated(
            "weighted-sum scalarization unbounded: weight outside C+ or image not C-bounded".into(),
        )),
        LpStatus::Infeasible => Err(Error::AssumptionViolated(
            "constraint system infeasible: S is empty".into(),
        )),
        LpStatus::NumericalBreakdown => {
            Err(Error::LpFailure("weighted-sum scalarization broke down".into()))
        }
    }
}
