//! Linear multiplicative programs: minimize a product of affine functions
//! over linear constraints and a variable box.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::polyhedral::PolyCone;
use crate::qcp::{Objective, QcpProblem};
use crate::rng::Rng;
use crate::scalarize::VlpProblem;

/// `min prod_i (c_i^T x + d_i)  s.t.  Ax >= b, l <= x <= u`, with every
/// factor positive on the feasible set.
#[derive(Clone, Debug)]
pub struct LmpInstance {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub l: DVector<f64>,
    pub u: DVector<f64>,
    /// One row per factor.
    pub c_rows: DMatrix<f64>,
    pub d: DVector<f64>,
}

impl LmpInstance {
    pub fn factor_values(&self, x: &DVector<f64>) -> Vec<f64> {
        (0..self.c_rows.nrows())
            .map(|i| self.c_rows.row(i).transpose().dot(x) + self.d[i])
            .collect()
    }
}

/// Random instance: `A`, the factor rows and `b` uniform on `[0, 10]`,
/// bounds `l = 0`, `u = 100 e`, offsets `d = 0`. Entries are drawn in the
/// fixed order A (row-major), b, factor rows (row-major) from the seeded
/// generator in [`crate::rng`], so instances are reproducible bit-exactly.
pub fn gen_lmp_random(q: usize, m: usize, n: usize, seed: u64) -> LmpInstance {
    let mut rng = Rng::new(seed);
    let a = DMatrix::from_row_iterator(m, n, (0..m * n).map(|_| rng.uniform_in(0.0, 10.0)));
    let b = DVector::from_iterator(m, (0..m).map(|_| rng.uniform_in(0.0, 10.0)));
    let c_rows = DMatrix::from_row_iterator(q, n, (0..q * n).map(|_| rng.uniform_in(0.0, 10.0)));
    LmpInstance {
        a,
        b,
        l: DVector::zeros(n),
        u: DVector::from_element(n, 100.0),
        c_rows,
        d: DVector::zeros(q),
    }
}

/// Transforms the instance into the quasi-concave form: the objective matrix
/// rows are the factor rows, the ordering cone is the nonnegative orthant,
/// and the objective is the factor product extended by `-inf` outside it.
pub fn make_lmp(inst: &LmpInstance) -> Result<QcpProblem> {
    let q = inst.c_rows.nrows();
    let n = inst.c_rows.ncols();
    let m = inst.a.nrows();
    if inst.a.ncols() != n || inst.b.len() != m || inst.d.len() != q {
        return Err(Error::InvalidInstance("inconsistent dimensions".into()));
    }
    if inst.l.len() != n || inst.u.len() != n || (0..n).any(|j| inst.l[j] > inst.u[j]) {
        return Err(Error::InvalidInstance("box must satisfy l <= u".into()));
    }
    // Fold the box into the constraint rows.
    let mut a = DMatrix::zeros(m + 2 * n, n);
    a.view_mut((0, 0), (m, n)).copy_from(&inst.a);
    let mut b = DVector::zeros(m + 2 * n);
    b.rows_mut(0, m).copy_from(&inst.b);
    for j in 0..n {
        a[(m + j, j)] = 1.0;
        b[m + j] = inst.l[j];
        a[(m + n + j, j)] = -1.0;
        b[m + n + j] = -inst.u[j];
    }
    let d = inst.d.clone();
    let f = Objective::new("factor product", move |y: &DVector<f64>| {
        let mut prod = 1.0;
        for i in 0..y.len() {
            let factor = y[i] + d[i];
            if factor < 0.0 {
                return f64::NEG_INFINITY;
            }
            prod *= factor;
        }
        prod
    });
    let vlp = VlpProblem::new(
        inst.c_rows.clone(),
        a,
        b,
        PolyCone::nonneg_orthant(q),
        DVector::from_element(q, 1.0),
    )?;
    Ok(QcpProblem::new(vlp, f))
}
