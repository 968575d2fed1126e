//! Frank-Wolfe evaluation of the negated conjugate of `x^T x` restricted to
//! a P-represented polytope: the only oracle available over such a set is
//! linear minimization, which is one LP per step.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpBackend, LpStatus};
use crate::polyhedral::PPolyhedron;

const MAX_ITER: usize = 10_000;

fn linear_minimum(
    poly: &PPolyhedron,
    direction: &DVector<f64>,
    backend: &mut dyn LpBackend,
) -> Result<DVector<f64>> {
    let k = poly.dim();
    let aux = poly.aux_dim();
    let m = poly.a.nrows();
    let mut a = DMatrix::zeros(m, k + aux);
    a.view_mut((0, 0), (m, k)).copy_from(&poly.a);
    a.view_mut((0, k), (m, aux)).copy_from(&poly.b_mat);
    let mut objective = DVector::zeros(k + aux);
    objective.rows_mut(0, k).copy_from(direction);
    let lp = LinearProgram::with_ge_rows(objective, a, poly.b.clone())?;
    let sol = backend.solve(&lp);
    match sol.status {
        LpStatus::Optimal => Ok(sol.x.rows(0, k).into_owned()),
        LpStatus::Unbounded => Err(Error::InvalidInstance(
            "linear minimization oracle unbounded: the set is not a polytope".into(),
        )),
        LpStatus::Infeasible => Err(Error::EmptyPolyhedron),
        LpStatus::NumericalBreakdown => Err(Error::LpFailure("oracle lp broke down".into())),
    }
}

/// `-g*(y) = min_{x in Q} x^T x - y^T x` within `tol`, by conditional
/// gradient with away steps and exact line search; the duality gap is the
/// stopping certificate. Away steps keep the convergence linear for this
/// strongly convex objective, where the plain method zigzags.
pub fn neg_conjugate_quadratic(
    y: &DVector<f64>,
    q_poly: &PPolyhedron,
    tol: f64,
    backend: &mut dyn LpBackend,
) -> Result<f64> {
    if y.len() != q_poly.dim() {
        return Err(Error::Dimension(format!(
            "argument dim {} vs polytope dim {}",
            y.len(),
            q_poly.dim()
        )));
    }
    let x0 = linear_minimum(q_poly, &(-y), backend)?;
    // Active vertex set with convex weights; x is their combination.
    let mut atoms: Vec<(DVector<f64>, f64)> = vec![(x0.clone(), 1.0)];
    let mut x = x0;
    for _ in 0..MAX_ITER {
        let grad = &x * 2.0 - y;
        let s = linear_minimum(q_poly, &grad, backend)?;
        let d_fw = &s - &x;
        let gap = -grad.dot(&d_fw);
        if gap <= tol {
            return Ok(x.dot(&x) - y.dot(&x));
        }
        let away_idx = (0..atoms.len())
            .max_by(|&i, &j| {
                grad.dot(&atoms[i].0)
                    .partial_cmp(&grad.dot(&atoms[j].0))
                    .unwrap()
            })
            .expect("atom set never empty");
        let d_away = &x - &atoms[away_idx].0;
        let use_fw = -grad.dot(&d_fw) >= -grad.dot(&d_away);
        let (d, gamma_max) = if use_fw {
            (d_fw, 1.0)
        } else {
            let alpha = atoms[away_idx].1;
            (d_away, alpha / (1.0 - alpha).max(1e-15))
        };
        let dd = d.dot(&d);
        if dd <= 1e-30 {
            return Ok(x.dot(&x) - y.dot(&x));
        }
        let gamma = (-grad.dot(&d) / (2.0 * dd)).clamp(0.0, gamma_max);
        if use_fw {
            for (_, w) in atoms.iter_mut() {
                *w *= 1.0 - gamma;
            }
            match atoms.iter_mut().find(|(v, _)| (v - &s).amax() <= 1e-10) {
                Some((_, w)) => *w += gamma,
                None => atoms.push((s, gamma)),
            }
        } else {
            for (_, w) in atoms.iter_mut() {
                *w *= 1.0 + gamma;
            }
            atoms[away_idx].1 -= gamma;
        }
        atoms.retain(|(_, w)| *w > 1e-14);
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        for (_, w) in atoms.iter_mut() {
            *w /= total;
        }
        x = atoms
            .iter()
            .fold(DVector::zeros(y.len()), |acc, (v, w)| acc + v * *w);
    }
    Err(Error::IterationLimit(MAX_ITER))
}
