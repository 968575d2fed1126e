//! Difference-of-convex programs with one polyhedral component.
//!
//! `min g(x) - h(x)` is rewritten over the epigraph of the polyhedral
//! component: in the primal orientation (`g` polyhedral) as
//! `min r - h(x)  s.t.  (x, r) in epi g`, in the dual orientation
//! (`h` polyhedral) through conjugates as
//! `min r* - g*(y)  s.t.  (y, r*) in epi h*`. Both land in the
//! quasi-concave class with the non-solid monotonicity cone spanned by the
//! epigraph direction, so the solvers route them through the lifting.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::polyhedral::{PPolyhedron, PolyCone};
use crate::qcp::{Objective, QcpProblem};
use crate::scalarize::VlpProblem;

use super::conjugate::polyhedral_conjugate;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DcOrientation {
    /// The epigraph is of the convex component `g`; the objective subtracts
    /// the evaluable `h`.
    Primal,
    /// The epigraph is of the concave component `h`; the polyhedral part is
    /// conjugated and the objective subtracts the evaluable conjugate `g*`.
    Dual,
}

/// One polyhedral component as an epigraph P-representation over `(x, r)`
/// (last projected coordinate is the epigraph variable), plus the evaluable
/// non-polyhedral part: `h` for the primal orientation, `g*` for the dual.
#[derive(Clone, Debug)]
pub struct DcInstance {
    pub epi: PPolyhedron,
    pub nonpoly: Objective,
    pub orientation: DcOrientation,
}

/// Epigraph form into the quasi-concave class: decision vector
/// `(x, r, aux)`, image map extracting `(x, r)`, objective
/// `r - nonpoly(x)`, monotonicity cone spanned by the epigraph direction.
fn qcp_from_epigraph(epi: &PPolyhedron, nonpoly: &Objective) -> Result<QcpProblem> {
    let image_dim = epi.dim();
    let aux = epi.aux_dim();
    let n = image_dim + aux;
    let m = epi.a.nrows();
    let mut a = DMatrix::zeros(m, n);
    a.view_mut((0, 0), (m, image_dim)).copy_from(&epi.a);
    a.view_mut((0, image_dim), (m, aux)).copy_from(&epi.b_mat);
    let mut p = DMatrix::zeros(image_dim, n);
    for i in 0..image_dim {
        p[(i, i)] = 1.0;
    }
    let mut gen = DMatrix::zeros(image_dim, 1);
    gen[(image_dim - 1, 0)] = 1.0;
    let cone = PolyCone::from_generators(gen)?;
    let inner = nonpoly.clone();
    let f = Objective::new(
        format!("epigraph variable minus {}", nonpoly.description()),
        move |y: &DVector<f64>| {
            let k = y.len() - 1;
            y[k] - inner.eval(&y.rows(0, k).into_owned())
        },
    );
    let mut c = DVector::zeros(image_dim);
    c[image_dim - 1] = 1.0;
    let vlp = VlpProblem::new(p, a, epi.b.clone(), cone, c)?;
    Ok(QcpProblem::new(vlp, f))
}

pub fn make_dc(dc: &DcInstance) -> Result<QcpProblem> {
    match dc.orientation {
        DcOrientation::Primal => make_dc_primal(dc),
        DcOrientation::Dual => make_dc_dual(dc),
    }
}

/// `min r - h(x)` over the supplied epigraph.
pub fn make_dc_primal(dc: &DcInstance) -> Result<QcpProblem> {
    qcp_from_epigraph(&dc.epi, &dc.nonpoly)
}

/// `min r* - g*(y)` over the conjugate of the supplied epigraph.
pub fn make_dc_dual(dc: &DcInstance) -> Result<QcpProblem> {
    let conj = polyhedral_conjugate(&dc.epi)?;
    qcp_from_epigraph(&conj, &dc.nonpoly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::{lift_problem, project_back};
    use crate::lp::SimplexBackend;
    use crate::qcp::solve_primal_qcp;
    use crate::vlp::SolveOptions;
    use nalgebra::dvector;

    #[test]
    fn zero_subtrahend_reduces_to_epigraph_minimum() {
        // g(x) = |x| on [-2, 2], h = 0: the reformulation minimizes g.
        let epi = PPolyhedron::new(
            nalgebra::dmatrix![-1.0, 1.0; 1.0, 1.0; 1.0, 0.0; -1.0, 0.0],
            DMatrix::zeros(4, 0),
            dvector![0.0, 0.0, -2.0, -2.0],
        )
        .unwrap();
        let dc = DcInstance {
            epi,
            nonpoly: Objective::constant(0.0),
            orientation: DcOrientation::Primal,
        };
        let p = make_dc(&dc).unwrap();
        assert!(!p.vlp.cone.is_solid());
        let lifted = lift_problem(&p).unwrap();
        let mut backend = SimplexBackend::default();
        let r = project_back(
            &lifted,
            solve_primal_qcp(&lifted.lifted, &mut backend, &SolveOptions::default()).unwrap(),
        )
        .unwrap();
        assert!(r.value.abs() < 1e-8, "min |x| = 0, got {}", r.value);
    }

    #[test]
    fn primal_and_dual_orientations_agree() {
        // min over [-2,2] of |x| - 0.5 x: value 0 at x = 0. Primal route:
        // g = |x| + box indicator (epigraph supplied), h(x) = 0.5 x
        // evaluable. Dual route: h polyhedral with epi {r >= 0.5 x}, so
        // dom h* = {0.5} and the problem becomes min r* - g*(y) there with
        // g*(0.5) = max 0.5 x - |x| = 0.
        let epi_g = PPolyhedron::new(
            nalgebra::dmatrix![-1.0, 1.0; 1.0, 1.0; 1.0, 0.0; -1.0, 0.0],
            DMatrix::zeros(4, 0),
            dvector![0.0, 0.0, -2.0, -2.0],
        )
        .unwrap();
        let primal = make_dc(&DcInstance {
            epi: epi_g.clone(),
            nonpoly: Objective::new("half", |x: &DVector<f64>| 0.5 * x[0]),
            orientation: DcOrientation::Primal,
        })
        .unwrap();
        let epi_h = PPolyhedron::new(
            nalgebra::dmatrix![-0.5, 1.0],
            DMatrix::zeros(1, 0),
            dvector![0.0],
        )
        .unwrap();
        // g*(y) = max over [-2,2] of yx - |x|.
        let g_conj = Objective::new("conjugate of abs on [-2,2]", |y: &DVector<f64>| {
            let candidates = [-2.0, 0.0, 2.0];
            candidates
                .iter()
                .map(|x: &f64| y[0] * x - x.abs())
                .fold(f64::NEG_INFINITY, f64::max)
        });
        let dual = make_dc(&DcInstance {
            epi: epi_h,
            nonpoly: g_conj,
            orientation: DcOrientation::Dual,
        })
        .unwrap();
        let mut backend = SimplexBackend::default();
        let opts = SolveOptions::default();
        let solve = |p: &QcpProblem, backend: &mut SimplexBackend| {
            let lifted = lift_problem(p).unwrap();
            project_back(
                &lifted,
                solve_primal_qcp(&lifted.lifted, backend, &opts).unwrap(),
            )
            .unwrap()
        };
        let rp = solve(&primal, &mut backend);
        let rd = solve(&dual, &mut backend);
        assert!(rp.value.abs() < 1e-7, "primal value {}", rp.value);
        assert!(
            (rp.value - rd.value).abs() < 1e-6,
            "orientations disagree: {} vs {}",
            rp.value,
            rd.value
        );
    }
}
