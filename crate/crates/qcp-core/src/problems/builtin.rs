//! Built-in demo instances used by the CLI and the test suites.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lp::{LpBackend, SimplexBackend};
use crate::polyhedral::{PPolyhedron, PolyCone};
use crate::qcp::{Objective, QcpProblem};
use crate::scalarize::VlpProblem;

use super::cqp::sin_floor_matrix;
use super::dc::{DcInstance, DcOrientation};
use super::{make_boundary_problem, neg_conjugate_quadratic};

/// Four-variable concave minimization test problem:
/// `min -|y1|^(3/2) - (y2 - 4.5)^2 / 10` over the image of a small polytope,
/// with the monotonicity cone generated by `(-1,0)` and `(0,1)` and interior
/// point `(-0.25, 1)`.
pub fn example41() -> QcpProblem {
    let a0 = nalgebra::dmatrix![
        1.2, 1.4, 0.4, 0.8;
        -0.7, 0.8, 0.8, 0.0;
        0.0, 1.2, 0.0, 0.4;
        2.8, -2.1, 0.5, 0.0;
        0.4, 2.1, -1.5, -0.2;
        -0.6, -1.3, 2.4, 0.5
    ];
    let b0 = nalgebra::dvector![6.8, 0.8, 2.1, 1.2, 1.4, 0.8];
    // A0 x <= b0 and x >= 0 in >= form.
    let mut a = DMatrix::zeros(10, 4);
    a.view_mut((0, 0), (6, 4)).copy_from(&(-&a0));
    a.view_mut((6, 0), (4, 4)).copy_from(&DMatrix::identity(4, 4));
    let mut b = DVector::zeros(10);
    b.rows_mut(0, 6).copy_from(&(-&b0));
    let p = nalgebra::dmatrix![1.0, 0.0, 0.0, 0.0; 1.0, -0.5, 0.3, 1.0];
    let cone = PolyCone::from_generators(nalgebra::dmatrix![-1.0, 0.0; 0.0, 1.0])
        .expect("valid cone");
    let f = Objective::new("-|y1|^1.5 - (y2 - 4.5)^2 / 10", |y: &DVector<f64>| {
        -y[0].abs().powf(1.5) - 0.1 * (y[1] - 4.5).powi(2)
    });
    let vlp = VlpProblem::new(p, a, b, cone, nalgebra::dvector![-0.25, 1.0])
        .expect("consistent data");
    QcpProblem::new(vlp, f)
}

fn chain_h(q: usize) -> Objective {
    Objective::new("100 * sum(|x_{i-1}| - x_i)", move |x: &DVector<f64>| {
        let mut acc = 0.0;
        for j in 0..q - 1 {
            acc += x[j].abs() - x[j + 1];
        }
        100.0 * acc
    })
}

/// Epigraph of `g(x) = |x1 - 1| + 200 sum_j max(0, |x_j| - x_{j+1})`
/// restricted to the box `[-10, 10]^q`, with auxiliaries
/// `(s, w_1..w_{q-1}, v_1..v_{q-1})` for the absolute values and maxima.
fn chain_g_epigraph(q: usize) -> PPolyhedron {
    let k = q - 1;
    let aux = 1 + 2 * k;
    let rows = 2 + 4 * k + 1 + 2 * q;
    let mut a = DMatrix::zeros(rows, q + 1);
    let mut bm = DMatrix::zeros(rows, aux);
    let mut b = DVector::zeros(rows);
    let (s_col, w0, v0) = (0, 1, 1 + k);
    let mut r = 0;
    // s >= x1 - 1 and s >= 1 - x1.
    a[(r, 0)] = -1.0;
    bm[(r, s_col)] = 1.0;
    b[r] = -1.0;
    r += 1;
    a[(r, 0)] = 1.0;
    bm[(r, s_col)] = 1.0;
    b[r] = 1.0;
    r += 1;
    for j in 0..k {
        // w_j >= +-x_j.
        a[(r, j)] = -1.0;
        bm[(r, w0 + j)] = 1.0;
        r += 1;
        a[(r, j)] = 1.0;
        bm[(r, w0 + j)] = 1.0;
        r += 1;
        // v_j >= 0 and v_j >= w_j - x_{j+1}.
        bm[(r, v0 + j)] = 1.0;
        r += 1;
        a[(r, j + 1)] = 1.0;
        bm[(r, w0 + j)] = -1.0;
        bm[(r, v0 + j)] = 1.0;
        r += 1;
    }
    // r >= s + 200 sum v_j.
    a[(r, q)] = 1.0;
    bm[(r, s_col)] = -1.0;
    for j in 0..k {
        bm[(r, v0 + j)] = -200.0;
    }
    r += 1;
    // Box.
    for i in 0..q {
        a[(r, i)] = 1.0;
        b[r] = -10.0;
        r += 1;
        a[(r, i)] = -1.0;
        b[r] = -10.0;
        r += 1;
    }
    debug_assert_eq!(r, rows);
    PPolyhedron::new(a, bm, b).expect("consistent rows")
}

/// Epigraph of the polyhedral `h(x) = 100 sum_j (|x_j| - x_{j+1})` on the
/// whole space, auxiliaries `w_j` for the absolute values.
fn chain_h_epigraph(q: usize) -> PPolyhedron {
    let k = q - 1;
    let rows = 2 * k + 1;
    let mut a = DMatrix::zeros(rows, q + 1);
    let mut bm = DMatrix::zeros(rows, k);
    let b = DVector::zeros(rows);
    let mut r = 0;
    for j in 0..k {
        a[(r, j)] = -1.0;
        bm[(r, j)] = 1.0;
        r += 1;
        a[(r, j)] = 1.0;
        bm[(r, j)] = 1.0;
        r += 1;
    }
    a[(r, q)] = 1.0;
    for j in 0..k {
        bm[(r, j)] = -100.0;
        a[(r, j + 1)] += 100.0;
    }
    PPolyhedron::new(a, bm, b).expect("consistent rows")
}

/// Chain-structured difference of two polyhedral functions whose unique
/// minimum is 0 at the all-ones point, in the primal orientation.
pub fn dc_chain(q: usize) -> Result<DcInstance> {
    if q < 2 {
        return Err(Error::InvalidInstance("chain needs q >= 2".into()));
    }
    Ok(DcInstance {
        epi: chain_g_epigraph(q),
        nonpoly: chain_h(q),
        orientation: DcOrientation::Primal,
    })
}

/// Same problem through the conjugate route: the polyhedral `h` is
/// conjugated and the objective subtracts `g*` evaluated by an LP over the
/// epigraph of `g`.
pub fn dc_chain_dual(q: usize) -> Result<DcInstance> {
    if q < 2 {
        return Err(Error::InvalidInstance("chain needs q >= 2".into()));
    }
    let epi_g = chain_g_epigraph(q);
    let g_conj = Objective::new("conjugate of the chain objective", move |y: &DVector<f64>| {
        // g*(y) = -min { r - y^T x : (x, r) in epi g }, one LP per call.
        let mut backend = SimplexBackend::default();
        let k = epi_g.dim() - 1;
        let aux = epi_g.aux_dim();
        let m = epi_g.a.nrows();
        let mut a = DMatrix::zeros(m, k + 1 + aux);
        a.view_mut((0, 0), (m, k + 1)).copy_from(&epi_g.a);
        a.view_mut((0, k + 1), (m, aux)).copy_from(&epi_g.b_mat);
        let mut objective = DVector::zeros(k + 1 + aux);
        for i in 0..k {
            objective[i] = -y[i];
        }
        objective[k] = 1.0;
        let lp = crate::lp::LinearProgram::with_ge_rows(objective, a, epi_g.b.clone())
            .expect("consistent dims");
        let sol = backend.solve(&lp);
        match sol.status {
            crate::lp::LpStatus::Optimal => -sol.objective_value,
            // Unbounded cannot occur over a boxed epigraph; treat any other
            // outcome as outside the domain.
            _ => f64::INFINITY,
        }
    });
    Ok(DcInstance {
        epi: chain_h_epigraph(q),
        nonpoly: g_conj,
        orientation: DcOrientation::Dual,
    })
}

/// Boundary-minimization instance: `min x^T x` over the boundary of the
/// image of the box `[-e, e]^m` under the sin-floor matrix. The penalty is
/// `2 ||r||^2 + 1` for the row-sum vector `r` of absolute values, matching
/// the Lipschitz bound `2 ||r||` and radius `||r||`.
pub fn boundary_example(q: usize, m: usize) -> Result<(DcInstance, PPolyhedron)> {
    let p = sin_floor_matrix(q, m);
    let mut row_sums: DVector<f64> = DVector::zeros(q);
    for i in 0..q {
        row_sums[i] = p.row(i).iter().map(|v| v.abs()).sum();
    }
    if row_sums.iter().any(|v| *v <= 0.0) || p.clone().svd(false, false).rank(1e-9) < q {
        return Err(Error::InvalidInstance(
            "projection matrix must have full row rank so 0 is interior".into(),
        ));
    }
    let radius = row_sums.norm();
    let lipschitz = 2.0 * radius;
    let penalty = 2.0 * radius * radius + 1.0;

    // Q = { x : exists u in [-e, e]^m, x = P u } as a P-representation.
    let rows = 2 * q + 2 * m;
    let mut a = DMatrix::zeros(rows, q);
    let mut bm = DMatrix::zeros(rows, m);
    let mut b = DVector::zeros(rows);
    for i in 0..q {
        a[(i, i)] = 1.0;
        a[(q + i, i)] = -1.0;
        for j in 0..m {
            bm[(i, j)] = -p[(i, j)];
            bm[(q + i, j)] = p[(i, j)];
        }
    }
    for j in 0..m {
        bm[(2 * q + j, j)] = 1.0;
        b[2 * q + j] = -1.0;
        bm[(2 * q + m + j, j)] = -1.0;
        b[2 * q + m + j] = -1.0;
    }
    let q_poly = PPolyhedron::new(a, bm, b)?;
    let q_for_obj = q_poly.clone();
    let g_conj = Objective::new("conjugate of the squared norm over Q", move |y: &DVector<f64>| {
        let mut backend = SimplexBackend::default();
        match neg_conjugate_quadratic(y, &q_for_obj, 1e-7, &mut backend) {
            Ok(v) => -v,
            Err(_) => f64::INFINITY,
        }
    });
    let dc = make_boundary_problem(&q_poly, g_conj, lipschitz, radius, penalty)?;
    Ok((dc, q_poly))
}

/// Evaluates the chain difference `g - h` directly; test/diagnostic helper.
pub fn chain_value(q: usize, x: &DVector<f64>) -> f64 {
    let mut g = (x[0] - 1.0).abs();
    for j in 0..q - 1 {
        g += 200.0 * (x[j].abs() - x[j + 1]).max(0.0);
    }
    g - chain_h(q).eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::eval_epigraph;
    use nalgebra::dvector;

    #[test]
    fn example41_data_shapes() {
        let p = example41();
        assert_eq!(p.vlp.objective_matrix.nrows(), 2);
        assert_eq!(p.vlp.constraints.nrows(), 10);
        assert_eq!(p.vlp.c, dvector![-0.25, 1.0]);
        assert!(p.vlp.cone.is_solid() && p.vlp.cone.is_pointed());
        // Monotonicity spot check along the cone directions inside the
        // relevant region (y1 >= 0, y2 <= 4.5): moving by (-1,0) or (0,1)
        // must not decrease f... it must not increase f's argument ordering:
        // f(y) <= f(y + d) for d in C.
        let f = &p.f;
        for y in [dvector![1.0, 0.5], dvector![0.5, -0.3], dvector![1.1, 2.0]] {
            for d in [dvector![-0.2, 0.0], dvector![0.0, 0.3]] {
                let y2 = &y + &d;
                if y2[0] >= 0.0 && y2[1] <= 4.5 {
                    assert!(f.eval(&y) <= f.eval(&y2) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn chain_minimum_is_zero_at_ones() {
        for q in 2..=5 {
            let e = DVector::from_element(q, 1.0);
            assert_eq!(chain_value(q, &e), 0.0);
            // Any perturbation strictly increases the value.
            let mut x = e.clone();
            x[q - 1] += 0.5;
            assert!(chain_value(q, &x) > 0.0);
            x[0] -= 0.7;
            assert!(chain_value(q, &x) > 0.0);
        }
    }

    #[test]
    fn chain_epigraph_evaluates_g() {
        let mut backend = SimplexBackend::default();
        let epi = chain_g_epigraph(3);
        let g = |x: &DVector<f64>| {
            (x[0] - 1.0).abs()
                + 200.0 * ((x[0].abs() - x[1]).max(0.0) + (x[1].abs() - x[2]).max(0.0))
        };
        for x in [
            dvector![1.0, 1.0, 1.0],
            dvector![0.0, 2.0, -1.0],
            dvector![-3.0, 4.0, 0.5],
        ] {
            let by_epi = eval_epigraph(&epi, &x, &mut backend).unwrap();
            assert!((by_epi - g(&x)).abs() < 1e-7, "g({x:?}) = {by_epi}");
        }
        // Outside the box the function is +inf.
        let v = eval_epigraph(&epi, &dvector![11.0, 0.0, 0.0], &mut backend).unwrap();
        assert_eq!(v, f64::INFINITY);
    }

    #[test]
    fn chain_h_epigraph_evaluates_h() {
        let mut backend = SimplexBackend::default();
        let epi = chain_h_epigraph(3);
        let h = chain_h(3);
        for x in [dvector![1.0, 1.0, 1.0], dvector![-2.0, 0.5, 3.0]] {
            let by_epi = eval_epigraph(&epi, &x, &mut backend).unwrap();
            assert!((by_epi - h.eval(&x)).abs() < 1e-7);
        }
    }

    #[test]
    fn boundary_example_constants() {
        // q = 1, m = 10: row sums of |P| equal 4, so the penalty is 33.
        let (dc, q_poly) = boundary_example(1, 10).unwrap();
        assert_eq!(dc.orientation, DcOrientation::Dual);
        let mut backend = SimplexBackend::default();
        // Q = [-4, 4]: the gauge times the penalty, minus the penalty, is
        // h(4) = 0 on the boundary and h(0) = -33 at the center.
        let h0 = eval_epigraph(&dc.epi, &dvector![0.0], &mut backend).unwrap();
        assert!((h0 + 33.0).abs() < 1e-7, "{h0}");
        let hb = eval_epigraph(&dc.epi, &dvector![4.0], &mut backend).unwrap();
        assert!(hb.abs() < 1e-7, "{hb}");
        // The polytope really is [-4, 4].
        let v = neg_conjugate_quadratic(&dvector![16.0], &q_poly, 1e-9, &mut backend).unwrap();
        // min x^2 - 16 x over [-4,4] = 16 - 64 = -48 at x = 4.
        assert!((v + 48.0).abs() < 1e-6, "{v}");
    }
}
