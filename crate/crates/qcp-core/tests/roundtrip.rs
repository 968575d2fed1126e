//! Representation round-trip: converting random small H-representations to
//! generalized convex hulls preserves membership, decided for the hull side
//! by a feasibility LP over the convex/conic multipliers.

use nalgebra::{DMatrix, DVector};
use qcp_core::lp::{LinearProgram, LpBackend, LpStatus, RowSense, SimplexBackend};
use qcp_core::polyhedral::{dd_convert, HPolyhedron, VPolyhedron};
use qcp_core::rng::Rng;

/// `y in conv(points) + cone(directions)` via LP feasibility.
fn hull_contains(v: &VPolyhedron, y: &DVector<f64>, backend: &mut SimplexBackend) -> bool {
    let q = y.len();
    let np = v.points.len();
    let nd = v.directions.len();
    let mut a = DMatrix::zeros(q + 1, np + nd);
    for (j, p) in v.points.iter().enumerate() {
        for i in 0..q {
            a[(i, j)] = p[i];
        }
        a[(q, j)] = 1.0;
    }
    for (j, d) in v.directions.iter().enumerate() {
        for i in 0..q {
            a[(i, np + j)] = d[i];
        }
    }
    let mut b = DVector::zeros(q + 1);
    b.rows_mut(0, q).copy_from(y);
    b[q] = 1.0;
    let lp = LinearProgram::new(
        DVector::zeros(np + nd),
        a,
        b,
        vec![RowSense::Eq; q + 1],
        DVector::from_element(np + nd, 0.0),
        DVector::from_element(np + nd, f64::INFINITY),
    )
    .unwrap();
    matches!(backend.solve(&lp).status, LpStatus::Optimal)
}

#[test]
fn random_hreps_round_trip_membership() {
    let mut backend = SimplexBackend::default();
    for seed in 0..8u64 {
        let mut rng = Rng::new(3000 + seed);
        let q = 2 + (seed as usize % 3); // 2, 3, 4
        let m = 4 + (rng.next_u64() % 7) as usize; // 4..10
        // Rows through random offsets from a guaranteed interior anchor.
        let anchor = DVector::from_fn(q, |_, _| rng.uniform_in(-0.5, 0.5));
        let mut normals = DMatrix::zeros(m, q);
        let mut offsets = DVector::zeros(m);
        for i in 0..m {
            let w = DVector::from_fn(q, |_, _| rng.uniform_in(-1.0, 1.0));
            let w = if w.amax() < 0.2 {
                DVector::from_element(q, 0.5)
            } else {
                w
            };
            offsets[i] = w.dot(&anchor) - rng.uniform_in(0.2, 1.5);
            normals.row_mut(i).copy_from(&w.transpose());
        }
        let h = HPolyhedron::new(normals, offsets).unwrap();
        let v = dd_convert(&h).unwrap();
        let mut checked = 0;
        for _ in 0..1000 {
            let y = DVector::from_fn(q, |_, _| rng.uniform_in(-4.0, 4.0));
            // Skip the tolerance band around the boundary where the two
            // decisions legitimately differ at float resolution.
            let slack = (0..h.num_rows())
                .map(|i| h.normals.row(i).transpose().dot(&y) - h.offsets[i])
                .fold(f64::INFINITY, f64::min);
            if slack.abs() <= 1e-6 * (1.0 + y.amax()) {
                continue;
            }
            checked += 1;
            let by_rows = slack > 0.0;
            let by_hull = hull_contains(&v, &y, &mut backend);
            assert_eq!(
                by_rows, by_hull,
                "seed {seed}: y = {y:?} slack {slack:.3e} disagrees"
            );
        }
        assert!(checked > 800, "seed {seed}: too few decidable samples");
    }
}
