//! Full image solvers: primal and dual outer-approximation runs that compute
//! the complete upper image `P[S] + C` and lower image `D[T] - K`, plus the
//! geometric-duality cross-check between the two.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lp::LpBackend;
use crate::polyhedral::{HPolyhedron, OuterApprox};
use crate::scalarize::{
    coupling_phi, dual_cut_row, omega, solve_p1_d1, solve_p2_d2, VlpProblem,
};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Feasibility / sign-test tolerance (`z > tol` decides a cut).
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Record per-iteration vertex snapshots of the outer approximations.
    pub record_approx: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: crate::DEFAULT_TOL,
            max_iterations: 10_000,
            record_approx: false,
        }
    }
}

/// One row of the image-solver iteration log.
#[derive(Clone, Debug)]
pub struct VlpIterRecord {
    pub index: usize,
    pub chosen: Vec<f64>,
    pub lp_status: String,
    /// `z` for the primal run, the sign-test value for the dual run.
    pub measure: f64,
    pub cut_normal: Option<Vec<f64>>,
}

impl VlpIterRecord {
    pub fn csv_header() -> &'static str {
        "iteration,chosen,lp_status,measure,cut_normal"
    }

    pub fn to_csv_row(&self) -> String {
        let fmt = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(";")
        };
        format!(
            "{},{},{},{},{}",
            self.index,
            fmt(&self.chosen),
            self.lp_status,
            self.measure,
            self.cut_normal.as_deref().map(fmt).unwrap_or_default()
        )
    }
}

/// Vertex snapshot of an outer approximation after one iteration, for 2-D
/// plot dumps.
#[derive(Clone, Debug)]
pub struct ApproxSnapshot {
    pub iteration: usize,
    pub side: &'static str,
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default)]
pub struct VlpRunStats {
    pub iterations: usize,
    pub lp_solves: usize,
    pub history: Vec<VlpIterRecord>,
    pub snapshots: Vec<ApproxSnapshot>,
}

/// V- and H-representations of the two images. A primal run fills the primal
/// side, a dual run the dual side; [`ImagePair::combine`] merges runs on the
/// same problem. The lower image always recedes in direction `-e_q`.
#[derive(Clone, Debug)]
pub struct ImagePair {
    pub primal_points: Vec<DVector<f64>>,
    pub primal_dirs: Vec<DVector<f64>>,
    pub dual_points: Vec<DVector<f64>>,
    pub primal_hrep: HPolyhedron,
    pub dual_hrep: HPolyhedron,
    pub c: DVector<f64>,
}

impl ImagePair {
    fn empty_hrep(q: usize) -> HPolyhedron {
        HPolyhedron::new(DMatrix::zeros(0, q), DVector::zeros(0)).expect("empty hrep")
    }

    pub fn combine(primal: ImagePair, dual: ImagePair) -> ImagePair {
        ImagePair {
            primal_points: primal.primal_points,
            primal_dirs: primal.primal_dirs,
            primal_hrep: primal.primal_hrep,
            dual_points: dual.dual_points,
            dual_hrep: dual.dual_hrep,
            c: primal.c,
        }
    }
}

/// Initial outer approximation `O = { y : z_i^T y >= beta_i }` where `beta_i`
/// is the optimal value of the weighted-sum scalarization with weight `z_i`
/// (the i-th inequality normal of the cone). `O` contains the upper image and
/// has recession cone exactly `C`; an unbounded weighted-sum LP proves the
/// C-boundedness assumption violated.
pub fn initial_outer_approx(
    vlp: &VlpProblem,
    backend: &mut dyn LpBackend,
) -> Result<(OuterApprox, usize)> {
    let q = vlp.image_dim();
    let p = vlp.cone.normals.ncols();
    let mut normals = DMatrix::zeros(p, q);
    let mut offsets = DVector::zeros(p);
    for i in 0..p {
        let z_i = vlp.cone.normals.column(i).into_owned();
        let sol = solve_p1_d1(vlp, &z_i, backend).map_err(|e| match e {
            Error::AssumptionViolated(m) => {
                Error::AssumptionViolated(format!("initial approximation row {i}: {m}"))
            }
            other => other,
        })?;
        normals.row_mut(i).copy_from(&z_i.transpose());
        offsets[i] = sol.value;
    }
    let hrep = HPolyhedron::new(normals, offsets)?;
    Ok((OuterApprox::from_hrep(hrep)?, p))
}

/// Computes the upper image by processing every vertex of the shrinking
/// outer approximation: a vertex outside the image yields a supporting cut,
/// a vertex inside is confirmed and never revisited.
pub fn benson_primal(
    vlp: &VlpProblem,
    mut outer: OuterApprox,
    backend: &mut dyn LpBackend,
    opts: &SolveOptions,
) -> Result<(ImagePair, VlpRunStats)> {
    let q = vlp.image_dim();
    let mut stats = VlpRunStats::default();
    loop {
        let t = match crate::polyhedral::lex_min_unprocessed(&outer) {
            Some(t) => t,
            None => break,
        };
        if stats.iterations >= opts.max_iterations {
            return Err(Error::IterationLimit(opts.max_iterations));
        }
        stats.iterations += 1;
        stats.lp_solves += 1;
        let sol = solve_p2_d2(vlp, &t, backend)?;
        let mut rec = VlpIterRecord {
            index: stats.iterations,
            chosen: t.iter().copied().collect(),
            lp_status: "optimal".into(),
            measure: sol.z,
            cut_normal: None,
        };
        if sol.z > opts.tolerance {
            let offset = sol.support_offset(&vlp.rhs);
            rec.cut_normal = Some(sol.w.iter().copied().collect());
            let eff = outer.add_halfspace(&sol.w, offset)?;
            // A vertex surviving its own supporting cut lies on the image
            // boundary at the resolution the enumeration can distinguish;
            // confirm it so the run cannot stall on it.
            if !eff.removed_vertices.iter().any(|rv| (rv - &t).amax() <= 1e-7) {
                outer.mark_processed(&t);
            }
        } else {
            outer.mark_processed(&t);
        }
        stats.history.push(rec);
        if opts.record_approx {
            stats.snapshots.push(ApproxSnapshot {
                iteration: stats.iterations,
                side: "primal",
                vertices: outer.vertices.iter().map(|v| v.iter().copied().collect()).collect(),
            });
        }
    }
    // Extreme directions of the upper image are the cone generators.
    let dirs: Vec<DVector<f64>> = (0..vlp.cone.generators.ncols())
        .map(|j| {
            let g = vlp.cone.generators.column(j).into_owned();
            let n = g.amax();
            if n > 0.0 {
                g / n
            } else {
                g
            }
        })
        .collect();
    let pair = ImagePair {
        primal_points: outer.vertices.clone(),
        primal_dirs: dirs,
        dual_points: Vec::new(),
        primal_hrep: outer.hrep.clone(),
        dual_hrep: ImagePair::empty_hrep(q),
        c: vlp.c.clone(),
    };
    Ok((pair, stats))
}

/// The initial dual constraint region: `{ y* : y^T omega(y*) >= 0 }` for
/// every generator `y` of the cone, as H-representation rows.
pub fn dual_start_rows(vlp: &VlpProblem) -> (DMatrix<f64>, DVector<f64>) {
    let q = vlp.image_dim();
    let o = vlp.cone.generators.ncols();
    let mut normals = DMatrix::zeros(o, q);
    let mut offsets = DVector::zeros(o);
    for j in 0..o {
        let g = vlp.cone.generators.column(j);
        for i in 0..q - 1 {
            normals[(j, i)] = g[i] - g[q - 1] * vlp.c[i];
        }
        offsets[j] = -g[q - 1];
    }
    (normals, offsets)
}

/// Outer-approximation state for the lower image. The start region has no
/// vertices; the first cut always fires (the initial reference has last
/// coordinate treated as +infinity) and creates the first vertex, after
/// which updates are incremental.
pub(crate) struct DualState {
    hrep: HPolyhedron,
    approx: Option<OuterApprox>,
}

impl DualState {
    pub(crate) fn new(vlp: &VlpProblem) -> Result<Self> {
        let (normals, offsets) = dual_start_rows(vlp);
        Ok(DualState {
            hrep: HPolyhedron::new(normals, offsets)?,
            approx: None,
        })
    }

    /// Applies the supporting cut for an image point; returns the removed
    /// lower-image vertices (empty on the bootstrap cut).
    pub(crate) fn cut(
        &mut self,
        image_point: &DVector<f64>,
        c: &DVector<f64>,
    ) -> Result<Vec<DVector<f64>>> {
        let (normal, offset) = dual_cut_row(image_point, c);
        self.hrep.push_row(&normal, offset);
        match &mut self.approx {
            Some(a) => Ok(a.add_halfspace(&normal, offset)?.removed_vertices),
            None => {
                self.approx = Some(OuterApprox::from_hrep(self.hrep.clone())?);
                Ok(Vec::new())
            }
        }
    }

    pub(crate) fn approx_ref(&self) -> &OuterApprox {
        self.approx.as_ref().expect("first iteration always cuts")
    }

    pub(crate) fn approx_mut(&mut self) -> &mut OuterApprox {
        self.approx.as_mut().expect("first iteration always cuts")
    }
}

/// Computes the lower image with the dual outer-approximation run.
pub fn benson_dual(
    vlp: &VlpProblem,
    backend: &mut dyn LpBackend,
    opts: &SolveOptions,
) -> Result<(ImagePair, VlpRunStats)> {
    let q = vlp.image_dim();
    let mut stats = VlpRunStats::default();
    let mut dual = DualState::new(vlp)?;

    // Start reference: normalized sum of the cone inequality normals with
    // the last coordinate treated as +infinity so the first pass always cuts.
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

    loop {
        if stats.iterations >= opts.max_iterations {
            return Err(Error::IterationLimit(opts.max_iterations));
        }
        stats.iterations += 1;
        stats.lp_solves += 1;
        let w = omega(&t_star, &vlp.c);
        let sol = solve_p1_d1(vlp, &w, backend)?;
        let image_point = vlp.image(&sol.x);
        let sign_value = t_star[q - 1] - sol.value;
        let mut rec = VlpIterRecord {
            index: stats.iterations,
            chosen: t_star.iter().copied().collect(),
            lp_status: "optimal".into(),
            measure: sign_value,
            cut_normal: None,
        };
        if sign_value > opts.tolerance {
            rec.cut_normal = Some(dual_cut_row(&image_point, &vlp.c).0.iter().copied().collect());
            let removed = dual.cut(&image_point, &vlp.c)?;
            // Same stall guard as on the primal side; skip the start
            // reference whose last coordinate is the +infinity sentinel.
            if t_star[q - 1].is_finite()
                && !removed.iter().any(|rv| (rv - &t_star).amax() <= 1e-7)
            {
                dual.approx_mut().mark_processed(&t_star);
            }
        } else {
            dual.approx_mut().mark_processed(&t_star);
        }
        stats.history.push(rec);
        let approx = dual.approx_ref();
        if opts.record_approx {
            stats.snapshots.push(ApproxSnapshot {
                iteration: stats.iterations,
                side: "dual",
                vertices: approx.vertices.iter().map(|v| v.iter().copied().collect()).collect(),
            });
        }
        match crate::polyhedral::lex_min_unprocessed(approx) {
            Some(v) => t_star = v,
            None => break,
        }
    }

    let approx = dual.approx_ref();
    let pair = ImagePair {
        primal_points: Vec::new(),
        primal_dirs: Vec::new(),
        dual_points: approx.vertices.clone(),
        primal_hrep: ImagePair::empty_hrep(q),
        dual_hrep: approx.hrep.clone(),
        c: vlp.c.clone(),
    };
    Ok((pair, stats))
}

/// A facet of a polyhedron given by H-representation plus vertex/direction
/// sets: the set of tight vertices and directions spanning dimension `q-1`.
#[derive(Clone, Debug)]
pub struct Facet {
    pub normal: DVector<f64>,
    pub vertex_ids: Vec<usize>,
    pub direction_ids: Vec<usize>,
}

/// Extracts the facets supported by the rows of `hrep`, merging rows that
/// support the same face. Redundant rows (tight face of lower dimension) are
/// dropped.
pub fn facets_of(
    hrep: &HPolyhedron,
    vertices: &[DVector<f64>],
    directions: &[DVector<f64>],
    tol: f64,
) -> Vec<Facet> {
    let q = hrep.dim();
    let mut seen: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut out = Vec::new();
    for r in 0..hrep.num_rows() {
        let normal = hrep.normals.row(r).transpose().into_owned();
        let scale = normal.amax().max(1.0);
        let offset = hrep.offsets[r];
        let vertex_ids: Vec<usize> = vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| {
                let vs = scale * (1.0 + v.amax());
                (normal.dot(v) - offset).abs() <= tol * vs
            })
            .map(|(i, _)| i)
            .collect();
        let direction_ids: Vec<usize> = directions
            .iter()
            .enumerate()
            .filter(|(_, d)| normal.dot(d).abs() <= tol * scale)
            .map(|(i, _)| i)
            .collect();
        if vertex_ids.is_empty() {
            continue;
        }
        // Dimension of the tight face.
        let base = &vertices[vertex_ids[0]];
        let mut spanning: Vec<DVector<f64>> = vertex_ids[1..]
            .iter()
            .map(|&i| &vertices[i] - base)
            .collect();
        spanning.extend(direction_ids.iter().map(|&i| directions[i].clone()));
        let dim = if spanning.is_empty() {
            0
        } else {
            let mut m = DMatrix::zeros(spanning.len(), q);
            for (i, s) in spanning.iter().enumerate() {
                let n = s.amax();
                m.row_mut(i).copy_from(&(s / n.max(1e-30)).transpose());
            }
            m.svd(false, false).rank(1e-7)
        };
        if dim != q - 1 {
            continue;
        }
        let key = (vertex_ids.clone(), direction_ids.clone());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        out.push(Facet {
            normal,
            vertex_ids,
            direction_ids,
        });
    }
    out
}

/// Result of the geometric-duality cross-check between a completed primal
/// and dual run on the same problem.
#[derive(Clone, Debug)]
pub struct DualityReport {
    pub primal_vertices: usize,
    pub primal_facets: usize,
    pub dual_vertices: usize,
    pub dual_nonvertical_facets: usize,
    pub dual_vertical_facets: usize,
    /// Worst incidence residual over matched vertex/facet pairs (q = 2 only).
    pub incidence_residual: f64,
    pub mismatches: Vec<String>,
}

impl DualityReport {
    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn ok(self) -> Result<Self> {
        if self.is_ok() {
            Ok(self)
        } else {
            Err(Error::AssumptionViolated(format!(
                "geometric duality mismatch: {}",
                self.mismatches.join("; ")
            )))
        }
    }
}

/// Checks the inclusion-reversing vertex/facet correspondence between the
/// images: vertices of the upper image match non-vertical facets of the
/// lower image, facets of the upper image match vertices of the lower image,
/// and (for planar images) each matched pair satisfies the coupling
/// incidence `phi(y, y*) = 0`.
pub fn geometric_duality_check(images: &ImagePair) -> DualityReport {
    let q = images.c.len();
    let tol = 1e-6;
    let mut mismatches = Vec::new();

    let primal_facets = facets_of(
        &images.primal_hrep,
        &images.primal_points,
        &images.primal_dirs,
        tol,
    );
    let minus_k: Vec<DVector<f64>> = vec![{
        let mut d = DVector::zeros(q);
        d[q - 1] = -1.0;
        d
    }];
    let dual_facets = facets_of(&images.dual_hrep, &images.dual_points, &minus_k, tol);
    // A facet of the lower image is vertical when its normal has zero last
    // component; cut rows carry -1 there.
    let vertical = |f: &Facet| f.normal[q - 1].abs() <= 1e-9 * f.normal.amax().max(1.0);
    let dual_vertical = dual_facets.iter().filter(|f| vertical(f)).count();
    let dual_nonvertical = dual_facets.len() - dual_vertical;

    if images.primal_points.len() != dual_nonvertical {
        mismatches.push(format!(
            "{} upper-image vertices vs {} non-vertical lower-image facets",
            images.primal_points.len(),
            dual_nonvertical
        ));
    }
    // Every vertex of the lower image is maximal along e_q (the image recedes
    // only downward), so the facet count of the upper image must match the
    // full dual vertex count.
    if primal_facets.len() != images.dual_points.len() {
        mismatches.push(format!(
            "{} upper-image facets vs {} lower-image vertices",
            primal_facets.len(),
            images.dual_points.len()
        ));
    }

    let mut residual: f64 = 0.0;
    if q == 2 {
        for (i, y) in images.primal_points.iter().enumerate() {
            let mut phis: Vec<f64> = images
                .dual_points
                .iter()
                .map(|u| coupling_phi(y, u, &images.c).abs())
                .collect();
            phis.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if phis.len() < 2 || phis[1] > tol {
                mismatches.push(format!(
                    "upper-image vertex {i} is not incident to a full lower-image facet"
                ));
            }
            if let Some(r) = phis.get(1) {
                residual = residual.max(*r);
            }
        }
        for (j, u) in images.dual_points.iter().enumerate() {
            let best = images
                .primal_points
                .iter()
                .map(|y| coupling_phi(y, u, &images.c).abs())
                .fold(f64::INFINITY, f64::min);
            if best > tol {
                mismatches.push(format!(
                    "lower-image vertex {j} supports no upper-image vertex"
                ));
            }
            residual = residual.max(best.min(1.0));
        }
    }

    DualityReport {
        primal_vertices: images.primal_points.len(),
        primal_facets: primal_facets.len(),
        dual_vertices: images.dual_points.len(),
        dual_nonvertical_facets: dual_nonvertical,
        dual_vertical_facets: dual_vertical,
        incidence_residual: residual,
        mismatches,
    }
}
