//! Shrinking outer approximations: an H-representation kept in sync with its
//! vertex set under one-at-a-time half-space cuts.

use nalgebra::DVector;

use super::dd::{classify_rays, homogenize_rows, DdCone, MERGE_TOL};
use super::HPolyhedron;
use crate::error::{Error, Result};

/// Outcome of a cut, for logging and invariant checks.
#[derive(Clone, Debug)]
pub struct CutEffect {
    /// Vertices strictly violating the cut, now removed.
    pub removed_vertices: Vec<DVector<f64>>,
    /// Number of vertices created on the cut hyperplane.
    pub added_vertices: usize,
    /// True when the half-space contained the whole approximation.
    pub degenerate: bool,
}

/// An outer approximation of an upper or lower image: H-representation plus
/// the synchronized vertex set, and the subset of vertices already confirmed
/// to lie in the target image.
///
/// Single-writer: one solver run owns and mutates its approximation.
#[derive(Clone, Debug)]
pub struct OuterApprox {
    pub hrep: HPolyhedron,
    pub vertices: Vec<DVector<f64>>,
    pub directions: Vec<DVector<f64>>,
    /// Vertices confirmed to belong to the target image (the set T).
    /// Never re-initialized; compared at the vertex-merge tolerance.
    pub processed: Vec<DVector<f64>>,
    cone: DdCone,
}

impl OuterApprox {
    /// Bootstraps the vertex set from an H-representation. The polyhedron
    /// must be pointed and nonempty.
    pub fn from_hrep(hrep: HPolyhedron) -> Result<Self> {
        let q = hrep.dim();
        let rows = homogenize_rows(&hrep)?;
        let cone = DdCone::from_rows(q + 1, &rows, MERGE_TOL)
            .map_err(|_| Error::ConeNotPointed)?;
        let mut approx = OuterApprox {
            hrep,
            vertices: Vec::new(),
            directions: Vec::new(),
            processed: Vec::new(),
            cone,
        };
        approx.refresh_views()?;
        Ok(approx)
    }

    fn refresh_views(&mut self) -> Result<()> {
        let q = self.hrep.dim();
        let (points, dirs) = classify_rays(&self.cone.rays, q);
        if points.is_empty() {
            return Err(Error::CutMakesEmpty);
        }
        self.vertices = points;
        self.directions = dirs;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.hrep.dim()
    }

    /// Intersects with `{ y : w^T y >= gamma }`, updating both
    /// representations. Vertices strictly violating the cut are removed and
    /// replaced by the intersections of their incident edges with the cut
    /// hyperplane; a half-space containing the whole approximation only
    /// appends the row.
    pub fn add_halfspace(&mut self, w: &DVector<f64>, gamma: f64) -> Result<CutEffect> {
        if w.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "cut normal has dim {} but approximation has dim {}",
                w.len(),
                self.dim()
            )));
        }
        let before = self.vertices.len();
        let q = self.dim();
        let mut row = DVector::zeros(q + 1);
        for i in 0..q {
            row[i] = w[i];
        }
        row[q] = -gamma;
        let removed_rays = self.cone.insert_row(row);
        self.hrep.push_row(w, gamma);
        let (removed_vertices, _) = classify_rays(&removed_rays, q);
        self.refresh_views()?;
        let degenerate = removed_rays.is_empty();
        let added = (self.vertices.len() + removed_vertices.len()).saturating_sub(before);
        Ok(CutEffect {
            removed_vertices,
            added_vertices: added,
            degenerate,
        })
    }

    pub fn is_processed(&self, v: &DVector<f64>) -> bool {
        self.processed
            .iter()
            .any(|p| (p - v).amax() <= MERGE_TOL)
    }

    pub fn mark_processed(&mut self, v: &DVector<f64>) {
        if !self.is_processed(v) {
            self.processed.push(v.clone());
        }
    }

    /// Vertices not yet confirmed, in insertion order.
    pub fn unprocessed(&self) -> Vec<&DVector<f64>> {
        self.vertices
            .iter()
            .filter(|v| !self.is_processed(v))
            .collect()
    }
}

/// Lexicographically smallest vertex not yet confirmed, cloned out.
pub fn lex_min_unprocessed(approx: &OuterApprox) -> Option<DVector<f64>> {
    lex_min(approx.unprocessed()).cloned()
}

/// Compares two vertex sets up to permutation at the given tolerance.
pub fn same_vertex_set(a: &[DVector<f64>], b: &[DVector<f64>], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.iter().any(|y| (x - y).amax() <= tol))
        && b.iter().all(|x| a.iter().any(|y| (x - y).amax() <= tol))
}

/// Lexicographically smallest vector; deterministic vertex choice for the
/// image solvers.
pub fn lex_min<'a, I>(items: I) -> Option<&'a DVector<f64>>
where
    I: IntoIterator<Item = &'a DVector<f64>>,
{
    items.into_iter().min_by(|a, b| lex_cmp(a, b))
}

pub fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(ord) => return ord,
        }
    }
    std::cmp::Ordering::Equal
}
