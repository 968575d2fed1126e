//! Double description over the homogenization cone.
//!
//! A polyhedron `{ y in R^q : N y >= o }` is handled as the pointed part of
//! its homogenization cone `{ (y,t) : N y - o t >= 0, t >= 0 }` in dimension
//! `q+1`. Extreme rays with positive last coordinate are vertices, rays with
//! zero last coordinate are directions, and any lineality is split off first
//! so the double description step always works on a pointed cone.
//!
//! Rays are kept in insertion order and new rays of a cut are produced from
//! adjacent (positive, negative) pairs, with adjacency decided by the rank of
//! the constraints tight at both rays.

use nalgebra::{DMatrix, DVector};

use super::{HPolyhedron, PolyCone, VPolyhedron};
use crate::error::{Error, Result};

/// Rank threshold for tightness and pivoting inside the enumeration.
const RANK_TOL: f64 = 1e-9;
/// A homogenized ray is a direction when its last coordinate is below this.
const VERTEX_T_TOL: f64 = 1e-9;
/// Vertices closer than this in infinity norm are merged.
pub(crate) const MERGE_TOL: f64 = 1e-7;

/// Pointed-cone double description state in working dimension `dim`.
#[derive(Clone, Debug)]
pub(crate) struct DdCone {
    pub dim: usize,
    /// All inequality rows inserted so far, normalized to unit infinity norm.
    pub rows: Vec<DVector<f64>>,
    /// Extreme rays, normalized to unit infinity norm, insertion-ordered.
    pub rays: Vec<DVector<f64>>,
    pub tol: f64,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn normalize_ray(mut r: DVector<f64>) -> DVector<f64> {
    let n = inf_norm(&r);
    if n > 0.0 {
        r /= n;
    }
    r
}

/// Rank of the given rows by Gaussian elimination with partial pivoting,
/// on one flat row-major scratch buffer.
fn rank_of(rows: &[&DVector<f64>], dim: usize) -> usize {
    let k = rows.len();
    let mut m: Vec<f64> = Vec::with_capacity(k * dim);
    for r in rows {
        m.extend(r.iter());
    }
    let mut rank = 0;
    for col in 0..dim {
        let mut best = rank;
        let mut best_val = 0.0;
        for i in rank..k {
            let v = m[i * dim + col].abs();
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        if best_val <= RANK_TOL {
            continue;
        }
        if best != rank {
            for c in 0..dim {
                m.swap(rank * dim + c, best * dim + c);
            }
        }
        let pivot = m[rank * dim + col];
        for i in rank + 1..k {
            let f = m[i * dim + col] / pivot;
            if f != 0.0 {
                for c in col..dim {
                    m[i * dim + c] -= f * m[rank * dim + c];
                }
            }
        }
        rank += 1;
        if rank == k {
            break;
        }
    }
    rank
}

impl DdCone {
    /// Simplicial start: `dim` independent rows define the initial cone whose
    /// extreme rays are the columns of the inverse of the chosen submatrix.
    /// Remaining rows are inserted one by one.
    pub fn from_rows(dim: usize, rows: &[DVector<f64>], tol: f64) -> Result<Self> {
        let normalized: Vec<DVector<f64>> = rows.iter().cloned().map(normalize_ray).collect();
        let mut chosen: Vec<usize> = Vec::new();
        for (i, _) in normalized.iter().enumerate() {
            if chosen.len() == dim {
                break;
            }
            let mut trial: Vec<&DVector<f64>> = chosen.iter().map(|&j| &normalized[j]).collect();
            trial.push(&normalized[i]);
            if rank_of(&trial, dim) == trial.len() {
                chosen.push(i);
            }
        }
        if chosen.len() < dim {
            return Err(Error::Dimension(
                "row system does not have full rank for a pointed start".into(),
            ));
        }
        let mut base = DMatrix::zeros(dim, dim);
        for (k, &j) in chosen.iter().enumerate() {
            base.row_mut(k).copy_from(&normalized[j].transpose());
        }
        let inv = base
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Dimension("singular start basis".into()))?;
        let rays: Vec<DVector<f64>> = (0..dim)
            .map(|j| normalize_ray(inv.column(j).into_owned()))
            .collect();
        let mut cone = DdCone {
            dim,
            rows: chosen.iter().map(|&j| normalized[j].clone()).collect(),
            rays,
            tol,
        };
        for (i, row) in normalized.iter().enumerate() {
            if !chosen.contains(&i) {
                cone.insert_row(row.clone());
            }
        }
        Ok(cone)
    }

    /// Cuts the cone with `row^T x >= 0` and updates the extreme rays.
    /// Returns the rays removed by the cut.
    pub fn insert_row(&mut self, row: DVector<f64>) -> Vec<DVector<f64>> {
        let row = normalize_ray(row);
        if inf_norm(&row) == 0.0 {
            return Vec::new();
        }
        let vals: Vec<f64> = self.rays.iter().map(|r| row.dot(r)).collect();
        let mut pos: Vec<usize> = Vec::new();
        let mut neg: Vec<usize> = Vec::new();
        for (i, &v) in vals.iter().enumerate() {
            if v > self.tol {
                pos.push(i);
            } else if v < -self.tol {
                neg.push(i);
            }
        }
        if neg.is_empty() {
            self.rows.push(row);
            return Vec::new();
        }
        // Tight-row bitsets per ray make the pairwise adjacency filter cheap.
        let words = self.rows.len().div_ceil(64);
        let mask_of = |ray: &DVector<f64>| -> Vec<u64> {
            let mut mask = vec![0u64; words];
            for (k, r) in self.rows.iter().enumerate() {
                if r.dot(ray).abs() <= self.tol {
                    mask[k / 64] |= 1 << (k % 64);
                }
            }
            mask
        };
        let pos_masks: Vec<Vec<u64>> = pos.iter().map(|&i| mask_of(&self.rays[i])).collect();
        let neg_masks: Vec<Vec<u64>> = neg.iter().map(|&i| mask_of(&self.rays[i])).collect();
        let mut fresh: Vec<DVector<f64>> = Vec::new();
        let mut common_rows: Vec<&DVector<f64>> = Vec::new();
        for (pi, &p) in pos.iter().enumerate() {
            for (ni, &n) in neg.iter().enumerate() {
                if self.dim < 2 {
                    continue;
                }
                let mut count = 0usize;
                for w in 0..words {
                    count += (pos_masks[pi][w] & neg_masks[ni][w]).count_ones() as usize;
                }
                if count < self.dim - 2 {
                    continue;
                }
                common_rows.clear();
                for (k, r) in self.rows.iter().enumerate() {
                    if pos_masks[pi][k / 64] & neg_masks[ni][k / 64] & (1 << (k % 64)) != 0 {
                        common_rows.push(r);
                    }
                }
                if rank_of(&common_rows, self.dim) != self.dim - 2 {
                    continue;
                }
                let raw = normalize_ray(&self.rays[n] * vals[p] - &self.rays[p] * vals[n]);
                // The common tight rows plus the cut row have rank exactly
                // dim-1 (the cut is strictly signed on the pair), so the new
                // ray is the unique null direction: snapping to it keeps
                // vertex positions exact where the combination formula
                // cancels.
                let combo = snap_to_null(&common_rows, &row, raw);
                if fresh.iter().any(|r| inf_norm(&(r - &combo)) <= MERGE_TOL) {
                    continue;
                }
                fresh.push(combo);
            }
        }
        let removed: Vec<DVector<f64>> = neg.iter().map(|&i| self.rays[i].clone()).collect();
        let mut kept: Vec<DVector<f64>> = Vec::new();
        for (i, r) in self.rays.drain(..).enumerate() {
            if vals[i] >= -self.tol {
                kept.push(r);
            }
        }
        for f in fresh {
            if !kept.iter().any(|r| inf_norm(&(r - &f)) <= MERGE_TOL) {
                kept.push(f);
            }
        }
        self.rays = kept;
        self.rows.push(row);
        removed
    }
}

/// Unique null direction of `rows + [cut]`, sign-matched and falling back to
/// `raw` when the numerical rank disagrees with the construction.
fn snap_to_null(rows: &[&DVector<f64>], cut: &DVector<f64>, raw: DVector<f64>) -> DVector<f64> {
    let dim = raw.len();
    let k = rows.len() + 1;
    let mut m = DMatrix::zeros(k.max(dim), dim);
    for (i, r) in rows.iter().enumerate() {
        m.row_mut(i).copy_from(&r.transpose());
    }
    m.row_mut(rows.len()).copy_from(&cut.transpose());
    let svd = m.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("svd computes v_t");
    let sv = &svd.singular_values;
    if sv[dim - 2] <= 1e-9 {
        return raw;
    }
    let mut refined = v_t.row(dim - 1).transpose();
    if refined.dot(&raw) < 0.0 {
        refined = -refined;
    }
    let refined = normalize_ray(refined);
    if inf_norm(&(&refined - &raw)) > 1e-3 {
        return raw;
    }
    refined
}

/// Homogenized rows `(normal_i, -offset_i)` plus the `t >= 0` row,
/// all in dimension `q + 1`. Near-zero rows are dropped when vacuous and
/// rejected when contradictory.
pub(crate) fn homogenize_rows(h: &HPolyhedron) -> Result<Vec<DVector<f64>>> {
    let q = h.dim();
    let mut rows = Vec::with_capacity(h.num_rows() + 1);
    for i in 0..h.num_rows() {
        let mut r = DVector::zeros(q + 1);
        for j in 0..q {
            r[j] = h.normals[(i, j)];
        }
        r[q] = -h.offsets[i];
        if inf_norm(&r) <= 1e-12 {
            continue;
        }
        let scale: f64 = h.normals.row(i).iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if scale <= 1e-12 {
            // 0^T y >= offset: vacuous when offset <= 0, contradictory otherwise.
            if h.offsets[i] > 1e-12 {
                return Err(Error::EmptyPolyhedron);
            }
            continue;
        }
        rows.push(r);
    }
    let mut t_row = DVector::zeros(q + 1);
    t_row[q] = 1.0;
    rows.push(t_row);
    Ok(rows)
}

/// Splits homogenized rays into normalized vertices and directions.
pub(crate) fn classify_rays(rays: &[DVector<f64>], q: usize) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let mut points = Vec::new();
    let mut dirs = Vec::new();
    for r in rays {
        let t = r[q];
        if t > VERTEX_T_TOL {
            let v = DVector::from_fn(q, |i, _| r[i] / t);
            if !points
                .iter()
                .any(|p: &DVector<f64>| inf_norm(&(p - &v)) <= MERGE_TOL)
            {
                points.push(v);
            }
        } else {
            let d = normalize_ray(DVector::from_fn(q, |i, _| r[i]));
            if inf_norm(&d) == 0.0 {
                continue;
            }
            if !dirs
                .iter()
                .any(|e: &DVector<f64>| inf_norm(&(e - &d)) <= MERGE_TOL)
            {
                dirs.push(d);
            }
        }
    }
    (points, dirs)
}

/// Full enumeration result, including lineality handling: the pointed part is
/// enumerated in the row space and lineality basis vectors are emitted as
/// paired directions.
pub(crate) fn enumerate_cone(dim: usize, rows: &[DVector<f64>], tol: f64) -> Result<Vec<DVector<f64>>> {
    let k = rows.len();
    // Zero-padding to at least `dim` rows makes the thin SVD return the full
    // right factor, so the kernel rows below the rank are available.
    let mut m = DMatrix::zeros(k.max(dim), dim);
    for (i, r) in rows.iter().enumerate() {
        m.row_mut(i).copy_from(&normalize_ray(r.clone()).transpose());
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("svd computes v_t");
    let rank = svd.singular_values.iter().filter(|s| **s > RANK_TOL).count();
    if rank == dim {
        return Ok(DdCone::from_rows(dim, rows, tol)?.rays);
    }
    // Lineality: kernel basis vectors, emitted in both orientations.
    let mut out: Vec<DVector<f64>> = Vec::new();
    for i in rank..dim {
        let b = normalize_ray(v_t.row(i).transpose());
        out.push(b.clone());
        out.push(-b);
    }
    if rank == 0 {
        return Ok(out);
    }
    // Pointed part in row-space coordinates.
    let basis = v_t.rows(0, rank).transpose(); // dim x rank
    let projected: Vec<DVector<f64>> = rows
        .iter()
        .map(|r| basis.transpose() * r)
        .collect();
    let cone = DdCone::from_rows(rank, &projected, tol)?;
    for z in &cone.rays {
        out.push(normalize_ray(&basis * z));
    }
    Ok(out)
}

/// Converts an H-representation to a V-representation.
///
/// Used to bootstrap initial outer approximations; all later updates go
/// through [`super::OuterApprox::add_halfspace`].
pub fn dd_convert(h: &HPolyhedron) -> Result<VPolyhedron> {
    let q = h.dim();
    let rows = homogenize_rows(h)?;
    let rays = enumerate_cone(q + 1, &rows, MERGE_TOL)?;
    let (points, directions) = classify_rays(&rays, q);
    if points.is_empty() {
        return Err(Error::EmptyPolyhedron);
    }
    Ok(VPolyhedron { points, directions })
}

/// Recession cone `{ y : normals * y >= 0 }` of a nonempty H-polyhedron, with
/// generators recovered by enumeration.
pub fn recession_cone(h: &HPolyhedron) -> Result<PolyCone> {
    let q = h.dim();
    let mut rows: Vec<DVector<f64>> = Vec::new();
    for i in 0..h.num_rows() {
        let r = h.normals.row(i).transpose();
        if inf_norm(&r) > 1e-12 {
            rows.push(normalize_ray(r));
        }
    }
    let rays = if rows.is_empty() {
        // Whole space.
        let mut out = Vec::new();
        for i in 0..q {
            let mut e = DVector::zeros(q);
            e[i] = 1.0;
            out.push(e.clone());
            out.push(-e);
        }
        out
    } else {
        enumerate_cone(q, &rows, MERGE_TOL)?
    };
    let gens: Vec<DVector<f64>> = rays
        .into_iter()
        .filter(|r| inf_norm(r) > 1e-12)
        .collect();
    let mut y = DMatrix::zeros(q, gens.len());
    for (j, g) in gens.iter().enumerate() {
        y.column_mut(j).copy_from(g);
    }
    let mut z = DMatrix::zeros(q, h.num_rows());
    for i in 0..h.num_rows() {
        z.column_mut(i).copy_from(&h.normals.row(i).transpose());
    }
    PolyCone::new(y, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn hrep(normals: DMatrix<f64>, offsets: DVector<f64>) -> HPolyhedron {
        HPolyhedron::new(normals, offsets).unwrap()
    }

    fn has_point(v: &VPolyhedron, p: &[f64]) -> bool {
        v.points
            .iter()
            .any(|x| x.iter().zip(p).all(|(a, b)| (a - b).abs() < 1e-7))
    }

    fn has_dir(dirs: &[DVector<f64>], d: &[f64]) -> bool {
        dirs.iter()
            .any(|x| x.iter().zip(d).all(|(a, b)| (a - b).abs() < 1e-7))
    }

    #[test]
    fn quadrant_shifted() {
        // {y >= 0, y1 + y2 >= 1} -> points (1,0),(0,1), directions e1,e2
        let h = hrep(
            dmatrix![1.0, 0.0; 0.0, 1.0; 1.0, 1.0],
            dvector![0.0, 0.0, 1.0],
        );
        let v = dd_convert(&h).unwrap();
        assert_eq!(v.points.len(), 2);
        assert!(has_point(&v, &[1.0, 0.0]));
        assert!(has_point(&v, &[0.0, 1.0]));
        assert_eq!(v.directions.len(), 2);
        assert!(has_dir(&v.directions, &[1.0, 0.0]));
        assert!(has_dir(&v.directions, &[0.0, 1.0]));
    }

    #[test]
    fn box_has_four_vertices() {
        let h = hrep(
            dmatrix![1.0, 0.0; -1.0, 0.0; 0.0, 1.0; 0.0, -1.0],
            dvector![-1.0, -1.0, -1.0, -1.0],
        );
        let v = dd_convert(&h).unwrap();
        assert_eq!(v.points.len(), 4);
        assert!(v.directions.is_empty());
        for p in &[[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]] {
            assert!(has_point(&v, p));
        }
    }

    #[test]
    fn weight_strip_after_first_cut() {
        // Dual-side start for C = R^2_+, c = (1,1): the strip 0 <= y1 <= 1
        // cut by y2 <= 0 has vertices (0,0), (1,0) and direction (0,-1).
        let h = hrep(
            dmatrix![1.0, 0.0; -1.0, 0.0; 0.0, -1.0],
            dvector![0.0, -1.0, 0.0],
        );
        let v = dd_convert(&h).unwrap();
        assert_eq!(v.points.len(), 2);
        assert!(has_point(&v, &[0.0, 0.0]));
        assert!(has_point(&v, &[1.0, 0.0]));
        assert_eq!(v.directions.len(), 1);
        assert!(has_dir(&v.directions, &[0.0, -1.0]));
    }

    #[test]
    fn empty_polyhedron_detected() {
        let h = hrep(dmatrix![1.0; -1.0], dvector![1.0, 0.0]); // y >= 1 and y <= 0
        assert_eq!(dd_convert(&h), Err(Error::EmptyPolyhedron));
    }

    #[test]
    fn single_point_polyhedron() {
        let h = hrep(dmatrix![1.0; -1.0], dvector![1.0, -1.0]); // y = 1
        let v = dd_convert(&h).unwrap();
        assert_eq!(v.points.len(), 1);
        assert!(has_point(&v, &[1.0]));
        assert!(v.directions.is_empty());
    }

    #[test]
    fn recession_of_box_is_origin() {
        let h = hrep(
            dmatrix![1.0, 0.0; -1.0, 0.0; 0.0, 1.0; 0.0, -1.0],
            dvector![-1.0, -1.0, -1.0, -1.0],
        );
        let c = recession_cone(&h).unwrap();
        assert_eq!(c.generators.ncols(), 0);
    }

    #[test]
    fn recession_matches_ordering_cone() {
        // {y2 >= -0.3444, -y1 >= -1.177}: cone generated by (-1,0) and (0,1).
        let h = hrep(dmatrix![0.0, 1.0; -1.0, 0.0], dvector![-0.3444, -1.177]);
        let c = recession_cone(&h).unwrap();
        assert_eq!(c.generators.ncols(), 2);
        let gens: Vec<Vec<f64>> = (0..2).map(|j| c.generators.column(j).iter().copied().collect()).collect();
        assert!(gens.contains(&vec![-1.0, 0.0]));
        assert!(gens.contains(&vec![0.0, 1.0]));
    }

    #[test]
    fn recession_of_halfspace_is_itself() {
        let h = hrep(dmatrix![1.0, 0.0], dvector![0.0]);
        let c = recession_cone(&h).unwrap();
        // Generated by e1 together with the lineality pair +-e2.
        assert!(c.contains(&dvector![1.0, 0.0], 1e-9));
        assert!(c.contains(&dvector![0.5, 7.0], 1e-9));
        assert!(c.contains(&dvector![0.5, -7.0], 1e-9));
        assert!(!c.contains(&dvector![-1.0, 0.0], 1e-9));
        let gens: Vec<DVector<f64>> = (0..c.generators.ncols())
            .map(|j| c.generators.column(j).into_owned())
            .collect();
        assert!(has_dir(&gens, &[0.0, 1.0]));
        assert!(has_dir(&gens, &[0.0, -1.0]));
    }
}
