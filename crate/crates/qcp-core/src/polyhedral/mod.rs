//! Polyhedron and polyhedral-cone representations, conversions among them,
//! and incremental vertex enumeration under half-space cuts.
//!
//! Three representations are supported: inequalities (H), generalized convex
//! hulls of points and directions (V), and projections of higher-dimensional
//! H-polyhedra (P). Conversion H -> V runs a double description pass over the
//! homogenization cone; once an [`OuterApprox`] is bootstrapped this way, all
//! later updates go through the incremental [`OuterApprox::add_halfspace`].

mod cone;
mod dd;
mod outer;

pub use cone::{cone_interior_point, positive_dual, PolyCone};
pub use dd::{dd_convert, recession_cone};
pub use outer::{lex_cmp, lex_min, lex_min_unprocessed, same_vertex_set, CutEffect, OuterApprox};

use nalgebra::{DMatrix, DVector};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// `{ y : normals * y >= offsets }`.
#[derive(Clone, Debug, PartialEq)]
pub struct HPolyhedron {
    pub normals: DMatrix<f64>,
    pub offsets: DVector<f64>,
}

impl HPolyhedron {
    pub fn new(normals: DMatrix<f64>, offsets: DVector<f64>) -> Result<Self> {
        if normals.nrows() != offsets.len() {
            return Err(Error::Dimension(format!(
                "{} normal rows vs {} offsets",
                normals.nrows(),
                offsets.len()
            )));
        }
        if normals.ncols() == 0 {
            return Err(Error::Dimension("ambient dimension must be >= 1".into()));
        }
        if normals.iter().any(|v| !v.is_finite()) || offsets.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dimension("non-finite entry in H-representation".into()));
        }
        Ok(HPolyhedron { normals, offsets })
    }

    pub fn dim(&self) -> usize {
        self.normals.ncols()
    }

    pub fn num_rows(&self) -> usize {
        self.normals.nrows()
    }

    pub fn contains(&self, y: &DVector<f64>, tol: f64) -> bool {
        (0..self.num_rows()).all(|i| self.normals.row(i).transpose().dot(y) >= self.offsets[i] - tol)
    }

    /// Appends the row `w^T y >= gamma`.
    pub fn push_row(&mut self, w: &DVector<f64>, gamma: f64) {
        let m = self.num_rows();
        let q = self.dim();
        let mut normals = DMatrix::zeros(m + 1, q);
        normals.view_mut((0, 0), (m, q)).copy_from(&self.normals);
        normals.row_mut(m).copy_from(&w.transpose());
        let mut offsets = DVector::zeros(m + 1);
        offsets.view_mut((0, 0), (m, 1)).copy_from(&self.offsets);
        offsets[m] = gamma;
        self.normals = normals;
        self.offsets = offsets;
    }
}

/// Generalized convex hull `conv(points) + cone(directions)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VPolyhedron {
    pub points: Vec<DVector<f64>>,
    pub directions: Vec<DVector<f64>>,
}

impl VPolyhedron {
    pub fn dim(&self) -> usize {
        self.points.first().map(|p| p.len()).unwrap_or(0)
    }

    /// Membership in `conv(points) + cone(directions)` decided by a small LP
    /// solved with dense Gaussian steps is overkill here; instead this tests
    /// the defining property through the support function on sampled normals
    /// only in test code. Runtime code never needs V-membership.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `{ x : exists u, A x + B u >= b }`.
#[derive(Clone, Debug, PartialEq)]
pub struct PPolyhedron {
    pub a: DMatrix<f64>,
    pub b_mat: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl PPolyhedron {
    pub fn new(a: DMatrix<f64>, b_mat: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != b_mat.nrows() || a.nrows() != b.len() {
            return Err(Error::Dimension(format!(
                "P-representation rows disagree: A {}x{}, B {}x{}, b {}",
                a.nrows(),
                a.ncols(),
                b_mat.nrows(),
                b_mat.ncols(),
                b.len()
            )));
        }
        Ok(PPolyhedron { a, b_mat, b })
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn aux_dim(&self) -> usize {
        self.b_mat.ncols()
    }
}

fn mat_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn rows_to_mat(rows: &[Vec<f64>], what: &str) -> std::result::Result<DMatrix<f64>, String> {
    if rows.is_empty() {
        return Ok(DMatrix::zeros(0, 0));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(format!("ragged rows in {what}"));
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.iter().flatten().copied(),
    ))
}

fn vecs(points: &[DVector<f64>]) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.iter().copied().collect()).collect()
}

impl Serialize for HPolyhedron {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("HPolyhedron", 2)?;
        st.serialize_field("normals", &mat_to_rows(&self.normals))?;
        st.serialize_field("offsets", &self.offsets.iter().copied().collect::<Vec<_>>())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for HPolyhedron {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            normals: Vec<Vec<f64>>,
            offsets: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        let normals = rows_to_mat(&raw.normals, "normals").map_err(serde::de::Error::custom)?;
        HPolyhedron::new(normals, DVector::from_vec(raw.offsets))
            .map_err(|e| serde::de::Error::custom(e.to_string()))
    }
}

impl Serialize for VPolyhedron {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("VPolyhedron", 2)?;
        st.serialize_field("points", &vecs(&self.points))?;
        st.serialize_field("directions", &vecs(&self.directions))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for VPolyhedron {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            points: Vec<Vec<f64>>,
            directions: Vec<Vec<f64>>,
        }
        let raw = Raw::deserialize(d)?;
        Ok(VPolyhedron {
            points: raw.points.into_iter().map(DVector::from_vec).collect(),
            directions: raw.directions.into_iter().map(DVector::from_vec).collect(),
        })
    }
}

impl Serialize for PPolyhedron {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PPolyhedron", 3)?;
        st.serialize_field("A", &mat_to_rows(&self.a))?;
        st.serialize_field("B", &mat_to_rows(&self.b_mat))?;
        st.serialize_field("b", &self.b.iter().copied().collect::<Vec<_>>())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PPolyhedron {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "A")]
            a: Vec<Vec<f64>>,
            #[serde(rename = "B")]
            b_mat: Vec<Vec<f64>>,
            b: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        let m = raw.a.len();
        let a = rows_to_mat(&raw.a, "A").map_err(serde::de::Error::custom)?;
        let mut b_mat = rows_to_mat(&raw.b_mat, "B").map_err(serde::de::Error::custom)?;
        if b_mat.nrows() == 0 && m > 0 {
            b_mat = DMatrix::zeros(m, 0);
        }
        PPolyhedron::new(a, b_mat, DVector::from_vec(raw.b))
            .map_err(|e| serde::de::Error::custom(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hrep_json_field_names() {
        let h = HPolyhedron::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            DVector::from_vec(vec![0.0, -1.0]),
        )
        .unwrap();
        let js = serde_json::to_value(&h).unwrap();
        assert_eq!(js["normals"][0][0], 1.0);
        assert_eq!(js["offsets"][1], -1.0);
        let back: HPolyhedron = serde_json::from_value(js).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn prep_json_field_names() {
        let p = PPolyhedron::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 2.0]),
            DMatrix::from_row_slice(1, 1, &[3.0]),
            DVector::from_vec(vec![4.0]),
        )
        .unwrap();
        let js = serde_json::to_value(&p).unwrap();
        assert_eq!(js["A"][0][1], 2.0);
        assert_eq!(js["B"][0][0], 3.0);
        assert_eq!(js["b"][0], 4.0);
        let back: PPolyhedron = serde_json::from_value(js).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn rejects_ragged_and_nonfinite() {
        assert!(HPolyhedron::new(
            DMatrix::from_row_slice(1, 1, &[f64::NAN]),
            DVector::from_vec(vec![0.0])
        )
        .is_err());
        let bad: std::result::Result<VPolyhedron, _> =
            serde_json::from_str(r#"{"points": [[1.0]], "directions": "x"}"#);
        assert!(bad.is_err());
    }
}
