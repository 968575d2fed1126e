//! Polyhedral ordering cones in simultaneous generator and inequality form.

use nalgebra::{DMatrix, DVector};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::dd::enumerate_cone;
use crate::error::{Error, Result};

/// `C = { Y lambda : lambda >= 0 } = { y : Z^T y >= 0 }`.
///
/// `generators` holds Y (q x o), `normals` holds Z (q x p). Either matrix may
/// have zero columns: no generators means `C = {0}`, no normals means
/// `C = R^q`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCone {
    pub generators: DMatrix<f64>,
    pub normals: DMatrix<f64>,
}

impl PolyCone {
    pub fn new(generators: DMatrix<f64>, normals: DMatrix<f64>) -> Result<Self> {
        if generators.nrows() != normals.nrows() {
            return Err(Error::Dimension(format!(
                "generator dim {} vs normal dim {}",
                generators.nrows(),
                normals.nrows()
            )));
        }
        let cone = PolyCone { generators, normals };
        // Every generator must satisfy the inequality form.
        for j in 0..cone.generators.ncols() {
            let g = cone.generators.column(j);
            for i in 0..cone.normals.ncols() {
                if cone.normals.column(i).dot(&g) < -1e-7 {
                    return Err(Error::Dimension(
                        "cone generator violates its inequality form".into(),
                    ));
                }
            }
        }
        Ok(cone)
    }

    pub fn dim(&self) -> usize {
        self.generators.nrows()
    }

    /// Builds the inequality form by enumerating the dual cone of the
    /// generators.
    pub fn from_generators(generators: DMatrix<f64>) -> Result<Self> {
        let q = generators.nrows();
        if generators.ncols() == 0 {
            // C = {0}: normals are +-e_i.
            let mut z = DMatrix::zeros(q, 2 * q);
            for i in 0..q {
                z[(i, i)] = 1.0;
                z[(i, q + i)] = -1.0;
            }
            return PolyCone::new(generators, z);
        }
        // Dual cone {z : Y^T z >= 0} enumerated; its rays are the normals.
        let rows: Vec<DVector<f64>> = (0..generators.ncols())
            .map(|j| generators.column(j).into_owned())
            .collect();
        let rays = enumerate_cone(q, &rows, 1e-9)?;
        let mut z = DMatrix::zeros(q, rays.len());
        for (j, r) in rays.iter().enumerate() {
            z.column_mut(j).copy_from(r);
        }
        PolyCone::new(generators, z)
    }

    /// Builds the generator form by enumerating `{ y : Z^T y >= 0 }`.
    pub fn from_normals(normals: DMatrix<f64>) -> Result<Self> {
        let q = normals.nrows();
        if normals.ncols() == 0 {
            // C = R^q: generators +-e_i.
            let mut y = DMatrix::zeros(q, 2 * q);
            for i in 0..q {
                y[(i, i)] = 1.0;
                y[(i, q + i)] = -1.0;
            }
            return PolyCone::new(y, normals);
        }
        let rows: Vec<DVector<f64>> = (0..normals.ncols())
            .map(|j| normals.column(j).into_owned())
            .collect();
        let rays = enumerate_cone(q, &rows, 1e-9)?;
        let mut y = DMatrix::zeros(q, rays.len());
        for (j, r) in rays.iter().enumerate() {
            y.column_mut(j).copy_from(r);
        }
        PolyCone::new(y, normals)
    }

    pub fn nonneg_orthant(q: usize) -> Self {
        PolyCone {
            generators: DMatrix::identity(q, q),
            normals: DMatrix::identity(q, q),
        }
    }

    pub fn zero(q: usize) -> Self {
        PolyCone::from_generators(DMatrix::zeros(q, 0)).expect("zero cone")
    }

    pub fn contains(&self, y: &DVector<f64>, tol: f64) -> bool {
        (0..self.normals.ncols()).all(|i| self.normals.column(i).dot(y) >= -tol)
    }

    /// `C` is pointed iff `Z^T` has trivial kernel.
    pub fn is_pointed(&self) -> bool {
        let q = self.dim();
        if self.normals.ncols() < q {
            return false;
        }
        self.normals.transpose().clone_owned().svd(false, false).rank(1e-9) == q
    }

    /// `C` is solid iff the generators span `R^q`.
    pub fn is_solid(&self) -> bool {
        let q = self.dim();
        if self.generators.ncols() < q {
            return false;
        }
        self.generators.clone_owned().svd(false, false).rank(1e-9) == q
    }

    pub fn negated(&self) -> Self {
        PolyCone {
            generators: -&self.generators,
            normals: -&self.normals,
        }
    }
}

/// Positive dual cone `C+ = { y* : y^T y* >= 0 for all y in C }`.
///
/// The generator form of `C+` is the inequality matrix of `C` and vice versa,
/// so this is a role swap.
pub fn positive_dual(cone: &PolyCone) -> PolyCone {
    PolyCone {
        generators: cone.normals.clone(),
        normals: cone.generators.clone(),
    }
}

/// An interior point of a solid pointed cone, scaled so its last coordinate
/// is +1 or -1. With last coordinate -1 the caller is expected to apply the
/// sign-flip reformulation (replace C, P, c by their negatives).
///
/// The sum of the generators of a solid pointed cone is interior; that sum is
/// used directly, nudged along a generator when its last coordinate vanishes.
pub fn cone_interior_point(cone: &PolyCone) -> Result<DVector<f64>> {
    let q = cone.dim();
    if !cone.is_solid() {
        return Err(Error::NonSolidCone);
    }
    let mut c = DVector::zeros(q);
    for j in 0..cone.generators.ncols() {
        let g = cone.generators.column(j);
        let n = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if n > 0.0 {
            c += g / n;
        }
    }
    for i in 0..cone.normals.ncols() {
        if cone.normals.column(i).dot(&c) <= 1e-9 {
            return Err(Error::NonSolidCone);
        }
    }
    if c[q - 1].abs() <= 1e-9 {
        // Push along the generator with the largest last coordinate; interior
        // plus a cone element stays interior.
        let mut best = 0;
        let mut best_val = 0.0;
        for j in 0..cone.generators.ncols() {
            let v = cone.generators[(q - 1, j)].abs();
            if v > best_val {
                best_val = v;
                best = j;
            }
        }
        if best_val <= 1e-12 {
            return Err(Error::NonSolidCone);
        }
        let g = cone.generators.column(best).into_owned();
        c += &g * ((1.0 + c[q - 1].abs()) / best_val);
    }
    let scale = c[q - 1].abs();
    Ok(c / scale)
}

impl Serialize for PolyCone {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
        };
        let mut st = s.serialize_struct("PolyCone", 2)?;
        st.serialize_field("Y", &rows(&self.generators))?;
        st.serialize_field("Z", &rows(&self.normals))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PolyCone {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "Y")]
            y: Vec<Vec<f64>>,
            #[serde(rename = "Z")]
            z: Vec<Vec<f64>>,
        }
        let raw = Raw::deserialize(d)?;
        let to_mat = |rows: &Vec<Vec<f64>>, q: usize| -> DMatrix<f64> {
            if rows.is_empty() || rows[0].is_empty() {
                return DMatrix::zeros(q, 0);
            }
            // Stored row-major with q rows (one per ambient coordinate).
            DMatrix::from_row_iterator(rows.len(), rows[0].len(), rows.iter().flatten().copied())
        };
        let q = raw.y.len().max(raw.z.len());
        let y = to_mat(&raw.y, q);
        let z = to_mat(&raw.z, q);
        PolyCone::new(y, z).map_err(|e| serde::de::Error::custom(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn orthant_interior_point() {
        let c = cone_interior_point(&PolyCone::nonneg_orthant(2)).unwrap();
        assert_eq!(c, dvector![1.0, 1.0]);
    }

    #[test]
    fn second_quadrant_cone_interior_point() {
        let cone = PolyCone::from_generators(dmatrix![-1.0, 0.0; 0.0, 1.0]).unwrap();
        let c = cone_interior_point(&cone).unwrap();
        assert!(c[0] < 0.0 && c[1] == 1.0);
    }

    #[test]
    fn ray_is_non_solid() {
        let cone = PolyCone::from_generators(DMatrix::from_column_slice(2, 1, &[0.0, 1.0])).unwrap();
        assert_eq!(cone_interior_point(&cone), Err(Error::NonSolidCone));
    }

    #[test]
    fn sign_flip_case_reports_minus_one() {
        // -R^2_+ has interior points only with negative last coordinate.
        let cone = PolyCone::from_generators(dmatrix![-1.0, 0.0; 0.0, -1.0]).unwrap();
        let c = cone_interior_point(&cone).unwrap();
        assert_eq!(c[1], -1.0);
        assert!(cone.contains(&c, 0.0));
    }

    #[test]
    fn dual_of_orthant_is_orthant() {
        let d = positive_dual(&PolyCone::nonneg_orthant(3));
        for i in 0..3 {
            let mut e = DVector::zeros(3);
            e[i] = 1.0;
            assert!(d.contains(&e, 0.0));
            assert!(!d.contains(&(-e), 1e-9));
        }
    }

    #[test]
    fn dual_of_zero_cone_is_everything() {
        let d = positive_dual(&PolyCone::zero(2));
        let mut rng = Rng::new(3);
        for _ in 0..100 {
            let y = dvector![rng.uniform_in(-5.0, 5.0), rng.uniform_in(-5.0, 5.0)];
            assert!(d.contains(&y, 1e-9));
        }
    }

    #[test]
    fn dual_by_sampling_second_quadrant() {
        // cone{(-1,0),(0,1)} is self-dual up to the role swap; validate the
        // definition of the positive dual on sampled points.
        let cone = PolyCone::from_generators(dmatrix![-1.0, 0.0; 0.0, 1.0]).unwrap();
        let dual = positive_dual(&cone);
        let mut rng = Rng::new(11);
        for _ in 0..1000 {
            let y = dvector![rng.uniform_in(-2.0, 2.0), rng.uniform_in(-2.0, 2.0)];
            let in_dual = dual.contains(&y, 1e-9);
            // Definition check on the generators of C.
            let by_def = (-y[0] >= -1e-9) && (y[1] >= -1e-9);
            assert_eq!(in_dual, by_def, "y = {y:?}");
        }
    }

    #[test]
    fn dual_involution_by_sampling() {
        let cones = vec![
            PolyCone::nonneg_orthant(2),
            PolyCone::from_generators(dmatrix![-1.0, 0.0; 0.0, 1.0]).unwrap(),
            PolyCone::from_generators(dmatrix![1.0, 1.0; 0.0, 1.0]).unwrap(),
        ];
        let mut rng = Rng::new(5);
        for cone in cones {
            let dd = positive_dual(&positive_dual(&cone));
            for _ in 0..300 {
                let y = dvector![rng.uniform_in(-3.0, 3.0), rng.uniform_in(-3.0, 3.0)];
                assert_eq!(cone.contains(&y, 1e-7), dd.contains(&y, 1e-7));
            }
        }
    }

    #[test]
    fn generator_and_normal_forms_agree() {
        let cone = PolyCone::from_generators(dmatrix![1.0, -1.0; 1.0, 1.0]).unwrap();
        assert!(cone.is_pointed() && cone.is_solid());
        let mut rng = Rng::new(9);
        for _ in 0..1000 {
            let y = dvector![rng.uniform_in(-2.0, 2.0), rng.uniform_in(-2.0, 2.0)];
            let by_normals = cone.contains(&y, 1e-9);
            // Membership by generators: y = a*(1,1) + b*(-1,1), a,b >= 0.
            let a = (y[0] + y[1]) / 2.0;
            let b = (y[1] - y[0]) / 2.0;
            let by_gens = a >= -1e-9 && b >= -1e-9;
            assert_eq!(by_normals, by_gens);
        }
    }

    #[test]
    fn pointedness() {
        assert!(PolyCone::nonneg_orthant(3).is_pointed());
        assert!(PolyCone::zero(2).is_pointed());
        let halfspace = PolyCone::from_normals(DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        assert!(!halfspace.is_pointed());
    }

    #[test]
    fn cone_json_uses_y_and_z() {
        let cone = PolyCone::nonneg_orthant(2);
        let js = serde_json::to_value(&cone).unwrap();
        assert!(js.get("Y").is_some() && js.get("Z").is_some());
        let back: PolyCone = serde_json::from_value(js).unwrap();
        assert_eq!(back, cone);
    }
}
