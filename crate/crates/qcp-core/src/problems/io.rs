//! JSON instance files for the CLI and external tools.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyhedral::PolyCone;
use crate::qcp::{Objective, QcpProblem};
use crate::scalarize::VlpProblem;

use super::{
    boundary_example, dc_chain, dc_chain_dual, example41, gen_cqp_random, make_cqp, make_dc,
    make_lmp, LmpInstance,
};

/// Named builtin objectives for `raw_qcp` files.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    ProductPositive,
    NegSquaredNorm,
    Constant { value: f64 },
}

impl ObjectiveSpec {
    pub fn build(&self) -> Objective {
        match self {
            ObjectiveSpec::ProductPositive => Objective::product_positive(),
            ObjectiveSpec::NegSquaredNorm => Objective::neg_squared_norm(),
            ObjectiveSpec::Constant { value } => Objective::constant(*value),
        }
    }
}

/// Problem file schema, tagged by family.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProblemFile {
    Lmp {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        l: Vec<f64>,
        u: Vec<f64>,
        c_rows: Vec<Vec<f64>>,
        d: Vec<f64>,
    },
    /// Deterministic sin-floor instance, or a seeded random one.
    Cqp {
        q: usize,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    DcPrimal {
        q: usize,
    },
    DcDual {
        q: usize,
    },
    Boundary {
        q: usize,
        m: usize,
    },
    Example41,
    RawQcp {
        p: Vec<Vec<f64>>,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        cone: PolyCone,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<Vec<f64>>,
        objective: ObjectiveSpec,
    },
}

fn to_mat(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::InvalidInstance(format!("{what} must be nonempty")));
    }
    let n = rows[0].len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInstance(format!("ragged rows in {what}")));
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        n,
        rows.iter().flatten().copied(),
    ))
}

impl ProblemFile {
    pub fn family_name(&self) -> &'static str {
        match self {
            ProblemFile::Lmp { .. } => "lmp",
            ProblemFile::Cqp { .. } => "cqp",
            ProblemFile::DcPrimal { .. } => "dc_primal",
            ProblemFile::DcDual { .. } => "dc_dual",
            ProblemFile::Boundary { .. } => "boundary",
            ProblemFile::Example41 => "example41",
            ProblemFile::RawQcp { .. } => "raw_qcp",
        }
    }

    pub fn build(&self) -> Result<QcpProblem> {
        match self {
            ProblemFile::Lmp { a, b, l, u, c_rows, d } => {
                let inst = LmpInstance {
                    a: to_mat(a, "a")?,
                    b: DVector::from_vec(b.clone()),
                    l: DVector::from_vec(l.clone()),
                    u: DVector::from_vec(u.clone()),
                    c_rows: to_mat(c_rows, "c_rows")?,
                    d: DVector::from_vec(d.clone()),
                };
                make_lmp(&inst)
            }
            ProblemFile::Cqp { q, n, seed } => match seed {
                Some(s) => gen_cqp_random(*q, *n, *s),
                None => make_cqp(*q, *n),
            },
            ProblemFile::DcPrimal { q } => make_dc(&dc_chain(*q)?),
            ProblemFile::DcDual { q } => make_dc(&dc_chain_dual(*q)?),
            ProblemFile::Boundary { q, m } => {
                let (dc, _) = boundary_example(*q, *m)?;
                make_dc(&dc)
            }
            ProblemFile::Example41 => Ok(example41()),
            ProblemFile::RawQcp { p, a, b, cone, c, objective } => {
                let p = to_mat(p, "p")?;
                let a = to_mat(a, "a")?;
                let b = DVector::from_vec(b.clone());
                let f = objective.build();
                match c {
                    Some(c) => {
                        let vlp =
                            VlpProblem::new(p, a, b, cone.clone(), DVector::from_vec(c.clone()))?;
                        Ok(QcpProblem::new(vlp, f))
                    }
                    None => QcpProblem::with_auto_interior_point(p, a, b, cone.clone(), f),
                }
            }
        }
    }

    /// A builtin instance by its family name, for `--builtin` style lookups.
    pub fn builtin(name: &str) -> Result<ProblemFile> {
        match name {
            "example41" => Ok(ProblemFile::Example41),
            other => Err(Error::InvalidInstance(format!(
                "unknown builtin '{other}' (available: example41)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_tags_round_trip() {
        let files = vec![
            ProblemFile::Cqp { q: 2, n: 4, seed: None },
            ProblemFile::DcPrimal { q: 3 },
            ProblemFile::Example41,
        ];
        for f in files {
            let js = serde_json::to_string(&f).unwrap();
            assert!(js.contains(&format!("\"family\":\"{}\"", f.family_name())));
            let back: ProblemFile = serde_json::from_str(&js).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn raw_qcp_builds_with_cone_json() {
        let js = r#"{
            "family": "raw_qcp",
            "p": [[1.0, 0.0], [0.0, 1.0]],
            "a": [[1.0, 0.0], [0.0, 1.0]],
            "b": [0.0, 0.0],
            "cone": {"Y": [[1.0, 0.0], [0.0, 1.0]], "Z": [[1.0, 0.0], [0.0, 1.0]]},
            "objective": {"name": "product_positive"}
        }"#;
        let f: ProblemFile = serde_json::from_str(js).unwrap();
        let p = f.build().unwrap();
        assert_eq!(p.vlp.image_dim(), 2);
        assert_eq!(p.vlp.c, nalgebra::dvector![1.0, 1.0]); // auto interior point
    }

    #[test]
    fn malformed_json_is_an_error() {
        let r: std::result::Result<ProblemFile, _> = serde_json::from_str("{\"family\": \"nope\"}");
        assert!(r.is_err());
    }
}
