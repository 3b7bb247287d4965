//! JSON interchange: algebras as `{"blocks":[{"dim":2,"weight":"1/2"}]}`,
//! inclusions as `{"sub":..,"amb":..,"mult":[[..]]}`, matrices as nested
//! arrays of `[re, im]` pairs.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Block, Element, Inclusion, TracialAlgebra, Tuple};
use crate::error::{Error, Result};
use crate::{Mat, Rational, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockJson {
    pub dim: usize,
    pub weight: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub blocks: Vec<BlockJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionJson {
    pub sub: AlgebraJson,
    pub amb: AlgebraJson,
    pub mult: Vec<Vec<u32>>,
}

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

/// An element as one matrix per block.
pub type ElementJson = Vec<MatrixJson>;

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: i64 = p
        .parse()
        .map_err(|_| Error::Input(format!("bad rational numerator in {s:?}")))?;
    let q: i64 = q
        .parse()
        .map_err(|_| Error::Input(format!("bad rational denominator in {s:?}")))?;
    if q == 0 {
        return Err(Error::Input(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(p, q))
}

impl AlgebraJson {
    pub fn build(&self) -> Result<Arc<TracialAlgebra>> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                Ok(Block {
                    dim: b.dim,
                    weight: parse_rational(&b.weight)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        TracialAlgebra::new(blocks)
    }

    pub fn from_algebra(alg: &TracialAlgebra) -> Self {
        Self {
            blocks: alg
                .blocks()
                .iter()
                .map(|b| BlockJson {
                    dim: b.dim,
                    weight: b.weight.to_string(),
                })
                .collect(),
        }
    }
}

impl InclusionJson {
    pub fn build(&self) -> Result<Inclusion> {
        Inclusion::new(self.sub.build()?, self.amb.build()?, self.mult.clone())
    }

    pub fn from_inclusion(inc: &Inclusion) -> Self {
        Self {
            sub: AlgebraJson::from_algebra(inc.sub()),
            amb: AlgebraJson::from_algebra(inc.amb()),
            mult: inc.mult().to_vec(),
        }
    }
}

pub fn matrix_to_json(m: &Mat) -> MatrixJson {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<Mat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Input("matrix must be square".into()));
    }
    if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Input("matrix entries must be finite".into()));
    }
    Ok(Mat::from_fn(n, n, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

pub fn element_to_json(x: &Element) -> ElementJson {
    x.blocks().iter().map(matrix_to_json).collect()
}

pub fn element_from_json(alg: &Arc<TracialAlgebra>, blocks: &ElementJson) -> Result<Element> {
    let mats = blocks.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
    Element::from_blocks(alg, mats)
}

pub fn tuple_to_json(x: &Tuple) -> Vec<ElementJson> {
    x.entries().iter().map(element_to_json).collect()
}

pub fn tuple_from_json(alg: &Arc<TracialAlgebra>, entries: &[ElementJson]) -> Result<Tuple> {
    Tuple::new(
        entries
            .iter()
            .map(|e| element_from_json(alg, e))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Single-block tuples may be given as bare matrices.
pub fn factor_tuple_from_json(alg: &Arc<TracialAlgebra>, entries: &[MatrixJson]) -> Result<Tuple> {
    Tuple::new(
        entries
            .iter()
            .map(|m| Element::from_blocks(alg, vec![matrix_from_json(m)?]))
            .collect::<Result<Vec<_>>>()?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_round_trip() {
        let text = r#"{"blocks":[{"dim":1,"weight":"1/3"},{"dim":2,"weight":"2/3"}]}"#;
        let spec: AlgebraJson = serde_json::from_str(text).unwrap();
        let alg = spec.build().unwrap();
        assert_eq!(alg.dim(), 5);
        assert_eq!(serde_json::to_string(&AlgebraJson::from_algebra(&alg)).unwrap(), text);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_weights() {
        let text = r#"{"blocks":[{"dim":1,"weight":"1","extra":0}]}"#;
        assert!(serde_json::from_str::<AlgebraJson>(text).is_err());
        for w in ["1/0", "x", "1/2"] {
            let spec = AlgebraJson {
                blocks: vec![BlockJson { dim: 1, weight: w.into() }],
            };
            assert!(spec.build().is_err(), "{w}");
        }
    }

    #[test]
    fn inclusion_and_matrices() {
        let text = r#"{"sub":{"blocks":[{"dim":1,"weight":"1"}]},
                       "amb":{"blocks":[{"dim":1,"weight":"1/3"},{"dim":2,"weight":"2/3"}]},
                       "mult":[[1,2]]}"#;
        let inc: InclusionJson = serde_json::from_str(text).unwrap();
        let inc = inc.build().unwrap();
        assert_eq!(inc.amb().dim(), 5);
        let x = Element::matrix_unit(inc.amb(), 1, 0, 1).scale(C64::new(0.5, -2.0));
        let j = element_to_json(&x);
        assert_eq!(element_from_json(inc.amb(), &j).unwrap(), x);
        assert!(matrix_from_json(&vec![vec![[0.0, 0.0]; 2]]).is_err());
    }
}
