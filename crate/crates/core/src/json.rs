//! JSON file formats shared by the library and the command line.
//!
//! * matrix: `{"dim": m, "re": [[…]], "im": [[…]]}`, row-major, `im`
//!   optional; rectangular matrices add `"cols"`.
//! * column: `{"n": n, "m": m, "blocks": [matrix, …]}`
//! * representation: `{"beta0": r, "beta1": r, "beta2": r, "atoms": [[alpha, w], …]}`
//! * field: `{"points": [{"w": r, "a": matrix, "x": matrix}, …]}`
//! * algebra: `{"blocks": [m_i, …], "weights": [c_i, …]}`

use serde::{Deserialize, Serialize};

use crate::bendat_sherman::{Atom, BendatShermanRep};
use crate::columns::OperatorColumn;
use crate::error::{Error, Result};
use crate::spectral::{CMatrix, HermitianMatrix, C64};
use crate::states::{AtomicField, BlockTraceAlgebra, FieldPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let rows = m.nrows();
        let cols = m.ncols();
        let re = (0..rows)
            .map(|i| (0..cols).map(|j| m[(i, j)].re).collect())
            .collect();
        let has_im = m.iter().any(|z| z.im != 0.0);
        let im = has_im.then(|| {
            (0..rows)
                .map(|i| (0..cols).map(|j| m[(i, j)].im).collect())
                .collect()
        });
        Self {
            dim: rows,
            cols: (rows != cols).then_some(cols),
            re,
            im,
        }
    }

    /// Converts to a matrix; `field` names this value in error messages.
    pub fn to_matrix(&self, field: &str) -> Result<CMatrix> {
        let rows = self.dim;
        let cols = self.cols.unwrap_or(rows);
        if rows == 0 || cols == 0 {
            return Err(Error::Malformed(format!("{field}.dim must be positive")));
        }
        let check = |part: &str, data: &Vec<Vec<f64>>| -> Result<()> {
            if data.len() != rows {
                return Err(Error::Malformed(format!(
                    "{field}.{part} has {} rows, expected {rows}",
                    data.len()
                )));
            }
            for (i, row) in data.iter().enumerate() {
                if row.len() != cols {
                    return Err(Error::Malformed(format!(
                        "{field}.{part}[{i}] has {} entries, expected {cols}",
                        row.len()
                    )));
                }
                if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                    return Err(Error::Malformed(format!(
                        "{field}.{part}[{i}][{j}] is not finite"
                    )));
                }
            }
            Ok(())
        };
        check("re", &self.re)?;
        if let Some(im) = &self.im {
            check("im", im)?;
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
            C64::new(self.re[i][j], im)
        }))
    }

    pub fn to_hermitian(&self, field: &str) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.to_matrix(field)?)
            .map_err(|e| Error::Malformed(format!("{field}: {e}")))
    }
}

impl From<&HermitianMatrix> for MatrixJson {
    fn from(h: &HermitianMatrix) -> Self {
        Self::from_matrix(h.as_matrix())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnJson {
    pub n: usize,
    pub m: usize,
    pub blocks: Vec<MatrixJson>,
}

impl ColumnJson {
    pub fn from_column(c: &OperatorColumn) -> Self {
        Self {
            n: c.len(),
            m: c.block_dim(),
            blocks: c.blocks().iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn to_column(&self) -> Result<OperatorColumn> {
        if self.blocks.len() != self.n {
            return Err(Error::Malformed(format!(
                "n = {} but blocks has {} entries",
                self.n,
                self.blocks.len()
            )));
        }
        let mut blocks = Vec::with_capacity(self.n);
        for (k, b) in self.blocks.iter().enumerate() {
            let field = format!("blocks[{k}]");
            let m = b.to_matrix(&field)?;
            if m.nrows() != self.m || m.ncols() != self.m {
                return Err(Error::Malformed(format!(
                    "{field} is {}x{}, expected m = {}",
                    m.nrows(),
                    m.ncols(),
                    self.m
                )));
            }
            blocks.push(m);
        }
        OperatorColumn::new(blocks)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepJson {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub atoms: Vec<[f64; 2]>,
}

impl RepJson {
    pub fn from_rep(rep: &BendatShermanRep) -> Self {
        Self {
            beta0: rep.beta0,
            beta1: rep.beta1,
            beta2: rep.beta2,
            atoms: rep.atoms.iter().map(|a| [a.alpha, a.weight]).collect(),
        }
    }

    pub fn to_rep(&self) -> Result<BendatShermanRep> {
        BendatShermanRep::new(
            self.beta0,
            self.beta1,
            self.beta2,
            self.atoms
                .iter()
                .map(|&[alpha, weight]| Atom { alpha, weight })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldPointJson {
    pub w: f64,
    pub a: MatrixJson,
    pub x: MatrixJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldJson {
    pub points: Vec<FieldPointJson>,
}

impl FieldJson {
    pub fn from_field(field: &AtomicField) -> Self {
        Self {
            points: field
                .points()
                .iter()
                .map(|p| FieldPointJson {
                    w: p.weight,
                    a: MatrixJson::from_matrix(&p.a),
                    x: MatrixJson::from(&p.x),
                })
                .collect(),
        }
    }

    pub fn to_field(&self, unital_tol: f64) -> Result<AtomicField> {
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(k, p)| {
                Ok(FieldPoint {
                    weight: p.w,
                    a: p.a.to_matrix(&format!("points[{k}].a"))?,
                    x: p.x.to_hermitian(&format!("points[{k}].x"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        AtomicField::new(points, unital_tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub blocks: Vec<usize>,
    pub weights: Vec<f64>,
}

impl AlgebraJson {
    pub fn to_algebra(&self) -> Result<BlockTraceAlgebra> {
        BlockTraceAlgebra::new(self.blocks.clone(), self.weights.clone())
    }
}

/// `#[serde(with = "hermitian_json")]` for fields holding a [`HermitianMatrix`].
pub mod hermitian_json {
    use super::MatrixJson;
    use crate::spectral::HermitianMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(h: &HermitianMatrix, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(h).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<HermitianMatrix, D::Error> {
        MatrixJson::deserialize(d)?
            .to_hermitian("matrix")
            .map_err(serde::de::Error::custom)
    }
}

/// Parses a JSON document, reporting failures as [`Error::Malformed`].
pub fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Malformed(format!("{what}: {e}")))
}

/// A JSON array of matrices, e.g. the operands `x_1, …, x_n`.
pub fn parse_hermitian_list(text: &str, what: &str) -> Result<Vec<HermitianMatrix>> {
    let list: Vec<MatrixJson> = parse(text, what)?;
    list.iter()
        .enumerate()
        .map(|(k, m)| m.to_hermitian(&format!("{what}[{k}]")))
        .collect()
}
