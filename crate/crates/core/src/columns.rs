//! Operator columns `(a_1, …, a_n)`, their Gram classification, completion
//! to unital columns and the canonical unitary dilation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::sampling::{ginibre, random_unitary};
use crate::spectral::{frobenius, identity, CMatrix, HermitianMatrix, SpectralDecomposition};
use crate::tolerance::ToleranceProfile;

/// An `n`-tuple of `m × m` complex matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorColumn {
    blocks: Vec<CMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Unital,
    Contractive,
    Neither,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnClass {
    /// `Σ a_k* a_k`
    pub gram: HermitianMatrix,
    pub kind: ColumnKind,
    /// `‖gram − 1‖_F`
    pub unital_defect: f64,
    /// Least eigenvalue of `1 − gram`.
    pub contraction_margin: f64,
}

impl ColumnClass {
    /// The defect matching the classification: distance from the identity
    /// for unital columns, otherwise the least eigenvalue of `1 − gram`.
    pub fn defect(&self) -> f64 {
        match self.kind {
            ColumnKind::Unital => self.unital_defect,
            _ => self.contraction_margin,
        }
    }
}

impl OperatorColumn {
    pub fn new(blocks: Vec<CMatrix>) -> Result<Self> {
        let first = blocks.first().ok_or(Error::Empty)?;
        let m = first.nrows();
        if m == 0 {
            return Err(Error::Empty);
        }
        for b in &blocks {
            if b.nrows() != b.ncols() {
                return Err(Error::NotSquare {
                    rows: b.nrows(),
                    cols: b.ncols(),
                });
            }
            if b.nrows() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: b.nrows(),
                });
            }
            if let Some((idx, _)) = b
                .iter()
                .enumerate()
                .find(|(_, z)| !(z.re.is_finite() && z.im.is_finite()))
            {
                return Err(Error::NonFinite {
                    row: idx % m,
                    col: idx / m,
                });
            }
        }
        Ok(Self { blocks })
    }

    /// Column of scalar multiples of the identity.
    pub fn scalars(m: usize, coefficients: &[f64]) -> Result<Self> {
        Self::new(
            coefficients
                .iter()
                .map(|&c| identity(m).scale(c))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_dim(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn gram(&self) -> HermitianMatrix {
        let m = self.block_dim();
        let sum = self
            .blocks
            .iter()
            .fold(CMatrix::zeros(m, m), |acc, a| acc + a.adjoint() * a);
        HermitianMatrix::hermitian_part(sum)
    }

    /// `Σ a_k a_k*`, the row condition of the adjoint tuple.
    pub fn row_gram(&self) -> HermitianMatrix {
        self.adjoint().gram()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(|a| a.adjoint()).collect(),
        }
    }

    pub fn classify(&self, tol: &ToleranceProfile) -> ColumnClass {
        let gram = self.gram();
        let m = self.block_dim();
        let unital_defect = frobenius(&(gram.as_matrix() - identity(m)));
        let contraction_margin = HermitianMatrix::identity(m).sub(&gram).min_eigenvalue();
        let kind = if unital_defect <= tol.order * (m as f64).sqrt() {
            ColumnKind::Unital
        } else if contraction_margin >= -tol.order {
            ColumnKind::Contractive
        } else {
            ColumnKind::Neither
        };
        ColumnClass {
            gram,
            kind,
            unital_defect,
            contraction_margin,
        }
    }

    /// `Σ a_k* x_k a_k`
    pub fn combine(&self, xs: &[HermitianMatrix]) -> Result<HermitianMatrix> {
        self.check_operands(xs)?;
        let m = self.block_dim();
        let sum = self
            .blocks
            .iter()
            .zip(xs)
            .fold(CMatrix::zeros(m, m), |acc, (a, x)| {
                acc + a.adjoint() * x.as_matrix() * a
            });
        Ok(HermitianMatrix::hermitian_part(sum))
    }

    pub(crate) fn check_operands(&self, xs: &[HermitianMatrix]) -> Result<()> {
        if xs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: xs.len(),
            });
        }
        for x in xs {
            if x.dim() != self.block_dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.block_dim(),
                    found: x.dim(),
                });
            }
        }
        Ok(())
    }

    /// Appends `(1 − Σ a*a)^{1/2}`, producing a unital column of length
    /// `n + 1`. Eigenvalues of `1 − Σ a*a` in `[−τ_order, 0)` are clipped.
    pub fn augment_to_unital(&self, tol: &ToleranceProfile) -> Result<Self> {
        let class = self.classify(tol);
        if class.kind == ColumnKind::Neither {
            return Err(Error::NotContractive {
                min_eig: class.contraction_margin,
            });
        }
        let m = self.block_dim();
        let complement = HermitianMatrix::identity(m).sub(&class.gram);
        let root = psd_sqrt(&complement.eigen());
        let mut blocks = self.blocks.clone();
        blocks.push(root);
        Ok(Self { blocks })
    }

    /// Same column padded with a zero block.
    pub fn with_zero_block(&self) -> Self {
        let m = self.block_dim();
        let mut blocks = self.blocks.clone();
        blocks.push(CMatrix::zeros(m, m));
        Self { blocks }
    }

    /// The `(n+1) × (n+1)` block unitary
    ///
    /// ```text
    /// [ 1 − a_i a_j*  (i,j ≤ n) | a_i ]
    /// [ −a_j*                   |  0  ]
    /// ```
    ///
    /// whose last block column is `(a_1, …, a_n, 0)`.
    pub fn canonical_dilation(&self, tol: &ToleranceProfile) -> Result<CMatrix> {
        let class = self.classify(tol);
        if class.kind != ColumnKind::Unital {
            return Err(Error::NotUnital {
                defect: class.unital_defect,
            });
        }
        let n = self.len();
        let m = self.block_dim();
        let mut u = CMatrix::zeros((n + 1) * m, (n + 1) * m);
        for (i, ai) in self.blocks.iter().enumerate() {
            for (j, aj) in self.blocks.iter().enumerate() {
                let mut block = -(ai * aj.adjoint());
                if i == j {
                    block += identity(m);
                }
                u.view_mut((i * m, j * m), (m, m)).copy_from(&block);
            }
            u.view_mut((i * m, n * m), (m, m)).copy_from(ai);
            u.view_mut((n * m, i * m), (m, m)).copy_from(&(-ai.adjoint()));
        }
        Ok(u)
    }
}

/// Principal square root of a PSD matrix, with negative eigenvalues set to 0.
pub(crate) fn psd_sqrt(eig: &SpectralDecomposition) -> CMatrix {
    let values: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    HermitianMatrix::hermitian_part(eig.with_values(&values)).into_matrix()
}

/// Inverse square root of a positive definite matrix.
fn pd_inv_sqrt(eig: &SpectralDecomposition) -> CMatrix {
    let values: Vec<f64> = eig.eigenvalues.iter().map(|&l| 1.0 / l.sqrt()).collect();
    eig.with_values(&values)
}

/// `a_k = G_k S^{-1/2}` with `S = Σ G_k* G_k` for Ginibre `G_k`.
pub fn random_unital_column<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> OperatorColumn {
    let gs: Vec<CMatrix> = (0..n).map(|_| ginibre(m, m, rng)).collect();
    let s = gs
        .iter()
        .fold(CMatrix::zeros(m, m), |acc, g| acc + g.adjoint() * g);
    let inv_sqrt = pd_inv_sqrt(&HermitianMatrix::hermitian_part(s).eigen());
    OperatorColumn {
        blocks: gs.into_iter().map(|g| g * &inv_sqrt).collect(),
    }
}

/// A unital column multiplied on the right by a random contraction, so that
/// `Σ a*a = c*c ≤ 1`.
pub fn random_contractive_column<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> OperatorColumn {
    let unital = random_unital_column(n, m, rng);
    let w = random_unitary(m, rng);
    let singular: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let mut c = w.clone();
    for (j, s) in singular.iter().enumerate() {
        c.column_mut(j).scale_mut(*s);
    }
    let c = c * w.adjoint();
    OperatorColumn {
        blocks: unital.blocks.into_iter().map(|a| a * &c).collect(),
    }
}

/// Column of scalar blocks `√w_k · 1_m`, e.g. `(√λ, √(1−λ))`.
pub fn scalar_weights_column(m: usize, weights: &[f64]) -> Result<OperatorColumn> {
    OperatorColumn::scalars(m, &weights.iter().map(|w| w.sqrt()).collect::<Vec<_>>())
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::rng_from_seed;
    use crate::spectral::{real_matrix, unitarity_residual, C64};

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    #[test]
    fn classification_examples() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let c = OperatorColumn::scalars(2, &[r, r]).unwrap();
        let class = c.classify(&tol());
        assert_eq!(class.kind, ColumnKind::Unital);
        assert!(class.defect() < 1e-15);

        let c = OperatorColumn::scalars(2, &[0.5]).unwrap();
        let class = c.classify(&tol());
        assert_eq!(class.kind, ColumnKind::Contractive);
        assert!((class.gram.as_matrix() - identity(2).scale(0.25)).norm() < 1e-16);
        assert!((class.defect() - 0.75).abs() < 1e-15);

        let c = OperatorColumn::scalars(2, &[1.5]).unwrap();
        let class = c.classify(&tol());
        assert_eq!(class.kind, ColumnKind::Neither);
        assert!((class.gram.as_matrix() - identity(2).scale(2.25)).norm() < 1e-15);
    }

    #[test]
    fn malformed_columns_are_rejected() {
        assert!(OperatorColumn::new(vec![]).is_err());
        assert!(OperatorColumn::new(vec![identity(2), identity(3)]).is_err());
        assert!(OperatorColumn::new(vec![CMatrix::zeros(2, 3)]).is_err());
    }

    #[test]
    fn augment_scalar() {
        let c = OperatorColumn::scalars(1, &[0.5]).unwrap();
        let a = c.augment_to_unital(&tol()).unwrap();
        assert_eq!(a.len(), 2);
        assert!((a.blocks()[1][(0, 0)].re - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn augment_unital_appends_near_zero() {
        let c = random_unital_column(3, 3, &mut rng_from_seed(4));
        let a = c.augment_to_unital(&tol()).unwrap();
        assert!(frobenius(&a.blocks()[3]) <= (10.0 * tol().order).sqrt());
        assert!(a.classify(&tol()).unital_defect <= 10.0 * tol().order);
    }

    #[test]
    fn augment_random_contractive() {
        for seed in 0..10 {
            let c = random_contractive_column(3, 4, &mut rng_from_seed(seed));
            assert_eq!(c.classify(&tol()).kind, ColumnKind::Contractive);
            let a = c.augment_to_unital(&tol()).unwrap();
            // gram recomputed directly from the blocks
            let g = a
                .blocks()
                .iter()
                .fold(CMatrix::zeros(4, 4), |acc, b| acc + b.adjoint() * b);
            assert!(frobenius(&(g - identity(4))) <= 1e-12);
        }
    }

    #[test]
    fn augment_rejects_non_contractive() {
        let c = OperatorColumn::scalars(2, &[1.5]).unwrap();
        assert!(matches!(c.augment_to_unital(&tol()), Err(Error::NotContractive { .. })));
    }

    #[test]
    fn dilation_of_identity() {
        let c = OperatorColumn::scalars(1, &[1.0]).unwrap();
        let u = c.canonical_dilation(&tol()).unwrap();
        assert_eq!(u, real_matrix(&[&[0.0, 1.0], &[-1.0, 0.0]]));
    }

    #[test]
    fn dilation_of_scalar_pair() {
        let (a1, a2) = (0.5, 3f64.sqrt() / 2.0);
        let c = OperatorColumn::scalars(1, &[a1, a2]).unwrap();
        let u = c.canonical_dilation(&tol()).unwrap();
        let expected = real_matrix(&[
            &[1.0 - a1 * a1, -a1 * a2, a1],
            &[-a2 * a1, 1.0 - a2 * a2, a2],
            &[-a1, -a2, 0.0],
        ]);
        assert!(frobenius(&(&u - expected)) < 1e-15);
        assert!(unitarity_residual(&u) <= 1e-14);
    }

    #[test]
    fn dilation_random_is_unitary_and_holds_column() {
        let c = random_unital_column(3, 2, &mut rng_from_seed(8));
        let u = c.canonical_dilation(&tol()).unwrap();
        assert!(unitarity_residual(&u) <= 1e-10);
        for (k, a) in c.blocks().iter().enumerate() {
            assert_eq!(&u.view((k * 2, 6), (2, 2)).into_owned(), a);
        }
        assert!(u.view((6, 6), (2, 2)).iter().all(|z| *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn dilation_requires_unital() {
        let c = OperatorColumn::scalars(2, &[0.5]).unwrap();
        assert!(matches!(c.canonical_dilation(&tol()), Err(Error::NotUnital { .. })));
    }

    #[test]
    fn every_contractive_column_dilates() {
        for seed in 0..10 {
            let c = random_contractive_column(2, 3, &mut rng_from_seed(seed));
            let u = c.augment_to_unital(&tol()).unwrap().canonical_dilation(&tol()).unwrap();
            assert!(unitarity_residual(&u) <= 1e-10);
        }
    }

    #[test]
    fn adjoint_duality() {
        let c = random_contractive_column(3, 3, &mut rng_from_seed(2));
        let t = tol();
        let col_contractive = c.classify(&t).kind != ColumnKind::Neither;
        let row_margin = HermitianMatrix::identity(3).sub(&c.adjoint().row_gram()).min_eigenvalue();
        assert_eq!(col_contractive, row_margin >= -t.order);
    }
}
