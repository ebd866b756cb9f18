//! The roots-of-unity pinching: averaging the conjugates `E^{-k} A E^k`
//! over `k = 1..n` with `E = diag(θ, θ², …, θ^{n−1}, 1) ⊗ 1_m` and
//! `θ = exp(2πi/n)` keeps exactly the diagonal blocks of `A`.

use crate::error::{Error, Result};
use crate::spectral::{identity, CMatrix, C64};

/// Phases of `E` together with the block size. `E` itself is never formed;
/// conjugation multiplies block `(i, j)` by `θ^{k(j−i)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PinchingSystem {
    n: usize,
    m: usize,
    /// `roots[r] = θ^r`, `r = 0..n`
    roots: Vec<C64>,
}

impl PinchingSystem {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::Empty);
        }
        let roots = (0..n)
            .map(|r| {
                let angle = std::f64::consts::TAU * r as f64 / n as f64;
                C64::new(angle.cos(), angle.sin())
            })
            .collect();
        Ok(Self { n, m, roots })
    }

    pub fn blocks(&self) -> usize {
        self.n
    }

    pub fn block_dim(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n * self.m
    }

    /// `θ^e` for any integer exponent.
    pub fn theta_pow(&self, e: i64) -> C64 {
        self.roots[e.rem_euclid(self.n as i64) as usize]
    }

    /// Diagonal phases of `E`, one per block: `θ^1, …, θ^{n−1}, θ^n = 1`.
    pub fn phases(&self) -> Vec<C64> {
        (1..=self.n as i64).map(|i| self.theta_pow(i)).collect()
    }

    fn check(&self, a: &CMatrix) -> Result<()> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.nrows().max(a.ncols()),
            });
        }
        Ok(())
    }

    /// `E^{-k} A E^k`
    pub fn conjugate(&self, a: &CMatrix, k: i64) -> Result<CMatrix> {
        self.check(a)?;
        let m = self.m;
        let mut out = a.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j {
                    continue;
                }
                let phase = self.theta_pow(k * (j as i64 - i as i64));
                for z in out.view_mut((i * m, j * m), (m, m)).iter_mut() {
                    *z *= phase;
                }
            }
        }
        Ok(out)
    }

    /// `(1/n) Σ_{k=1}^{n} E^{-k} A E^k`
    pub fn pinch(&self, a: &CMatrix) -> Result<CMatrix> {
        self.check(a)?;
        let mut acc = CMatrix::zeros(self.dim(), self.dim());
        for k in 1..=self.n as i64 {
            acc += self.conjugate(a, k)?;
        }
        Ok(acc.unscale(self.n as f64))
    }

    /// The diagonal blocks of `A`, read off directly.
    pub fn block_diagonal_part(&self, a: &CMatrix) -> Result<CMatrix> {
        self.check(a)?;
        let m = self.m;
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.n {
            out.view_mut((i * m, i * m), (m, m))
                .copy_from(&a.view((i * m, i * m), (m, m)));
        }
        Ok(out)
    }

    /// `P_k = E^{-k} (P ⊗ 1_m) E^k` where `P` is the rank-one projection with
    /// all entries `1/n`.
    pub fn projection(&self, k: i64) -> CMatrix {
        let m = self.m;
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        let inv_n = 1.0 / self.n as f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let phase = self.theta_pow(k * (j as i64 - i as i64)) * inv_n;
                out.view_mut((i * m, j * m), (m, m))
                    .copy_from(&identity(m).map(|z| z * phase));
            }
        }
        out
    }

    pub fn projections(&self) -> Vec<CMatrix> {
        (1..=self.n as i64).map(|k| self.projection(k)).collect()
    }

    /// Block `(i, j)` of a matrix partitioned like this system.
    pub fn block(&self, a: &CMatrix, i: usize, j: usize) -> CMatrix {
        a.view((i * self.m, j * self.m), (self.m, self.m)).into_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{ginibre, rng_from_seed};
    use crate::spectral::{frobenius, real_matrix, unitarity_residual, HermitianMatrix};

    fn dense_e(sys: &PinchingSystem) -> CMatrix {
        let m = sys.block_dim();
        let mut e = CMatrix::zeros(sys.dim(), sys.dim());
        for (i, ph) in sys.phases().into_iter().enumerate() {
            for r in 0..m {
                e[(i * m + r, i * m + r)] = ph;
            }
        }
        e
    }

    #[test]
    fn two_blocks_scalar() {
        let sys = PinchingSystem::new(2, 1).unwrap();
        let ph = sys.phases();
        assert!((ph[0] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(ph[1], C64::new(1.0, 0.0));
        let a = real_matrix(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let p = sys.pinch(&a).unwrap();
        assert!(frobenius(&(p - real_matrix(&[&[1.0, 0.0], &[0.0, 4.0]]))) < 1e-15);
    }

    #[test]
    fn blockwise_conjugation_matches_dense() {
        let sys = PinchingSystem::new(3, 2).unwrap();
        let e = dense_e(&sys);
        assert!(unitarity_residual(&e) < 1e-15);
        let a = ginibre(6, 6, &mut rng_from_seed(1));
        let dense = e.adjoint() * &a * &e;
        assert!(frobenius(&(dense - sys.conjugate(&a, 1).unwrap())) < 1e-14);
        let e2 = &e * &e;
        let dense2 = e2.adjoint() * &a * &e2;
        assert!(frobenius(&(dense2 - sys.conjugate(&a, 2).unwrap())) < 1e-14);
    }

    #[test]
    fn projections_resolve_identity() {
        for n in 1..=8 {
            let sys = PinchingSystem::new(n, 1).unwrap();
            let sum = sys
                .projections()
                .into_iter()
                .fold(CMatrix::zeros(n, n), |acc, p| acc + p);
            assert!(frobenius(&(sum - identity(n))) <= 1e-13, "n = {n}");
        }
    }

    #[test]
    fn projections_are_orthogonal() {
        let sys = PinchingSystem::new(3, 2).unwrap();
        let ps = sys.projections();
        for j in 0..3 {
            assert!(frobenius(&(&ps[j] * &ps[j] - &ps[j])) < 1e-14);
            for k in 0..3 {
                if j != k {
                    assert!(frobenius(&(&ps[j] * &ps[k])) <= 1e-13);
                }
            }
            let rank = ps[j].trace().re;
            assert!((rank - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn pinch_properties() {
        let sys = PinchingSystem::new(4, 2).unwrap();
        let a = ginibre(8, 8, &mut rng_from_seed(3));
        let p = sys.pinch(&a).unwrap();
        assert!(frobenius(&(&p - sys.block_diagonal_part(&a).unwrap())) <= 1e-13 * frobenius(&a));
        // idempotent
        assert!(frobenius(&(sys.pinch(&p).unwrap() - &p)) <= 1e-13 * frobenius(&a));
        // trace preserving and unital
        assert!((p.trace() - a.trace()).norm() <= 1e-13 * frobenius(&a));
        assert!(frobenius(&(sys.pinch(&identity(8)).unwrap() - identity(8))) < 1e-14);
        // positive
        let psd = &a * a.adjoint();
        let pp = HermitianMatrix::new(sys.pinch(&psd).unwrap()).unwrap();
        assert!(pp.min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn dimension_is_checked() {
        let sys = PinchingSystem::new(2, 2).unwrap();
        assert!(matches!(sys.pinch(&identity(3)), Err(Error::DimensionMismatch { .. })));
    }
}
