//! Dense Hermitian linear algebra: eigendecomposition, the spectral
//! functional calculus `f(H) = V diag(f(λ)) V*`, the Loewner order and the
//! two covariance properties that characterize spectral functions.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::tolerance::ToleranceProfile;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Fixed slack for unitarity and isometry checks, per unit of `√dim`.
pub const UNITARITY_TOL: f64 = 1e-10;

/// A real function on an interval that can be lifted to Hermitian matrices.
pub trait RealFunction: Send + Sync {
    fn name(&self) -> &str;
    fn domain(&self) -> Interval;
    fn eval(&self, t: f64) -> f64;
}

/// Wraps a closure as a [`RealFunction`].
pub struct FnOnInterval<F> {
    name: String,
    domain: Interval,
    f: F,
}

impl<F: Fn(f64) -> f64 + Send + Sync> FnOnInterval<F> {
    pub fn new(name: impl Into<String>, domain: Interval, f: F) -> Self {
        Self {
            name: name.into(),
            domain,
            f,
        }
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> RealFunction for FnOnInterval<F> {
    fn name(&self) -> &str {
        &self.name
    }
    fn domain(&self) -> Interval {
        self.domain
    }
    fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

/// Evaluates `f` at a point that must lie in its domain up to `slack` at
/// closed endpoints. Points inside the slack band are clamped first.
pub fn checked_eval<F: RealFunction + ?Sized>(f: &F, t: f64, slack: f64) -> Result<f64> {
    let domain = f.domain();
    if !domain.contains_with_slack(t, slack) {
        return Err(Error::SpectrumOutsideDomain {
            eigenvalue: t,
            domain: domain.to_string(),
        });
    }
    let v = f.eval(domain.clamp(t));
    if !v.is_finite() {
        return Err(Error::EvaluationFailure {
            name: f.name().to_string(),
            t,
        });
    }
    Ok(v)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// `‖M*M − 1‖_F`
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    frobenius(&(m.adjoint() * m - identity(m.ncols())))
}

/// Real-entry matrix from rows; handy for examples and tests.
pub fn real_matrix(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    let c = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, c, |i, j| C64::new(rows[i][j], 0.0))
}

pub fn real_diagonal(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(values[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Dense self-adjoint complex matrix.
///
/// The stored matrix is exactly Hermitian: construction checks the
/// self-adjointness residual and then replaces the input by its Hermitian
/// part.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, ToleranceProfile::default().herm)
    }

    pub fn with_tolerance(m: CMatrix, herm_tol: f64) -> Result<Self> {
        if m.nrows() == 0 {
            return Err(Error::Empty);
        }
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        let residual = frobenius(&(&m - m.adjoint()));
        let allowed = herm_tol * frobenius(&m).max(1.0);
        if residual > allowed {
            return Err(Error::NotHermitian { residual, allowed });
        }
        Ok(Self::hermitian_part(m))
    }

    /// Takes the Hermitian part without checking. Used for products that
    /// are self-adjoint in exact arithmetic.
    pub(crate) fn hermitian_part(m: CMatrix) -> Self {
        let h = (&m + m.adjoint()).scale(0.5);
        Self(h)
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        Self(real_diagonal(values))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(real_matrix(rows))
    }

    pub fn identity(dim: usize) -> Self {
        Self(identity(dim))
    }

    pub fn scalar(dim: usize, s: f64) -> Self {
        Self(identity(dim).scale(s))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn norm(&self) -> f64 {
        frobenius(&self.0)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    /// `a* H a`, where `a` may be rectangular.
    pub fn congruence(&self, a: &CMatrix) -> Self {
        Self::hermitian_part(a.adjoint() * &self.0 * a)
    }

    /// `a H a*`
    pub fn co_congruence(&self, a: &CMatrix) -> Self {
        Self::hermitian_part(a * &self.0 * a.adjoint())
    }

    pub fn eigen(&self) -> SpectralDecomposition {
        eigendecompose(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen().eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigen().eigenvalues.last().expect("non-empty")
    }

    /// Direct sum `diag(blocks...)`.
    pub fn block_diagonal(blocks: &[HermitianMatrix]) -> Self {
        let mats: Vec<CMatrix> = blocks.iter().map(|b| b.0.clone()).collect();
        Self(block_diagonal(&mats))
    }
}

/// Direct sum of square blocks of any sizes.
pub fn block_diagonal(blocks: &[CMatrix]) -> CMatrix {
    let dim: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(dim, dim);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

/// Indices `range` of eigenvalues that were grouped as one eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    pub value: f64,
    pub columns: std::ops::Range<usize>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(g(λ)) V*`
    pub fn map(&self, g: impl Fn(f64) -> f64) -> CMatrix {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&l| g(l)).collect();
        self.with_values(&values)
    }

    /// `V diag(values) V*`
    pub fn with_values(&self, values: &[f64]) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &gj) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(gj);
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|t| t)
    }

    pub fn reconstruction_residual(&self, h: &HermitianMatrix) -> f64 {
        frobenius(&(self.reconstruct() - h.as_matrix()))
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.eigenvectors)
    }

    /// Groups consecutive eigenvalues closer than `cluster_tol`.
    pub fn eigenspaces(&self, cluster_tol: f64) -> Vec<Eigenspace> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.eigenvalues.len() {
            if i == self.eigenvalues.len()
                || self.eigenvalues[i] - self.eigenvalues[i - 1] > cluster_tol
            {
                let vals = &self.eigenvalues[start..i];
                out.push(Eigenspace {
                    value: vals.iter().sum::<f64>() / vals.len() as f64,
                    columns: start..i,
                });
                start = i;
            }
        }
        out
    }

    /// Orthogonal projection onto the span of the given eigenvector columns.
    pub fn projection(&self, columns: std::ops::Range<usize>) -> CMatrix {
        let v = self
            .eigenvectors
            .columns(columns.start, columns.end - columns.start);
        v * v.adjoint()
    }
}

pub fn eigendecompose(h: &HermitianMatrix) -> SpectralDecomposition {
    let eig = h.as_matrix().clone().symmetric_eigen();
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Membership slack for the spectrum of `h` at closed endpoints.
fn spectral_slack(tol: &ToleranceProfile, eigenvalues: &[f64]) -> f64 {
    let scale = eigenvalues.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    tol.order * scale
}

/// Checks that every eigenvalue of `h` lies in `domain`, with the closed
/// endpoint slack used throughout.
pub fn check_spectrum(h: &HermitianMatrix, domain: &Interval, tol: &ToleranceProfile) -> Result<()> {
    let eig = h.eigen();
    let slack = spectral_slack(tol, &eig.eigenvalues);
    for &lam in &eig.eigenvalues {
        if !domain.contains_with_slack(lam, slack) {
            return Err(Error::SpectrumOutsideDomain {
                eigenvalue: lam,
                domain: domain.to_string(),
            });
        }
    }
    Ok(())
}

/// Spectral functional calculus `f(H) = V diag(f(λ_i)) V*`.
pub fn apply_function<F: RealFunction + ?Sized>(
    f: &F,
    h: &HermitianMatrix,
    tol: &ToleranceProfile,
) -> Result<HermitianMatrix> {
    let eig = h.eigen();
    apply_with_decomposition(f, &eig, tol)
}

pub fn apply_with_decomposition<F: RealFunction + ?Sized>(
    f: &F,
    eig: &SpectralDecomposition,
    tol: &ToleranceProfile,
) -> Result<HermitianMatrix> {
    let slack = spectral_slack(tol, &eig.eigenvalues);
    let values = eig
        .eigenvalues
        .iter()
        .map(|&lam| checked_eval(f, lam, slack))
        .collect::<Result<Vec<f64>>>()?;
    Ok(HermitianMatrix::hermitian_part(eig.with_values(&values)))
}

/// Outcome of comparing `A ≤ B` in the Loewner order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoewnerReport {
    /// Least eigenvalue of `B − A`.
    pub min_eig: f64,
    pub holds: bool,
    pub scale: f64,
}

pub fn loewner_defect(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    tol: &ToleranceProfile,
) -> Result<LoewnerReport> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let scale = a.norm().max(b.norm()).max(1.0);
    let min_eig = b.sub(a).min_eigenvalue();
    Ok(LoewnerReport {
        min_eig,
        holds: min_eig >= -tol.order_slack(scale),
        scale,
    })
}

/// Matrix with `V*V = 1`, mapping a `cols`-dimensional space isometrically
/// into a `rows`-dimensional one.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry(CMatrix);

impl Isometry {
    pub fn new(v: CMatrix) -> Result<Self> {
        if v.ncols() == 0 || v.ncols() > v.nrows() {
            return Err(Error::Malformed(format!(
                "isometry must have 1 ≤ cols ≤ rows, got {}x{}",
                v.nrows(),
                v.ncols()
            )));
        }
        let residual = unitarity_residual(&v);
        if residual > UNITARITY_TOL * (v.ncols() as f64).sqrt().max(1.0) {
            return Err(Error::NotIsometry { residual });
        }
        Ok(Self(v))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    /// The range projection `VV*`.
    pub fn range_projection(&self) -> CMatrix {
        &self.0 * self.0.adjoint()
    }
}

pub fn check_unitary(u: &CMatrix) -> Result<()> {
    if u.nrows() != u.ncols() {
        return Err(Error::NotSquare {
            rows: u.nrows(),
            cols: u.ncols(),
        });
    }
    let residual = unitarity_residual(u);
    if residual > UNITARITY_TOL * (u.nrows() as f64).sqrt() {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

/// Checks `p = p* = p²` and returns `p` as a Hermitian matrix.
pub fn check_projection(p: &CMatrix) -> Result<HermitianMatrix> {
    if p.nrows() != p.ncols() {
        return Err(Error::NotSquare {
            rows: p.nrows(),
            cols: p.ncols(),
        });
    }
    let scale = frobenius(p).max(1.0);
    let residual = frobenius(&(p * p - p)).max(frobenius(&(p - p.adjoint())));
    if residual > UNITARITY_TOL * scale {
        return Err(Error::NotProjection { residual });
    }
    Ok(HermitianMatrix::hermitian_part(p.clone()))
}

/// `pxp + s(1 − p)`: the compression of `x` to the range of `p`, padded by
/// the scalar `s` on the complement.
pub fn compress(x: &HermitianMatrix, p: &HermitianMatrix, s: f64) -> HermitianMatrix {
    let pm = p.as_matrix();
    let n = x.dim();
    let m = pm * x.as_matrix() * pm + (identity(n) - pm).scale(s);
    HermitianMatrix::hermitian_part(m)
}

/// Residuals of the two covariance conditions a spectral function obeys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DavisReport {
    /// `‖f(u*xu) − u*f(x)u‖_F`
    pub conjugation_residual: f64,
    /// `‖p f(x) p − p f(pxp + s(1−p)) p‖_F`
    pub block_residual: f64,
    /// `‖p f(x) − f(x) p‖_F`
    pub commutation_residual: f64,
    pub scale: f64,
    pub holds: bool,
}

/// Checks conjugation covariance under `u` and block compatibility under a
/// projection `p` commuting with `x`. The compressed block is embedded back
/// by padding with `s` on the complement of `p`.
pub fn davis_property_check<F: RealFunction + ?Sized>(
    f: &F,
    x: &HermitianMatrix,
    u: &CMatrix,
    p: &CMatrix,
    s: f64,
    tol: &ToleranceProfile,
) -> Result<DavisReport> {
    let n = x.dim();
    for d in [u.nrows(), p.nrows()] {
        if d != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: d,
            });
        }
    }
    check_unitary(u)?;
    let p = check_projection(p)?;
    let pm = p.as_matrix();
    let comm = frobenius(&(pm * x.as_matrix() - x.as_matrix() * pm));
    if comm > tol.eq_slack(x.norm()) {
        return Err(Error::NotCommuting { residual: comm });
    }

    let fx = apply_function(f, x, tol)?;
    let conj = x.congruence(u);
    let f_conj = apply_function(f, &conj, tol)?;
    let conjugation_residual = frobenius(&(f_conj.as_matrix() - u.adjoint() * fx.as_matrix() * u));

    let compressed = compress(x, &p, s);
    let f_comp = apply_function(f, &compressed, tol)?;
    let block_residual =
        frobenius(&(pm * fx.as_matrix() * pm - pm * f_comp.as_matrix() * pm));
    let commutation_residual = frobenius(&(pm * fx.as_matrix() - fx.as_matrix() * pm));

    let scale = fx.norm().max(1.0);
    let allowed = tol.eq_slack(scale);
    Ok(DavisReport {
        conjugation_residual,
        block_residual,
        commutation_residual,
        scale,
        holds: conjugation_residual <= allowed
            && block_residual <= allowed
            && commutation_residual <= allowed,
    })
}
