//! Positive functionals `φ = trace(ρ·)`, their centralizers, the conditional
//! expectation onto the algebra generated by a self-adjoint `y`, and the
//! Jensen inequality for atomic fields of operators.

use rand::Rng;
use serde::Serialize;

use crate::columns::{random_unital_column, OperatorColumn};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::sampling::random_hermitian_in_with;
use crate::spectral::{
    apply_function, block_diagonal, checked_eval, frobenius, identity, CMatrix, HermitianMatrix,
    RealFunction, SpectralDecomposition, C64,
};
use crate::tolerance::ToleranceProfile;
use crate::verifiers::context;

/// `φ(x) = trace(ρx)` for a positive semidefinite density `ρ`. The trace of
/// `ρ` is kept as given.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    rho: HermitianMatrix,
    trace: f64,
}

impl State {
    pub fn new(rho: HermitianMatrix, tol: &ToleranceProfile) -> Result<Self> {
        let min_eig = rho.min_eigenvalue();
        if min_eig < -tol.order {
            return Err(Error::InvalidState(format!(
                "density has negative eigenvalue {min_eig:e}"
            )));
        }
        let trace = rho.trace();
        if trace.is_nan() || trace <= 0.0 {
            return Err(Error::InvalidState(format!("density has trace {trace}")));
        }
        Ok(Self { rho, trace })
    }

    /// The normalized trace `(1/m)·trace`.
    pub fn tracial(m: usize) -> Self {
        Self {
            rho: HermitianMatrix::scalar(m, 1.0 / m as f64),
            trace: 1.0,
        }
    }

    pub fn rho(&self) -> &HermitianMatrix {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn phi(&self, x: &CMatrix) -> C64 {
        (self.rho.as_matrix() * x).trace()
    }

    /// `φ(x)` for self-adjoint `x`, which is real.
    pub fn phi_real(&self, x: &HermitianMatrix) -> f64 {
        self.phi(x.as_matrix()).re
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: d,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CentralizerReport {
    pub in_centralizer: bool,
    /// `‖ρy − yρ‖_F`
    pub commutator_norm: f64,
    pub allowed: f64,
}

pub fn centralizer_test(
    state: &State,
    y: &HermitianMatrix,
    tol: &ToleranceProfile,
) -> Result<CentralizerReport> {
    state.check_dim(y.dim())?;
    let (r, ym) = (state.rho.as_matrix(), y.as_matrix());
    let commutator_norm = frobenius(&(r * ym - ym * r));
    let allowed = tol.eq_slack(state.rho.norm() * y.norm());
    Ok(CentralizerReport {
        in_centralizer: commutator_norm <= allowed,
        commutator_norm,
        allowed,
    })
}

/// `max |φ(e_ij y) − φ(y e_ij)|` over all matrix units. Zero exactly when
/// `y` is in the centralizer; quadratic cost, meant for small dimensions.
pub fn matrix_unit_defect(state: &State, y: &HermitianMatrix) -> Result<f64> {
    state.check_dim(y.dim())?;
    let m = y.dim();
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let mut e = CMatrix::zeros(m, m);
            e[(i, j)] = C64::new(1.0, 0.0);
            let d = state.phi(&(&e * y.as_matrix())) - state.phi(&(y.as_matrix() * &e));
            worst = worst.max(d.norm());
        }
    }
    Ok(worst)
}

/// One eigenspace of `y` that carries positive mass under `φ`.
#[derive(Debug, Clone)]
struct Atom {
    value: f64,
    projection: CMatrix,
    mass: f64,
}

struct Resolution {
    atoms: Vec<Atom>,
    dropped: usize,
}

fn resolve(state: &State, y: &HermitianMatrix, tol: &ToleranceProfile) -> Result<(Resolution, SpectralDecomposition)> {
    let report = centralizer_test(state, y, tol)?;
    if !report.in_centralizer {
        return Err(Error::NotInCentralizer {
            commutator_norm: report.commutator_norm,
        });
    }
    let eig = y.eigen();
    let spread = eig.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let floor = tol.eq * state.trace;
    let mut atoms = Vec::new();
    let mut dropped = 0;
    for space in eig.eigenspaces(tol.eq_slack(spread)) {
        let projection = eig.projection(space.columns.clone());
        let mass = state.phi(&projection).re;
        if mass > floor {
            atoms.push(Atom {
                value: space.value,
                projection,
                mass,
            });
        } else {
            dropped += 1;
        }
    }
    if atoms.is_empty() {
        return Err(Error::AllMassZero);
    }
    Ok((Resolution { atoms, dropped }, eig))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExpectationPoint {
    /// Eigenvalue `λ_i` of `y`.
    pub eigenvalue: f64,
    /// `φ(P_i)`
    pub weight: f64,
    /// `Φ(x)(λ_i) = φ(P_i x) / φ(P_i)`
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionalExpectation {
    pub points: Vec<ExpectationPoint>,
    /// Eigenspaces of `y` with `φ(P_i) = 0`, left out.
    pub dropped: usize,
    /// `|φ(yx) − Σ λ_i Φ(x)(λ_i) φ(P_i)|`
    pub pairing_residual: f64,
}

impl ConditionalExpectation {
    /// Value at the eigenvalue closest to `lambda`.
    pub fn value_at(&self, lambda: f64) -> f64 {
        self.points
            .iter()
            .min_by(|a, b| (a.eigenvalue - lambda).abs().total_cmp(&(b.eigenvalue - lambda).abs()))
            .map(|p| p.value)
            .unwrap_or(f64::NAN)
    }
}

/// The conditional expectation of `x` onto the functions of `y`, as a table
/// over the spectrum of `y`.
pub fn conditional_expectation(
    state: &State,
    y: &HermitianMatrix,
    x: &HermitianMatrix,
    tol: &ToleranceProfile,
) -> Result<ConditionalExpectation> {
    state.check_dim(x.dim())?;
    let (res, _) = resolve(state, y, tol)?;
    let points: Vec<ExpectationPoint> = res
        .atoms
        .iter()
        .map(|a| ExpectationPoint {
            eigenvalue: a.value,
            weight: a.mass,
            value: state.phi(&(&a.projection * x.as_matrix())).re / a.mass,
        })
        .collect();
    let direct = state.phi(&(y.as_matrix() * x.as_matrix())).re;
    let paired: f64 = points.iter().map(|p| p.eigenvalue * p.value * p.weight).sum();
    Ok(ConditionalExpectation {
        points,
        dropped: res.dropped,
        pairing_residual: (direct - paired).abs(),
    })
}

/// `|φ(g(y)x) − Σ_i g(λ_i) Φ(x)(λ_i) φ(P_i)|` for an arbitrary scalar `g`.
pub fn pairing_residual(
    state: &State,
    y: &HermitianMatrix,
    x: &HermitianMatrix,
    g: impl Fn(f64) -> f64,
    tol: &ToleranceProfile,
) -> Result<f64> {
    let table = conditional_expectation(state, y, x, tol)?;
    let gy = y.eigen().map(&g);
    let direct = state.phi(&(gy * x.as_matrix())).re;
    let paired: f64 = table
        .points
        .iter()
        .map(|p| g(p.eigenvalue) * p.value * p.weight)
        .sum();
    Ok((direct - paired).abs())
}

/// `max_i |Φ(g(y)x)(λ_i) − g(λ_i) Φ(x)(λ_i)|`. The product `g(y)x` need not be
/// self-adjoint, so `Φ` is evaluated on it as a complex functional.
pub fn module_map_residual(
    state: &State,
    y: &HermitianMatrix,
    x: &HermitianMatrix,
    g: impl Fn(f64) -> f64,
    tol: &ToleranceProfile,
) -> Result<f64> {
    state.check_dim(x.dim())?;
    let (res, eig) = resolve(state, y, tol)?;
    let gyx = eig.map(&g) * x.as_matrix();
    let mut worst = 0.0f64;
    for a in &res.atoms {
        let lhs = state.phi(&(&a.projection * &gyx)) / a.mass;
        let rhs = state.phi(&(&a.projection * x.as_matrix())) / a.mass * g(a.value);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// One atom `(w_j, a_j, x_j)` of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPoint {
    pub weight: f64,
    pub a: CMatrix,
    pub x: HermitianMatrix,
}

/// A unital column field over a finite measure: `Σ w_j a_j* a_j = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicField {
    points: Vec<FieldPoint>,
    dim: usize,
}

impl AtomicField {
    /// `unital_tol` is the allowed `‖Σ w a*a − 1‖_F` per unit of `√m`.
    pub fn new(points: Vec<FieldPoint>, unital_tol: f64) -> Result<Self> {
        let first = points.first().ok_or(Error::Empty)?;
        let dim = first.x.dim();
        for (k, p) in points.iter().enumerate() {
            if !(p.weight.is_finite() && p.weight > 0.0) {
                return Err(Error::Malformed(format!(
                    "points[{k}].w must be positive, got {}",
                    p.weight
                )));
            }
            if p.x.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.x.dim(),
                });
            }
            if p.a.nrows() != dim || p.a.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: if p.a.nrows() != dim { p.a.nrows() } else { p.a.ncols() },
                });
            }
        }
        let field = Self { points, dim };
        let defect = frobenius(&(field.gram() - identity(dim)));
        if defect > unital_tol * (dim as f64).sqrt() {
            return Err(Error::NotUnitalField { defect });
        }
        Ok(field)
    }

    pub fn points(&self) -> &[FieldPoint] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn gram(&self) -> CMatrix {
        self.points.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, p| {
            acc + p.a.adjoint() * &p.a * C64::new(p.weight, 0.0)
        })
    }

    /// `Σ w_j a_j* z_j a_j`
    pub fn integrate(&self, zs: &[HermitianMatrix]) -> HermitianMatrix {
        let sum = self
            .points
            .iter()
            .zip(zs)
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, (p, z)| {
                acc + p.a.adjoint() * z.as_matrix() * &p.a * C64::new(p.weight, 0.0)
            });
        HermitianMatrix::hermitian_part(sum)
    }

    /// `y = Σ w_j a_j* x_j a_j`
    pub fn y(&self) -> HermitianMatrix {
        let xs: Vec<HermitianMatrix> = self.points.iter().map(|p| p.x.clone()).collect();
        self.integrate(&xs)
    }

    /// The same data as an operator column with blocks `√w_j a_j`.
    pub fn as_column(&self) -> OperatorColumn {
        OperatorColumn::new(
            self.points
                .iter()
                .map(|p| &p.a * C64::new(p.weight.sqrt(), 0.0))
                .collect(),
        )
        .expect("field points have consistent square blocks")
    }

    pub fn operands(&self) -> Vec<HermitianMatrix> {
        self.points.iter().map(|p| p.x.clone()).collect()
    }
}

/// `⊕ M_{m_i}` with the finite trace `τ(x) = Σ c_i trace(x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockTraceAlgebra {
    blocks: Vec<usize>,
    weights: Vec<f64>,
}

impl BlockTraceAlgebra {
    pub fn new(blocks: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Empty);
        }
        if blocks.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: blocks.len(),
                found: weights.len(),
            });
        }
        if let Some(k) = blocks.iter().position(|&m| m == 0) {
            return Err(Error::Malformed(format!("blocks[{k}] must be at least 1")));
        }
        if let Some(k) = weights.iter().position(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::Malformed(format!(
                "weights[{k}] must be positive, got {}",
                weights[k]
            )));
        }
        Ok(Self { blocks, weights })
    }

    /// The full matrix algebra `M_m` with the ordinary trace.
    pub fn full(m: usize) -> Self {
        Self {
            blocks: vec![m],
            weights: vec![1.0],
        }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// `diag(c_1·1_{m_1}, …, c_r·1_{m_r})`, so that `τ = trace(density ·)`.
    pub fn density(&self) -> HermitianMatrix {
        let diag: Vec<f64> = self
            .blocks
            .iter()
            .zip(&self.weights)
            .flat_map(|(&m, &c)| std::iter::repeat_n(c, m))
            .collect();
        HermitianMatrix::from_real_diagonal(&diag)
    }

    pub fn state(&self) -> State {
        let rho = self.density();
        let trace = rho.trace();
        State { rho, trace }
    }

    fn offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, &m| {
                let o = *acc;
                *acc += m;
                Some(o)
            })
            .collect()
    }

    /// `τ(x)`, reading only the diagonal blocks of `x`.
    pub fn tau(&self, x: &CMatrix) -> C64 {
        self.offsets()
            .iter()
            .zip(&self.blocks)
            .zip(&self.weights)
            .map(|((&o, &m), &c)| x.view((o, o), (m, m)).trace() * c)
            .sum()
    }

    pub fn embed(&self, parts: &[CMatrix]) -> Result<CMatrix> {
        if parts.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch {
                expected: self.blocks.len(),
                found: parts.len(),
            });
        }
        for (p, &m) in parts.iter().zip(&self.blocks) {
            if p.nrows() != m || p.ncols() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: p.nrows(),
                });
            }
        }
        Ok(block_diagonal(parts))
    }

    /// Worst `|τ(uv) − τ(vu)|` over pairs of matrix units of the algebra.
    pub fn trace_property_defect(&self) -> f64 {
        let d = self.dim();
        let mut units = Vec::new();
        for (&o, &m) in self.offsets().iter().zip(&self.blocks) {
            for i in 0..m {
                for j in 0..m {
                    let mut e = CMatrix::zeros(d, d);
                    e[(o + i, o + j)] = C64::new(1.0, 0.0);
                    units.push(e);
                }
            }
        }
        let mut worst = 0.0f64;
        for u in &units {
            for v in &units {
                worst = worst.max((self.tau(&(u * v)) - self.tau(&(v * u))).norm());
            }
        }
        worst
    }
}

/// Per-eigenspace witness for the field inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FieldWitness {
    pub eigenvalue: f64,
    /// `φ(P_i)`
    pub weight: f64,
    /// `μ_i(1)`
    pub mass: f64,
    /// `μ_i(id)`
    pub barycenter: f64,
    /// `μ_i(f)`
    pub integral_f: f64,
    pub f_at_eigenvalue: f64,
    /// `μ_i(f) − f(λ_i)`
    pub slack: f64,
    /// Expanded form of `μ_i`: `(eigenvalue of x_j, mass)` pairs.
    pub atoms: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FieldReport {
    pub context: String,
    /// `φ(Σ w a* f(x) a) − φ(f(y))`
    pub gap: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub scale: f64,
    pub holds: bool,
    pub witnesses: Vec<FieldWitness>,
    pub dropped: usize,
    pub mass_residual: f64,
    pub barycenter_residual: f64,
    /// `|Σ φ(P_i)·slack_i − gap|`
    pub aggregation_residual: f64,
    pub min_pointwise_slack: f64,
    pub commutator_norm: f64,
}

pub fn field_jensen_gap<F: RealFunction + ?Sized>(
    f: &F,
    field: &AtomicField,
    state: &State,
    tol: &ToleranceProfile,
) -> Result<FieldReport> {
    state.check_dim(field.dim())?;
    let x_eigs: Vec<SpectralDecomposition> = field.points.iter().map(|p| p.x.eigen()).collect();
    let fxs = x_eigs
        .iter()
        .map(|e| crate::spectral::apply_with_decomposition(f, e, tol))
        .collect::<Result<Vec<_>>>()?;
    let y = field.y();
    let fy = apply_function(f, &y, tol)?;
    let (res, _) = resolve(state, &y, tol)?;
    let commutator_norm = centralizer_test(state, &y, tol)?.commutator_norm;

    let integrated_f = field.integrate(&fxs);
    let gram = HermitianMatrix::hermitian_part(field.gram());
    let lhs = state.phi_real(&fy);
    let rhs = state.phi_real(&integrated_f);
    let gap = rhs - lhs;

    let mut witnesses = Vec::with_capacity(res.atoms.len());
    for atom in &res.atoms {
        let mu = |z: &HermitianMatrix| state.phi(&(&atom.projection * z.as_matrix())).re / atom.mass;
        let integral_f = mu(&integrated_f);
        let f_at_eigenvalue = checked_eval(f, atom.value, tol.order_slack(atom.value.abs()))?;
        let mut atoms = Vec::new();
        for (p, e) in field.points.iter().zip(&x_eigs) {
            // a_j P_i a_j* pushed through the spectral projections of x_j.
            let local = &p.a * state.rho.as_matrix() * &atom.projection * p.a.adjoint();
            let coords = e.eigenvectors.adjoint() * local * &e.eigenvectors;
            for (k, &l) in e.eigenvalues.iter().enumerate() {
                atoms.push((l, p.weight * coords[(k, k)].re / atom.mass));
            }
        }
        witnesses.push(FieldWitness {
            eigenvalue: atom.value,
            weight: atom.mass,
            mass: mu(&gram),
            barycenter: mu(&y),
            integral_f,
            f_at_eigenvalue,
            slack: integral_f - f_at_eigenvalue,
            atoms,
        });
    }

    let mass_residual = witnesses.iter().map(|w| (w.mass - 1.0).abs()).fold(0.0, f64::max);
    let barycenter_residual = witnesses
        .iter()
        .map(|w| (w.barycenter - w.eigenvalue).abs())
        .fold(0.0, f64::max);
    let aggregated: f64 = witnesses.iter().map(|w| w.weight * w.slack).sum();
    let min_pointwise_slack = witnesses.iter().map(|w| w.slack).fold(f64::INFINITY, f64::min);
    let scale = state.trace * fxs.iter().map(HermitianMatrix::norm).fold(fy.norm(), f64::max).max(1.0);

    let mut mats: Vec<&CMatrix> = vec![state.rho.as_matrix()];
    for p in &field.points {
        mats.push(&p.a);
        mats.push(p.x.as_matrix());
    }
    let weights: Vec<f64> = field.points.iter().map(|p| p.weight).collect();
    Ok(FieldReport {
        context: context("eq9", &mats, &weights),
        gap,
        lhs,
        rhs,
        scale,
        holds: gap >= -tol.order_slack(scale),
        witnesses,
        dropped: res.dropped,
        mass_residual,
        barycenter_residual,
        aggregation_residual: (aggregated - gap).abs(),
        min_pointwise_slack,
        commutator_norm,
    })
}

/// Field with `n` points of random positive weight whose weighted blocks
/// form a random unital column, operands with spectra in `interval`.
pub fn random_field<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    interval: &Interval,
    rng: &mut R,
) -> Result<AtomicField> {
    let col = random_unital_column(n, m, rng);
    let mut points = Vec::with_capacity(n);
    for a in col.blocks() {
        let weight = 0.25 + rng.random::<f64>();
        points.push(FieldPoint {
            weight,
            a: a * C64::new(1.0 / weight.sqrt(), 0.0),
            x: random_hermitian_in_with(m, interval, rng)?,
        });
    }
    AtomicField::new(points, 1e-9)
}

/// Field whose blocks and operands all lie in the block algebra, so that
/// `y` is block diagonal and commutes with the algebra's density.
pub fn random_block_field<R: Rng + ?Sized>(
    algebra: &BlockTraceAlgebra,
    n: usize,
    interval: &Interval,
    rng: &mut R,
) -> Result<AtomicField> {
    let weights: Vec<f64> = (0..n).map(|_| 0.25 + rng.random::<f64>()).collect();
    let mut a_parts: Vec<Vec<CMatrix>> = vec![Vec::new(); n];
    let mut x_parts: Vec<Vec<CMatrix>> = vec![Vec::new(); n];
    for &m in algebra.blocks() {
        let col = random_unital_column(n, m, rng);
        for (j, a) in col.blocks().iter().enumerate() {
            a_parts[j].push(a * C64::new(1.0 / weights[j].sqrt(), 0.0));
            x_parts[j].push(random_hermitian_in_with(m, interval, rng)?.into_matrix());
        }
    }
    let points = (0..n)
        .map(|j| {
            Ok(FieldPoint {
                weight: weights[j],
                a: algebra.embed(&a_parts[j])?,
                x: HermitianMatrix::new(algebra.embed(&x_parts[j])?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    AtomicField::new(points, 1e-9)
}

/// `ρ = h(y) / trace h(y)` with `h(t) = exp(αt + βt²)` for random `α, β`.
/// Any such `ρ` commutes with `y`.
pub fn random_centralizing_state<R: Rng + ?Sized>(y: &HermitianMatrix, rng: &mut R) -> State {
    let alpha = rng.random_range(-1.0..1.0);
    let beta = rng.random_range(-0.5..0.5);
    let h = HermitianMatrix::hermitian_part(y.eigen().map(|t| (alpha * t + beta * t * t).exp()));
    let tr = h.trace();
    let rho = h.scale(1.0 / tr);
    State { rho, trace: 1.0 }
}
