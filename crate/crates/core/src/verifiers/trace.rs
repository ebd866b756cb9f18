use serde::Serialize;

use super::context;
use crate::columns::{ColumnKind, OperatorColumn};
use crate::error::{Error, Result};
use crate::spectral::{apply_with_decomposition, checked_eval, CMatrix, HermitianMatrix, RealFunction};
use crate::tolerance::ToleranceProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    Unital,
    Contractive,
}

/// The atomic measure attached to one eigenvector `ξ` of
/// `y = Σ a_k* x_k a_k`: an atom at every eigenvalue `λ` of every `x_k` with
/// mass `‖E_k(λ) a_k ξ‖²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EigenWitness {
    /// Eigenvalue of `y` at `ξ`.
    pub eigenvalue: f64,
    pub mass: f64,
    pub barycenter: f64,
    /// `∫ f dμ_ξ`
    pub integral_f: f64,
    pub f_at_eigenvalue: f64,
    /// `∫ f dμ_ξ − f(eigenvalue)`; these sum to the trace gap.
    pub pointwise_gap: f64,
    /// Scalar Jensen gap of the probability measure obtained by putting the
    /// missing mass `1 − mass` at 0 (equal to `pointwise_gap` when unital).
    pub jensen_gap: f64,
    /// `(λ, mass)` pairs.
    pub atoms: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceReport {
    pub context: String,
    pub mode: TraceMode,
    /// `Tr(Σ a_k* f(x_k) a_k) − Tr f(y)`
    pub gap: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub scale: f64,
    pub holds: bool,
    pub witnesses: Vec<EigenWitness>,
    /// `max |mass − 1|` (unital mode) or `max(mass − 1, 0)` (contractive).
    pub mass_residual: f64,
    pub barycenter_residual: f64,
    /// `|Σ pointwise gaps − gap|`
    pub aggregation_residual: f64,
    /// Least scalar Jensen gap over all witnesses.
    pub min_pointwise_jensen: f64,
}

/// Trace form of the Jensen inequality together with the per-eigenvector
/// witness measures that prove it.
pub fn trace_jensen_report<F: RealFunction + ?Sized>(
    f: &F,
    col: &OperatorColumn,
    xs: &[HermitianMatrix],
    mode: TraceMode,
    tol: &ToleranceProfile,
) -> Result<TraceReport> {
    col.check_operands(xs)?;
    let class = col.classify(tol);
    let f_zero = match (mode, class.kind) {
        (TraceMode::Unital, ColumnKind::Unital) => None,
        (TraceMode::Unital, _) => {
            return Err(Error::NotUnital {
                defect: class.unital_defect,
            })
        }
        (TraceMode::Contractive, ColumnKind::Neither) => {
            return Err(Error::NotUnitalOrContractive {
                min_eig: class.contraction_margin,
            })
        }
        (TraceMode::Contractive, _) => {
            if !f.domain().contains_with_slack(0.0, tol.order) {
                return Err(Error::ZeroNotInDomain {
                    domain: f.domain().to_string(),
                });
            }
            Some(checked_eval(f, 0.0, tol.order)?)
        }
    };
    let m = col.block_dim();

    let x_eigs: Vec<_> = xs.iter().map(HermitianMatrix::eigen).collect();
    let fxs = x_eigs
        .iter()
        .map(|e| apply_with_decomposition(f, e, tol))
        .collect::<Result<Vec<_>>>()?;
    let f_atoms: Vec<Vec<f64>> = x_eigs
        .iter()
        .map(|e| e.eigenvalues.iter().map(|&l| checked_eval(f, l, tol.order * l.abs().max(1.0))).collect())
        .collect::<Result<Vec<_>>>()?;

    let y = col.combine(xs)?;
    let y_eig = y.eigen();
    let fy = apply_with_decomposition(f, &y_eig, tol)?;
    let rhs_matrix = col.combine(&fxs)?;
    let lhs = fy.trace();
    let rhs = rhs_matrix.trace();
    let gap = rhs - lhs;

    let mut witnesses = Vec::with_capacity(m);
    for (j, &eigenvalue) in y_eig.eigenvalues.iter().enumerate() {
        let xi = y_eig.eigenvectors.column(j);
        let mut atoms = Vec::new();
        let (mut mass, mut first, mut integral_f) = (0.0, 0.0, 0.0);
        for ((a, e), fvals) in col.blocks().iter().zip(&x_eigs).zip(&f_atoms) {
            let a_xi = a * xi;
            let coords = e.eigenvectors.adjoint() * a_xi;
            for (i, &lambda) in e.eigenvalues.iter().enumerate() {
                let w = coords[i].norm_sqr();
                atoms.push((lambda, w));
                mass += w;
                first += lambda * w;
                integral_f += fvals[i] * w;
            }
        }
        let f_at_eigenvalue = checked_eval(f, eigenvalue, tol.order * eigenvalue.abs().max(1.0))?;
        let pointwise_gap = integral_f - f_at_eigenvalue;
        let jensen_gap = match f_zero {
            Some(f0) => pointwise_gap + (1.0 - mass) * f0,
            None => pointwise_gap,
        };
        witnesses.push(EigenWitness {
            eigenvalue,
            mass,
            barycenter: first,
            integral_f,
            f_at_eigenvalue,
            pointwise_gap,
            jensen_gap,
            atoms,
        });
    }

    let mass_residual = witnesses
        .iter()
        .map(|w| match mode {
            TraceMode::Unital => (w.mass - 1.0).abs(),
            TraceMode::Contractive => (w.mass - 1.0).max(0.0),
        })
        .fold(0.0, f64::max);
    let barycenter_residual = witnesses
        .iter()
        .map(|w| (w.barycenter - w.eigenvalue).abs())
        .fold(0.0, f64::max);
    let aggregated: f64 = witnesses.iter().map(|w| w.pointwise_gap).sum();
    let min_pointwise_jensen = witnesses
        .iter()
        .map(|w| w.jensen_gap)
        .fold(f64::INFINITY, f64::min);

    let scale = fxs.iter().map(HermitianMatrix::norm).fold(fy.norm(), f64::max).max(1.0);
    let holds = gap >= -tol.order * m as f64 * scale;

    let mut mats: Vec<&CMatrix> = col.blocks().iter().collect();
    mats.extend(xs.iter().map(HermitianMatrix::as_matrix));
    let name = match mode {
        TraceMode::Unital => "eq7",
        TraceMode::Contractive => "eq8",
    };
    Ok(TraceReport {
        context: context(name, &mats, &[]),
        mode,
        gap,
        lhs,
        rhs,
        scale,
        holds,
        witnesses,
        mass_residual,
        barycenter_residual,
        aggregation_residual: (aggregated - gap).abs(),
        min_pointwise_jensen,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScalarTraceReport {
    /// Gap computed through the matrix route.
    pub gap: f64,
    /// `m (λ f(s) + (1−λ) f(t) − f(λs + (1−λ)t))`
    pub expected: f64,
    pub residual: f64,
    pub holds: bool,
}

/// Trace inequality on the scalar instance `x = s·1_m`, `y = t·1_m`,
/// `a = √λ·1_m`, `b = √(1−λ)·1_m`.
pub fn scalar_trace_gap<F: RealFunction + ?Sized>(
    f: &F,
    s: f64,
    t: f64,
    lambda: f64,
    m: usize,
    tol: &ToleranceProfile,
) -> Result<ScalarTraceReport> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidConfig(format!("λ = {lambda} is not in [0, 1]")));
    }
    let col = OperatorColumn::scalars(m, &[lambda.sqrt(), (1.0 - lambda).sqrt()])?;
    let xs = [HermitianMatrix::scalar(m, s), HermitianMatrix::scalar(m, t)];
    let report = trace_jensen_report(f, &col, &xs, TraceMode::Unital, tol)?;
    let slack = tol.order;
    let fs = checked_eval(f, s, slack)?;
    let ft = checked_eval(f, t, slack)?;
    let fm = checked_eval(f, lambda * s + (1.0 - lambda) * t, slack)?;
    let expected = m as f64 * (lambda * fs + (1.0 - lambda) * ft - fm);
    Ok(ScalarTraceReport {
        gap: report.gap,
        expected,
        residual: (report.gap - expected).abs(),
        holds: report.holds,
    })
}
