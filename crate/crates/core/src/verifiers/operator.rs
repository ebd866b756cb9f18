use super::{context, ChainStep, DefectReport};
use crate::columns::{ColumnKind, OperatorColumn};
use crate::error::{Error, Result};
use crate::spectral::{
    apply_function, check_projection, checked_eval, compress, frobenius, CMatrix, HermitianMatrix,
    Isometry, RealFunction,
};
use crate::tolerance::ToleranceProfile;

fn same_dim(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidConfig(format!("λ = {lambda} is not in [0, 1]")));
    }
    Ok(())
}

/// `λ f(x) + (1−λ) f(y) − f(λx + (1−λ)y)`
pub fn operator_convexity_defect<F: RealFunction + ?Sized>(
    f: &F,
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    lambda: f64,
    tol: &ToleranceProfile,
) -> Result<DefectReport> {
    same_dim(x, y)?;
    check_lambda(lambda)?;
    let fx = apply_function(f, x, tol)?;
    let fy = apply_function(f, y, tol)?;
    let z = x.scale(lambda).add(&y.scale(1.0 - lambda));
    let fz = apply_function(f, &z, tol)?;
    let defect = fx.scale(lambda).add(&fy.scale(1.0 - lambda)).sub(&fz);
    let scale = fx.norm().max(fy.norm()).max(fz.norm());
    Ok(DefectReport::from_matrix(
        context("eq3", &[x.as_matrix(), y.as_matrix()], &[lambda]),
        defect,
        scale,
        tol,
    ))
}

/// `Σ a_k* f(x_k) a_k − f(Σ a_k* x_k a_k)`.
///
/// Unital columns are evaluated directly. A contractive column requires
/// `0 ∈ domain(f)`; its defect is still the one for the original column, and
/// the report carries the completion `a_{n+1} = (1 − Σ a*a)^{1/2}`,
/// `x_{n+1} = 0` as extra steps: the defect of the completed unital column and
/// the identity `D_contractive = D_unital − a_{n+1}* f(0) a_{n+1}`.
pub fn jensen_operator_defect<F: RealFunction + ?Sized>(
    f: &F,
    col: &OperatorColumn,
    xs: &[HermitianMatrix],
    tol: &ToleranceProfile,
) -> Result<DefectReport> {
    col.check_operands(xs)?;
    let class = col.classify(tol);
    let name = match class.kind {
        ColumnKind::Unital => "eq5",
        ColumnKind::Contractive => "eq6",
        ColumnKind::Neither => {
            return Err(Error::NotUnitalOrContractive {
                min_eig: class.contraction_margin,
            })
        }
    };
    let f_zero = if class.kind == ColumnKind::Contractive {
        if !f.domain().contains_with_slack(0.0, tol.order) {
            return Err(Error::ZeroNotInDomain {
                domain: f.domain().to_string(),
            });
        }
        Some(checked_eval(f, 0.0, tol.order)?)
    } else {
        None
    };

    let fxs = xs
        .iter()
        .map(|x| apply_function(f, x, tol))
        .collect::<Result<Vec<_>>>()?;
    let y = col.combine(xs)?;
    let fy = apply_function(f, &y, tol)?;
    let rhs = col.combine(&fxs)?;
    let defect = rhs.sub(&fy);
    let scale = fxs
        .iter()
        .map(HermitianMatrix::norm)
        .fold(fy.norm(), f64::max);

    let mut mats: Vec<&CMatrix> = col.blocks().iter().collect();
    mats.extend(xs.iter().map(HermitianMatrix::as_matrix));
    let mut report = DefectReport::from_matrix(context(name, &mats, &[]), defect, scale, tol);

    if let Some(f0) = f_zero {
        let completed = col.augment_to_unital(tol)?;
        let mut xs_completed = xs.to_vec();
        xs_completed.push(HermitianMatrix::zeros(col.block_dim()));
        let unital = jensen_operator_defect(f, &completed, &xs_completed, tol)?;
        let last = completed.blocks().last().expect("appended block");
        let correction = HermitianMatrix::hermitian_part(last.adjoint() * last).scale(f0);
        let unital_defect = unital.defect_matrix().expect("matrix defect");
        let residual = frobenius(
            &(report.defect_matrix().expect("matrix defect").as_matrix()
                - unital_defect.sub(&correction).as_matrix()),
        );
        report.steps.push(ChainStep::inequality(
            "completed-unital-defect",
            unital.min_eig,
            tol.order_slack(unital.scale),
        ));
        report.steps.push(ChainStep::equality(
            "completion-identity",
            residual,
            tol.eq_slack(scale),
        ));
    }
    Ok(report)
}

/// Projection form: `p f(x) p − p f(pxp + s(1−p)) p`.
pub fn pinching_defect<F: RealFunction + ?Sized>(
    f: &F,
    x: &HermitianMatrix,
    p: &CMatrix,
    s: f64,
    tol: &ToleranceProfile,
) -> Result<DefectReport> {
    if p.nrows() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: p.nrows(),
        });
    }
    let p = check_projection(p)?;
    checked_eval(f, s, tol.order)?;
    let fx = apply_function(f, x, tol)?;
    let compressed = compress(x, &p, s);
    let fc = apply_function(f, &compressed, tol)?;
    let pm = p.as_matrix();
    let defect = HermitianMatrix::hermitian_part(
        pm * fx.as_matrix() * pm - pm * fc.as_matrix() * pm,
    );
    Ok(DefectReport::from_matrix(
        context("pinch", &[x.as_matrix(), pm], &[s]),
        defect,
        fx.norm().max(fc.norm()),
        tol,
    ))
}

/// Isometry form: `v* f(x) v − f(v* x v)`.
pub fn isometry_defect<F: RealFunction + ?Sized>(
    f: &F,
    x: &HermitianMatrix,
    v: &Isometry,
    tol: &ToleranceProfile,
) -> Result<DefectReport> {
    if v.rows() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: v.rows(),
        });
    }
    let fx = apply_function(f, x, tol)?;
    let compressed = x.congruence(v.as_matrix());
    let fc = apply_function(f, &compressed, tol)?;
    let defect = fx.congruence(v.as_matrix()).sub(&fc);
    Ok(DefectReport::from_matrix(
        context("isometry", &[x.as_matrix(), v.as_matrix()], &[]),
        defect,
        fx.norm().max(fc.norm()),
        tol,
    ))
}

fn matrix_power(m: &CMatrix, k: u32) -> CMatrix {
    let mut out = CMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// `‖p v g(v*xv) v* p − p g(pxp + s(1−p)) p‖_F` for `g(t) = t^k`, `p = vv*`.
/// Zero in exact arithmetic for every `s`.
pub fn monomial_identity_residual(k: u32, x: &HermitianMatrix, v: &Isometry, s: f64) -> Result<f64> {
    if v.rows() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: v.rows(),
        });
    }
    let vm = v.as_matrix();
    let p = HermitianMatrix::hermitian_part(v.range_projection());
    let pm = p.as_matrix();
    let inner = x.congruence(vm);
    let lhs = pm * vm * matrix_power(inner.as_matrix(), k) * vm.adjoint() * pm;
    let compressed = compress(x, &p, s);
    let rhs = pm * matrix_power(compressed.as_matrix(), k) * pm;
    Ok(frobenius(&(lhs - rhs)))
}
