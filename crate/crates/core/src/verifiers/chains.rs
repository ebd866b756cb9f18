use super::{context, operator_convexity_defect, jensen_operator_defect, ChainReport, ChainStep};
use crate::columns::{ColumnKind, OperatorColumn};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::pinching::PinchingSystem;
use crate::spectral::{
    apply_function, check_spectrum, checked_eval, compress, frobenius, unitarity_residual,
    CMatrix, HermitianMatrix, RealFunction,
};
use crate::tolerance::ToleranceProfile;

fn top_left(m: &CMatrix, k: usize) -> CMatrix {
    m.view((0, 0), (k, k)).into_owned()
}

/// Recovers ordinary convexity from the pinching inequality on the doubled
/// space, with
///
/// ```text
/// X = [x 0; 0 y],  U = [√λ  √(1−λ); −√(1−λ)  √λ],  P = [1 0; 0 0].
/// ```
///
/// `U*XU` has diagonal blocks `λx + (1−λ)y`, `λy + (1−λ)x` and both
/// off-diagonal blocks equal to `√(λ−λ²)(x − y)`.
pub fn two_point_reduction<F: RealFunction + ?Sized>(
    f: &F,
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    lambda: f64,
    s: f64,
    tol: &ToleranceProfile,
) -> Result<ChainReport> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidConfig(format!("λ = {lambda} is not in [0, 1]")));
    }
    checked_eval(f, s, tol.order)?;
    let m = x.dim();
    let big_x = HermitianMatrix::block_diagonal(&[x.clone(), y.clone()]);
    let (c, d) = (lambda.sqrt(), (1.0 - lambda).sqrt());
    let one = CMatrix::identity(m, m);
    let mut u = CMatrix::zeros(2 * m, 2 * m);
    u.view_mut((0, 0), (m, m)).copy_from(&one.scale(c));
    u.view_mut((0, m), (m, m)).copy_from(&one.scale(d));
    u.view_mut((m, 0), (m, m)).copy_from(&one.scale(-d));
    u.view_mut((m, m), (m, m)).copy_from(&one.scale(c));
    let mut p = CMatrix::zeros(2 * m, 2 * m);
    p.view_mut((0, 0), (m, m)).copy_from(&one);
    let p = HermitianMatrix::hermitian_part(p);

    let w = big_x.congruence(&u);
    let mean = x.scale(lambda).add(&y.scale(1.0 - lambda));
    let swapped = y.scale(lambda).add(&x.scale(1.0 - lambda));
    let off = x.sub(y).scale((lambda - lambda * lambda).sqrt());
    let mut expected = CMatrix::zeros(2 * m, 2 * m);
    expected.view_mut((0, 0), (m, m)).copy_from(mean.as_matrix());
    expected.view_mut((0, m), (m, m)).copy_from(off.as_matrix());
    expected.view_mut((m, 0), (m, m)).copy_from(off.as_matrix());
    expected.view_mut((m, m), (m, m)).copy_from(swapped.as_matrix());

    let f_big_x = apply_function(f, &big_x, tol)?;
    let f_mean = apply_function(f, &mean, tol)?;
    let compressed = compress(&w, &p, s);
    let f_compressed = apply_function(f, &compressed, tol)?;
    let pm = p.as_matrix();
    let lhs = pm * f_compressed.as_matrix() * pm;
    let rhs = pm * u.adjoint() * f_big_x.as_matrix() * &u * pm;
    let slack = HermitianMatrix::hermitian_part(top_left(&(rhs - &lhs), m));

    let scale = big_x.norm().max(f_big_x.norm()).max(1.0);
    let eq = tol.eq_slack(scale);
    let convexity = operator_convexity_defect(f, x, y, lambda, tol)?;
    let conv_matrix = convexity.defect_matrix().expect("matrix defect");

    let steps = vec![
        ChainStep::equality("unitary", unitarity_residual(&u), eq),
        ChainStep::equality("block-formula", frobenius(&(w.as_matrix() - expected)), eq),
        ChainStep::equality(
            "compressed-block",
            frobenius(&(top_left(&lhs, m) - f_mean.as_matrix())),
            eq,
        ),
        ChainStep::inequality("convexity-slack", slack.min_eigenvalue(), tol.order_slack(scale)),
        ChainStep::equality(
            "slack-matches-convexity-defect",
            frobenius(&(slack.as_matrix() - conv_matrix.as_matrix())),
            eq,
        ),
    ];
    Ok(ChainReport::new(
        context("twopoint", &[x.as_matrix(), y.as_matrix()], &[lambda, s]),
        scale,
        steps,
        slack,
    ))
}

/// Midpoint of the smallest interval containing every spectrum.
fn spectral_midpoint(xs: &[HermitianMatrix]) -> f64 {
    let (lo, hi) = Interval::hull(xs.iter().flat_map(|x| x.eigen().eigenvalues))
        .expect("at least one operand");
    0.5 * (lo + hi)
}

/// Replays the proof of the Jensen operator inequality for a unital column:
/// pad the column with a zero block, dilate it to a unitary `U`, pinch
/// `U* diag(x_1, …, x_{n+1}) U` and compare the last diagonal blocks.
///
/// `extra` is the free operand `x_{n+1}`; by default `s·1` with `s` the
/// midpoint of the spectral hull of `xs`.
pub fn replay_pinching_chain<F: RealFunction + ?Sized>(
    f: &F,
    col: &OperatorColumn,
    xs: &[HermitianMatrix],
    extra: Option<HermitianMatrix>,
    tol: &ToleranceProfile,
) -> Result<ChainReport> {
    col.check_operands(xs)?;
    let class = col.classify(tol);
    if class.kind != ColumnKind::Unital {
        return Err(Error::NotUnital {
            defect: class.unital_defect,
        });
    }
    let m = col.block_dim();
    let n = col.len();
    let extra = extra.unwrap_or_else(|| HermitianMatrix::scalar(m, spectral_midpoint(xs)));
    if extra.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: extra.dim(),
        });
    }
    let domain = f.domain();
    for x in xs.iter().chain(std::iter::once(&extra)) {
        check_spectrum(x, &domain, tol)?;
    }

    let u = col.canonical_dilation(tol)?;
    let mut operands = xs.to_vec();
    operands.push(extra.clone());
    let big_x = HermitianMatrix::block_diagonal(&operands);
    let f_operands = operands
        .iter()
        .map(|x| apply_function(f, x, tol))
        .collect::<Result<Vec<_>>>()?;
    let f_big_x = HermitianMatrix::block_diagonal(&f_operands);
    let sys = PinchingSystem::new(n + 1, m)?;
    let last = n;

    let y = col.combine(xs)?;
    let rhs = col.combine(&f_operands[..n])?;

    let w = big_x.congruence(&u);
    let pinched = HermitianMatrix::hermitian_part(sys.pinch(w.as_matrix())?);
    let f_pinched = apply_function(f, &pinched, tol)?;
    let f_blocks = (0..=n)
        .map(|k| {
            let block = HermitianMatrix::hermitian_part(sys.block(w.as_matrix(), k, k));
            apply_function(f, &block, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let f_w = apply_function(f, &w, tol)?;
    let conj_f = f_big_x.congruence(&u);
    let pinched_f = HermitianMatrix::hermitian_part(sys.pinch(conj_f.as_matrix())?);

    let slack = HermitianMatrix::hermitian_part(
        sys.block(pinched_f.as_matrix(), last, last) - sys.block(f_pinched.as_matrix(), last, last),
    );
    let jensen = jensen_operator_defect(f, col, xs, tol)?;

    let scale = big_x.norm().max(f_big_x.norm()).max(1.0);
    let eq = tol.eq_slack(scale);
    let steps = vec![
        ChainStep::equality("dilation-unitary", unitarity_residual(&u), eq),
        ChainStep::equality(
            "e1",
            frobenius(&(sys.block(w.as_matrix(), last, last) - y.as_matrix())),
            eq,
        ),
        ChainStep::equality(
            "e2",
            frobenius(&(pinched.as_matrix() - sys.block_diagonal_part(w.as_matrix())?))
                .max(frobenius(&(sys.block(pinched.as_matrix(), last, last) - y.as_matrix()))),
            eq,
        ),
        ChainStep::equality(
            "e3",
            frobenius(&(f_pinched.as_matrix() - HermitianMatrix::block_diagonal(&f_blocks).as_matrix())),
            eq,
        ),
        ChainStep::equality(
            "e4-covariance",
            frobenius(&(f_w.as_matrix() - conj_f.as_matrix())),
            eq,
        ),
        ChainStep::inequality("e4", slack.min_eigenvalue(), tol.order_slack(scale)),
        ChainStep::equality(
            "e5",
            frobenius(&(sys.block(conj_f.as_matrix(), last, last) - rhs.as_matrix())),
            eq,
        ),
        ChainStep::equality(
            "total",
            frobenius(
                &(slack.as_matrix() - jensen.defect_matrix().expect("matrix defect").as_matrix()),
            ),
            eq,
        ),
    ];
    let mut mats: Vec<&CMatrix> = col.blocks().iter().collect();
    mats.extend(operands.iter().map(HermitianMatrix::as_matrix));
    Ok(ChainReport::new(context("chain16", &mats, &[]), scale, steps, slack))
}
