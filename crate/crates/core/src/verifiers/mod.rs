//! Defects (right side minus left side) of the Jensen-type inequalities and
//! numerical replays of the identities their proofs are built from.
//!
//! Every defect is oriented so that a positive semidefinite result means the
//! inequality holds.

mod chains;
mod operator;
mod trace;

pub use chains::{replay_pinching_chain, two_point_reduction};
pub use operator::{
    isometry_defect, jensen_operator_defect, monomial_identity_residual, operator_convexity_defect,
    pinching_defect,
};
pub use trace::{
    scalar_trace_gap, trace_jensen_report, EigenWitness, ScalarTraceReport, TraceMode, TraceReport,
};

use std::hash::{DefaultHasher, Hash, Hasher};

use serde::Serialize;

use crate::json::MatrixJson;
use crate::spectral::{CMatrix, HermitianMatrix};
use crate::tolerance::ToleranceProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Equality,
    Inequality,
}

/// One line of a chain: a residual for equalities, a slack (least
/// eigenvalue) for inequalities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStep {
    pub label: String,
    pub kind: StepKind,
    pub value: f64,
    pub allowed: f64,
    pub ok: bool,
}

impl ChainStep {
    pub fn equality(label: impl Into<String>, residual: f64, allowed: f64) -> Self {
        Self {
            label: label.into(),
            kind: StepKind::Equality,
            value: residual,
            allowed,
            ok: residual <= allowed,
        }
    }

    /// `allowed` is the (positive) slack; the step passes when `min_eig ≥ −allowed`.
    pub fn inequality(label: impl Into<String>, min_eig: f64, allowed: f64) -> Self {
        Self {
            label: label.into(),
            kind: StepKind::Inequality,
            value: min_eig,
            allowed,
            ok: min_eig >= -allowed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Defect {
    Matrix(HermitianMatrix),
    Scalar(f64),
}

impl Defect {
    pub fn matrix(&self) -> Option<&HermitianMatrix> {
        match self {
            Defect::Matrix(m) => Some(m),
            Defect::Scalar(_) => None,
        }
    }
}

impl Serialize for Defect {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Defect::Matrix(m) => MatrixJson::from(m).serialize(s),
            Defect::Scalar(v) => v.serialize(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DefectReport {
    pub context: String,
    pub min_eig: f64,
    pub holds: bool,
    pub scale: f64,
    /// Auxiliary identities checked along the way (may be empty).
    pub steps: Vec<ChainStep>,
    pub defect: Defect,
}

impl DefectReport {
    pub(crate) fn from_matrix(
        context: String,
        defect: HermitianMatrix,
        scale: f64,
        tol: &ToleranceProfile,
    ) -> Self {
        let scale = scale.max(1.0);
        let min_eig = defect.min_eigenvalue();
        Self {
            context,
            min_eig,
            holds: min_eig >= -tol.order_slack(scale),
            scale,
            steps: Vec::new(),
            defect: Defect::Matrix(defect),
        }
    }

    pub fn defect_matrix(&self) -> Option<&HermitianMatrix> {
        self.defect.matrix()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainReport {
    pub context: String,
    /// Least eigenvalue of the inequality step's slack.
    pub min_eig: f64,
    pub holds: bool,
    pub scale: f64,
    pub steps: Vec<ChainStep>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_matrix")]
    pub slack: Option<HermitianMatrix>,
}

impl ChainReport {
    pub(crate) fn new(
        context: String,
        scale: f64,
        steps: Vec<ChainStep>,
        slack: HermitianMatrix,
    ) -> Self {
        let min_eig = steps
            .iter()
            .filter(|s| s.kind == StepKind::Inequality)
            .map(|s| s.value)
            .fold(f64::INFINITY, f64::min);
        Self {
            context,
            min_eig,
            holds: steps.iter().all(|s| s.ok),
            scale,
            steps,
            slack: Some(slack),
        }
    }

    pub fn step(&self, label: &str) -> Option<&ChainStep> {
        self.steps.iter().find(|s| s.label == label)
    }

    /// Largest equality residual.
    pub fn max_residual(&self) -> f64 {
        self.steps
            .iter()
            .filter(|s| s.kind == StepKind::Equality)
            .map(|s| s.value)
            .fold(0.0, f64::max)
    }

    pub fn equalities_hold(&self) -> bool {
        self.steps
            .iter()
            .filter(|s| s.kind == StepKind::Equality)
            .all(|s| s.ok)
    }
}

fn ser_opt_matrix<S: serde::Serializer>(
    m: &Option<HermitianMatrix>,
    s: S,
) -> Result<S::Ok, S::Error> {
    m.as_ref().map(MatrixJson::from).serialize(s)
}

/// `name#digest` where the digest hashes the bit patterns of all inputs.
pub(crate) fn context(name: &str, matrices: &[&CMatrix], scalars: &[f64]) -> String {
    let mut h = DefaultHasher::new();
    for m in matrices {
        m.nrows().hash(&mut h);
        m.ncols().hash(&mut h);
        for z in m.iter() {
            z.re.to_bits().hash(&mut h);
            z.im.to_bits().hash(&mut h);
        }
    }
    for s in scalars {
        s.to_bits().hash(&mut h);
    }
    format!("{name}#{:016x}", h.finish())
}
