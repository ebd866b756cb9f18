use thiserror::Error;

/// Everything that can go wrong while building or checking an instance.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: ‖H − H*‖_F = {residual:e} exceeds {allowed:e}")]
    NotHermitian { residual: f64, allowed: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix must have at least one row")]
    Empty,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigenvalue {eigenvalue} lies outside the domain {domain}")]
    SpectrumOutsideDomain { eigenvalue: f64, domain: String },

    #[error("spectrum must lie in the open interval (-1, 1); found eigenvalue {eigenvalue}")]
    SpectrumOutsideUnitInterval { eigenvalue: f64 },

    #[error("function `{name}` is not finite at t = {t}")]
    EvaluationFailure { name: String, t: f64 },

    #[error("interval {0} must be bounded for sampling")]
    UnboundedInterval(String),

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("not a projection: residual {residual:e}")]
    NotProjection { residual: f64 },

    #[error("projection does not commute with the operand: ‖px − xp‖_F = {residual:e}")]
    NotCommuting { residual: f64 },

    #[error("not unitary: ‖U*U − 1‖_F = {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("not an isometry: ‖V*V − 1‖_F = {residual:e}")]
    NotIsometry { residual: f64 },

    #[error("column is not unital: ‖Σ a*a − 1‖_F = {defect:e}")]
    NotUnital { defect: f64 },

    #[error("column is not contractive: least eigenvalue of 1 − Σ a*a is {min_eig:e}")]
    NotContractive { min_eig: f64 },

    #[error("column is neither unital nor contractive (least eigenvalue of 1 − Σ a*a is {min_eig:e})")]
    NotUnitalOrContractive { min_eig: f64 },

    #[error("0 is not in the domain {domain} required by the contractive form")]
    ZeroNotInDomain { domain: String },

    #[error("field is not unital: ‖Σ w a*a − 1‖_F = {defect:e}")]
    NotUnitalField { defect: f64 },

    #[error("operand is not in the centralizer of the state: ‖ρy − yρ‖_F = {commutator_norm:e}")]
    NotInCentralizer { commutator_norm: f64 },

    #[error("state assigns zero mass to every spectral projection")]
    AllMassZero,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid Bendat-Sherman representation: {0}")]
    InvalidRepresentation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
