use thiserror::Error;

use crate::petz::RecoveryReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries ({what})")]
    NonFinite { what: &'static str },

    #[error("{what}: expected {expected} entries, got {found}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("operator is not Hermitian (max |M - M^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("state does not have unit trace (trace = {trace:.12})")]
    BadTrace { trace: f64 },

    #[error("vector is not normalized (norm = {norm:.12})")]
    NotNormalized { norm: f64 },

    #[error("Hermitian eigensolver did not converge on a {dim}x{dim} matrix")]
    EigenNoConvergence { dim: usize },

    #[error("singular value decomposition failed on a {rows}x{cols} matrix")]
    SvdFailure { rows: usize, cols: usize },

    #[error("function undefined at retained eigenvalue {eigenvalue:.6e}")]
    Domain { eigenvalue: f64 },

    #[error("Kraus operators are not trace preserving: ||sum V^dagger V - I|| = {deviation:.3e}")]
    NotTracePreserving { deviation: f64 },

    #[error("Kraus operator list is empty")]
    EmptyKraus,

    #[error("invalid Choi matrix: {reason}")]
    InvalidChoi { reason: String },

    #[error("vector system is not overcomplete: ||sum |psi><psi| - I|| = {deviation:.3e}")]
    NotOvercomplete { deviation: f64 },

    #[error("invalid Gram matrix: {reason}")]
    InvalidGram { reason: String },

    #[error("invalid ensemble: {reason}")]
    InvalidEnsemble { reason: String },

    #[error("invalid parameter: {reason}")]
    InvalidParameter { reason: String },

    #[error("state {index} has numerical rank {rank}, above the bound {bound}")]
    RankPrecondition {
        index: usize,
        rank: usize,
        bound: usize,
    },

    #[error("construction invalid: A_i = Psi*(B_i) residual {residual:.3e} (channel is not reversible on the ensemble)")]
    ConstructionInvalid { residual: f64 },

    #[error("reversibility audit failed (gap {:.3e} bits, max residual {:.3e})", .0.gap, .0.max_residual())]
    AuditFailed(Box<RecoveryReport>),

    #[error("support violation: infinite relative entropy in term(s) {terms:?}")]
    SupportViolation { terms: Vec<&'static str> },

    #[error("channel is not covariant under unitary #{index} (deviation {deviation:.3e})")]
    NotCovariant { index: usize, deviation: f64 },

    #[error("unitary set is reducible (commutant dimension {commutant_dim})")]
    Reducible { commutant_dim: usize },

    #[error("energy constraint infeasible: minimum energy {min_energy:.6} exceeds bound {bound:.6}")]
    Infeasible { min_energy: f64, bound: f64 },

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
