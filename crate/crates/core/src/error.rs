use thiserror::Error;

use crate::cech::CechClassification;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which part of the splitting pipeline hit a nontrivial class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ObstructionStage {
    /// The half-twist solve for the odd linear part, component `a`.
    Linear(usize),
    /// The tangent-twist solve for `λ¹²`.
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("composition hits a pole of the outer function")]
    PoleAtCompositionPoint,
    #[error("variable mismatch: `{left}` vs `{right}`")]
    VariableMismatch { left: String, right: String },
    #[error("rewrite system does not terminate: {0}")]
    NonTerminatingRuleSet(String),
    #[error("unknown identity suite `{0}`")]
    UnknownSuite(String),
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("parity mismatch: {0}")]
    ParityMismatch(String),
    #[error("Taylor shift has a nonzero body component")]
    NonNilpotentShift,
    #[error("vanishing zeta: {0}")]
    VanishingZeta(String),
    #[error("body map is not invertible: {0}")]
    NonInvertibleBody(String),
    #[error("coboundary of a cochain of degree {0} is not supported")]
    DegreeOverflow(usize),
    #[error("not a cocycle: {0}")]
    NotACocycle(String),
    #[error("cochain is not representable on the model cover: {0}")]
    NotRepresentable(String),
    #[error("atlas is not superconformal: {0}")]
    NotSuperconformal(String),
    #[error("spin relation zeta^2 = f' violated: {0}")]
    SpinRelationViolated(String),
    #[error("twist cochain does not satisfy delta g12 = [psi1, psi2]: {0}")]
    BracketObstruction(String),
    #[error("splitting solver supports order 2 only, got order {0}")]
    UnsupportedOrder(usize),
    #[error("unsupported cover: {0}")]
    UnsupportedCover(String),
    #[error("obstruction does not vanish ({stage:?}): H^1 witness {}", witness.render_witness())]
    ObstructionNonzero { stage: ObstructionStage, witness: Box<CechClassification> },
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("division by zero in expression at {pos}")]
    DivisionByZeroExpression { pos: usize },
    #[error("load error: {0}")]
    Load(String),
}
