use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate arrow name `{0}`")]
    DuplicateArrow(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
    #[error("invalid name `{name}`: {reason}")]
    InvalidName { name: String, reason: &'static str },
    #[error("arrows `{left}` and `{right}` are not composable")]
    NotComposable { left: String, right: String },
    #[error("path `{0}` is not closed")]
    NotClosed(String),
    #[error("operands live over different quivers")]
    QuiverMismatch,
    #[error("image of `{arrow}` must be a combination of paths from `{tail}` to `{head}`")]
    DerivationEndpoints { arrow: String, tail: String, head: String },
    #[error("expected a {expected}-form, got a {found}-form")]
    FormDegree { expected: usize, found: usize },
    #[error("form is not d-closed, its differential is {residual}")]
    FormNotClosed { residual: String },
    #[error("form has a component of Euler weight 0")]
    WeightZero,
    #[error("constant part of the 2-form is a degenerate bilinear form")]
    DegenerateForm,
    #[error("image of `{0}` must be the arrow itself plus terms of length at least 2")]
    LinearPart(String),
    #[error("Darboux certificate failed, residual {residual}")]
    Certificate { residual: String },
    #[error("operation requires a quiver with exactly one vertex")]
    NotOneVertex,
    #[error("shape mismatch for `{what}`: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    Shape {
        what: String,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("element is not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("Calogero-Moser positions must be pairwise distinct, {0} is repeated")]
    RepeatedPosition(String),
    #[error("trace of a commutator element is nonzero at a sampled point")]
    KernelViolation,
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: {source}")]
    Located {
        line: usize,
        column: usize,
        source: Box<Error>,
    },
    #[error("invalid input: {0}")]
    Input(String),
}
