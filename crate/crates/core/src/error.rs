use thiserror::Error;

use crate::basis::PairIdx;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("pair {pair} is not a valid index pair for n = {n}")]
    InvalidPair { pair: PairIdx, n: usize },

    #[error("flat index {idx} out of range for n = {n} (r = {r})")]
    IndexOutOfRange { idx: usize, n: usize, r: usize },

    #[error("n = {n} is below the minimum {min} for {what}")]
    SizeTooSmall { n: usize, min: usize, what: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("bracket [e{0}, e{0}] must vanish")]
    Antisymmetry(usize),

    #[error("expression degree {degree} exceeds the supported bound {bound}")]
    DegreeBound { degree: u32, bound: u32 },

    #[error("cannot parse expression at position {pos}: {msg}")]
    ExprParse { pos: usize, msg: String },

    #[error("cannot parse rational `{0}`")]
    ScalarParse(String),

    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),

    #[error("parameter `{name}` = {value} lies outside its domain ({domain})")]
    ParamDomain { name: String, value: String, domain: String },

    #[error("f = {f} is outside 1..={max}: T({n}) admits at most n-1 nonnilpotent elements")]
    FOutOfRange { n: usize, f: usize, max: usize },

    #[error("structure matrices are not nilindependent: {0}")]
    NotNilindependent(String),

    #[error("Jacobi identity violated: {0}")]
    JacobiViolated(String),

    #[error("matrices are not in the reduced slot form: {0}")]
    NotReducedForm(String),

    #[error("normalization needs a nonzero constant but found `{0}`; bind the parameters first")]
    SymbolicNormalization(String),

    #[error("G2 generator for {0} must be nonzero")]
    ZeroGenerator(PairIdx),

    #[error("unsupported request: {0}")]
    Unsupported(String),

    #[error("enumeration disagrees with the stored tables: {0}")]
    TableMismatch(String),

    #[error("cannot decide: {0}")]
    Undecided(String),

    #[error("document error: {0}")]
    Document(String),
}
