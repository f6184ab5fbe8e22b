use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("algebra basis does not close: expansion residual {0:.3e}")]
    BasisClosure(f64),

    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),

    #[error("codomain mismatch: {0}")]
    Codomain(String),

    #[error("derivative order exhausted in {0} node")]
    OrderExhausted(&'static str),

    #[error("operator is not skew: asymmetry {0:.3e}")]
    NotSkew(f64),

    #[error("map is not K-equivariant: residual {0:.3e}")]
    NotEquivariant(f64),

    #[error("charge {charge} is not a weight of the level-{level} representation")]
    InvalidCharge { charge: i32, level: String },

    #[error("degenerate basis: achieved rank {rank} of {expected}")]
    DegenerateBasis { rank: usize, expected: usize },

    #[error("invalid group element: unitarity defect {0:.3e}")]
    NotUnitary(f64),

    #[error("empty function family")]
    EmptyFamily,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
