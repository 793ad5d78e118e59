use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("qubit index {0} listed twice")]
    DuplicateQubit(usize),

    #[error("cannot parse Pauli string {input:?}: {reason}")]
    PauliParse { input: String, reason: String },

    #[error("operator is not Hermitian (phase exponent {0})")]
    NotHermitian(u8),

    #[error("generators {0} and {1} anticommute")]
    NonCommuting(usize, usize),

    #[error("generator {0} is linearly dependent on the others")]
    DependentGenerator(usize),

    #[error("more generators ({k}) than qubits ({n})")]
    TooManyGenerators { k: usize, n: usize },

    #[error("invalid lattice {lx}x{ly}: {reason}")]
    InvalidLattice {
        lx: usize,
        ly: usize,
        reason: String,
    },

    #[error("coordinate ({x}, {y}) outside {lx}x{ly} lattice")]
    InvalidCoordinate {
        x: usize,
        y: usize,
        lx: usize,
        ly: usize,
    },

    #[error("path steps {step} are not adjacent")]
    NonAdjacentPath { step: usize },

    #[error("loop is not closed")]
    OpenLoop,

    #[error("region with k_A={k_a} does not fit on a {lx}x{ly} torus")]
    RegionTooLarge { k_a: usize, lx: usize, ly: usize },

    #[error("lattice {lx}x{ly} too small: {reason}")]
    LatticeTooSmall {
        lx: usize,
        ly: usize,
        reason: String,
    },

    #[error("state does not track logical operators")]
    LogicalsNotTracked,

    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("unknown figure id {0:?}")]
    UnknownFigure(String),

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed data in {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
