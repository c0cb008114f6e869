use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("qubit {qubit} out of range for a {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("program contains a non-unitary instruction ({0}); use run_density")]
    NonUnitaryProgram(String),

    #[error("channel is not CPTP (deficit {deficit:.3e}); pass an explicit override to apply it")]
    NotCptp { deficit: f64 },

    #[error("unsupported channel: {0}")]
    UnsupportedChannel(String),

    #[error("qubits {0} and {1} are not nearest neighbours; long-range couplings cannot be compiled")]
    NonAdjacentPair(usize, usize),

    #[error("sign matrix invariant violated: {0}")]
    SignMatrix(String),

    #[error("compiled schedule failed verification (operator-norm error {0:.3e})")]
    Verification(f64),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
