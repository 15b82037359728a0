use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arm index {arm} out of range (n = {n})")]
    ArmOutOfRange { arm: usize, n: usize },

    #[error("hypothesis index {hyp} out of range (J = {j})")]
    HypOutOfRange { hyp: usize, j: usize },

    #[error("history is empty; at least one observation is required")]
    EmptyHistory,

    #[error("invalid means table: {0}")]
    InvalidMeans(String),

    #[error("invalid noise spec: {0}")]
    InvalidNoise(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid stopping rule: {0}")]
    InvalidStoppingRule(String),

    #[error("brute-force grid supports at most {max} arms, got {n}")]
    GridTooLarge { n: usize, max: usize },

    #[error("gradients do not span the parameter space (rank < {dim})")]
    NonSpanning { dim: usize },

    #[error("least-squares fit needs at least one observation")]
    NoObservations,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid environment: {0}")]
    InvalidEnv(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems, 3 for i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Csv(_) => 3,
            _ => 2,
        }
    }
}
