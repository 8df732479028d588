use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid lineup: {0}")]
    InvalidLineup(String),
    #[error("game {game_id}: elapsed time goes backwards at {at_seconds} s")]
    NegativeTimeSpan { game_id: String, at_seconds: f64 },
    #[error("game {0}: events are not grouped by game")]
    UngroupedGame(String),
    #[error("name {0:?} is empty after normalization")]
    EmptyName(String),
    #[error("dataset is empty after filtering")]
    EmptyDataset,
    #[error("need at least {needed} observations, got {found}")]
    TooFewObservations { needed: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no statistics for player {0}")]
    MissingPlayer(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training set needs both classes")]
    SingleClass,
    #[error("SVM solver did not converge (max KKT violation {max_violation})")]
    NonConvergence { max_violation: f64 },
    #[error("pooled covariance is singular")]
    SingularCovariance,
    #[error("expected 7 votes, got {0}")]
    VoteCount(usize),
    #[error("no combination reaches minimum precision {floor} (best minimum {best_min}, best average {best_avg})")]
    InfeasibleFloor {
        floor: f64,
        best_min: f64,
        best_avg: f64,
    },
    #[error("no tuning combination without undefined folds")]
    NoCandidates,
    #[error("frontier index {index} out of range ({len} frontier points)")]
    FrontierIndex { index: usize, len: usize },
    #[error("group of size {0} is too small for a variance estimate")]
    GroupTooSmall(usize),
    #[error("both groups have zero variance")]
    DegenerateVariance,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("player {0} has no position")]
    UnmappedPlayer(String),
    #[error("unknown position code {0:?}")]
    UnknownPosition(String),
    #[error("team {0} missing from pace table")]
    MissingTeam(String),
    #[error("need at least 5 eligible players, got {0}")]
    TooFewPlayers(usize),
}
