use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("{0} is not an odd prime")]
    BadPrime(u64),
    #[error("precision {precision} unsupported for p = {prime} (need 1 <= p^K < 2^62)")]
    BadPrecision { prime: u64, precision: u32 },
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("not divisible: {0}")]
    NotDivisible(String),
    #[error("no square root: {0}")]
    NoSquareRoot(String),
    #[error("singular: {0}")]
    Singular(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("degree cap exceeded: |N| = {n} > {cap}")]
    DegreeCap { n: i64, cap: i64 },
    #[error("unipotent case: {0}")]
    Unipotent(String),
    #[error("not a trace of rational rotation: {0}")]
    NotRotationTrace(String),
    #[error("not a point of the surface: {0}")]
    NotOnSurface(String),
    #[error("letter {0} is not a Vieta involution")]
    NotInGamma(String),
    #[error("cannot parse word: {0}")]
    WordParse(String),
    #[error("coordinate {0} out of range")]
    ReductionLevel(u32),
    #[error("map class violated: {0}")]
    MapClass(String),
    #[error("no chart: {0}")]
    NoChart(String),
    #[error("leaves polydisk: {0}")]
    LeavesPolydisk(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("catalog case unavailable for this p: {0}")]
    CatalogUnavailable(String),
    #[error("no special point recipe: {0}")]
    NoSpecialPoint(String),
    #[error("no strict move found: {0}")]
    NoStrictMove(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
