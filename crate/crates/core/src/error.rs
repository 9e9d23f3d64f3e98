use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A row of the CSV input could not be parsed.
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("line {line}: coordinate {value} is not on the 2.5 degree lattice ({axis})")]
    OffLattice {
        line: usize,
        axis: &'static str,
        value: f64,
    },

    #[error("line {line}: duplicate record for cell ({lon}, {lat}) at {year}-{month:02}")]
    DuplicateRecord {
        line: usize,
        lon: f64,
        lat: f64,
        year: i32,
        month: u8,
    },

    #[error("dataset contains no present PDSI values")]
    EmptyDataset,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series too short: {len} values, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("silhouette is undefined for a single cluster")]
    SingleCluster,

    #[error("year ranges differ: counts cover {counts:?}, band covers {band:?}")]
    YearMismatch {
        counts: (i32, i32),
        band: (i32, i32),
    },

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
