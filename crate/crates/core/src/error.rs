use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("degenerate geodesic: endpoints {0:.3e} apart")]
    DegenerateGeodesic(f64),

    #[error("ping-pong violation: {0}")]
    PingPong(String),

    #[error("degenerate lattice: translations {0} and {1} are linearly dependent over R")]
    DegenerateLattice(String, String),

    #[error("invalid preset: {0}")]
    Preset(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("depth error: {0}")]
    Depth(String),

    #[error("config error at line {line}, field `{field}`: {message}")]
    Config {
        line: usize,
        field: String,
        message: String,
    },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
