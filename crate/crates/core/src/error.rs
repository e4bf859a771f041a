use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation {perm:?} for a rank-{rank} tensor")]
    InvalidPermutation { perm: Vec<usize>, rank: usize },

    #[error("invalid reshape: {0}")]
    InvalidReshape(String),

    #[error("contraction mismatch: axis {axis_a} (dim {dim_a}) paired with axis {axis_b} (dim {dim_b})")]
    ContractionMismatch {
        axis_a: usize,
        dim_a: usize,
        axis_b: usize,
        dim_b: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("size error: {what} has {n} sites, cap is {cap}")]
    Size { what: &'static str, n: usize, cap: usize },

    #[error("state is not normalized (norm {norm})")]
    Normalization { norm: f64 },

    #[error("rule table chain broken at site {site}: right dim {right} vs next left dim {left}")]
    TableChain { site: usize, right: usize, left: usize },

    #[error("duplicate rule at ({left}, {right})")]
    DuplicateRule { left: usize, right: usize },

    #[error("Krylov start vector is zero")]
    DegenerateStart,

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("DMRG failed at s = {s}: {source}")]
    AtAnnealingPoint {
        s: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    /// JSON that does not match the expected document; `path` names the field.
    #[error("invalid JSON at `{path}`: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Deserializes JSON, reporting the path of the offending field on failure.
pub(crate) fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Json {
        path: e.path().to_string(),
        source: e.into_inner(),
    })
}
