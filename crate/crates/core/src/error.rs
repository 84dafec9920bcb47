use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("ensemble has no paths")]
    EmptyEnsemble,

    #[error("integration diverged on path {path} at step {step}")]
    IntegrationDiverged { path: usize, step: usize },

    #[error("unknown Duffing case {0} (expected 1..=4)")]
    UnknownCase(usize),

    #[error("analytic SDOF covariance needs 0 < zeta < 1, got {0}")]
    UnsupportedDamping(f64),

    #[error("grid index ({i}, {j}) is not interior to a {n}x{n} surface")]
    IndexOutOfInterior { i: usize, j: usize, n: usize },

    #[error("patch size {h_patch} is smaller than two grid steps ({min})")]
    PatchTooSmall { h_patch: f64, min: f64 },

    #[error("surface of {n} points exceeds the materialization limit {n_max}")]
    SurfaceTooLarge { n: usize, n_max: usize },

    #[error("bandwidth window half-width {l} is below 2 grid steps")]
    WindowTooSmall { l: usize },

    #[error("invalid bandwidth: {0}")]
    InvalidBandwidth(String),

    #[error("all kernel weights in the window are zero")]
    EmptyWindow,

    #[error("degenerate window: normal matrix condition {condition:e}")]
    DegenerateWindow { condition: f64 },

    #[error("fit at t = {time} failed: {source}")]
    FitFailed {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("evaluation time {0} is outside the ensemble grid")]
    TimeOutOfRange(f64),

    #[error("cannot split {paths} paths into {groups} equal groups")]
    BadGrouping { paths: usize, groups: usize },

    #[error("probability must lie in (0, 1), got {0}")]
    BadProbability(f64),

    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Parse {
            what,
            detail: detail.into(),
        }
    }
}
