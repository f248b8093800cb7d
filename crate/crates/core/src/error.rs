use thiserror::Error;

use crate::lattice::IVec3;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("surface has no non-constant term")]
    Constant,
    #[error("surface coefficient is not finite")]
    NonFinite,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read surface file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DirectionError {
    #[error("direction (0,0,0) is not a direction")]
    Zero,
    #[error("grid direction ({m},{n},{big_n}) violates 0 <= m <= n <= N, N >= 1")]
    OutOfTriangle { m: i64, n: i64, big_n: i64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("critical point count changed between seed grids ({coarse} vs {fine}); raise the seed density")]
    SeedExhaustion { coarse: usize, fine: usize },
    #[error("point is not critical: |grad f x unit| = {residual:e}")]
    NotCritical { residual: f64 },
    #[error("orbit did not close within arc length {max_len}")]
    MaxArcLength { max_len: f64 },
    #[error("projection onto the section diverged (residual {residual:e})")]
    ProjectionFailure { residual: f64 },
    #[error("separatrix branch from critical point {from} was not captured within arc length {max_len}")]
    DanglingSeparatrix { from: usize, max_len: f64 },
    #[error("plane offset {level} does not meet the level surface")]
    NoSurfaceIntersection { level: f64 },
    #[error("start point is off the level set or too close to a critical point")]
    BadStart,
    #[error("lift displacement is not integral: {0}")]
    Homology(#[from] HomologyError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomologyError {
    #[error("lift displacement component {component} is {value} turns, not within {tol} of an integer")]
    NonIntegral {
        component: usize,
        value: f64,
        tol: f64,
    },
    #[error("zero vector has no primitive part")]
    ZeroVector,
    #[error("generator {generator:?} is not orthogonal to h = {h:?}")]
    InvalidGenerator { generator: IVec3, h: IVec3 },
}

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: schema_version {found} is not supported (expected {expected})")]
    Schema {
        path: String,
        found: u32,
        expected: u32,
    },
    #[error("checkpoint {path} was written for a different configuration: {message}")]
    CheckpointMismatch { path: String, message: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FractalError {
    #[error("need at least two distinct points, got {0}")]
    TooFewPoints(usize),
    #[error("scales must be strictly decreasing and positive")]
    BadScales,
    #[error("fewer than two scales admit nonzero counts")]
    DegenerateInput,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid value {value:?} for {key}")]
    Value { key: String, value: String },
    #[error("unknown option {0}")]
    UnknownKey(String),
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
