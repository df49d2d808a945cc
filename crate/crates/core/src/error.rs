use thiserror::Error;

use crate::model::Granule;

/// Errors raised while loading or building a sequence database.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("empty database")]
    Empty,
    #[error("line {line}: malformed record: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: unknown series {series:?}")]
    UnknownSeries { line: usize, series: String },
    #[error("granule {granule}: interval [{start},{end}] is not strictly increasing")]
    InvertedInterval { granule: Granule, start: i64, end: i64 },
    #[error("granule {granule}: interval [{start},{end}] lies outside the granule window [{lo},{hi}]")]
    OutsideGranule { granule: Granule, start: i64, end: i64, lo: i64, hi: i64 },
    #[error("duplicate granule {0}")]
    DuplicateGranule(Granule),
    #[error("non-contiguous granules: expected {expected}, found {found}")]
    NonContiguous { expected: u32, found: u32 },
    #[error("invalid symbolization spec: {0}")]
    BadSpec(String),
    #[error("series {series:?}: sample {value} at tick {tick} falls outside all bins")]
    OutOfBins { series: String, tick: i64, value: f64 },
}

/// Errors raised by threshold resolution.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("dist_min ({min}) exceeds dist_max ({max})")]
    DistRange { min: u32, max: u32 },
    #[error("invalid threshold {0:?}")]
    Parse(String),
    #[error("database size must be at least 1")]
    EmptyDatabase,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("self relation on {0} is not allowed")]
    SelfRelation(String),
    #[error("pattern events must be distinct and in canonical order")]
    EventOrder,
    #[error("pattern with {events} events needs {expected} triples, got {got}")]
    TripleCount { events: usize, expected: usize, got: usize },
    #[error("triple {index} does not relate events {i} and {j}")]
    TripleSlot { index: usize, i: usize, j: usize },
    #[error("support set is not strictly increasing")]
    UnsortedSupport,
    #[error("unknown event {0:?}")]
    UnknownEvent(String),
    #[error("cannot parse pattern {input:?}: {msg}")]
    PatternSyntax { input: String, msg: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeasonError {
    #[error("intersection of an empty list of support sets")]
    EmptyIntersection,
    #[error("season ending at {earlier_end} does not precede season starting at {later_start}")]
    OutOfOrder { earlier_end: Granule, later_start: Granule },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IndexError {
    #[error("duplicate event {0} in candidate list")]
    DuplicateEvent(String),
    #[error("event tuple {0} is not a candidate group")]
    MissingGroup(String),
    #[error("duplicate pattern {0}")]
    DuplicatePattern(String),
    #[error("witness list does not match support of {0}")]
    WitnessMismatch(String),
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("stage {stage}: partition {partition} failed: {msg}")]
    TaskFailed { stage: String, partition: usize, msg: String },
}

#[derive(Debug, Error)]
pub enum MineError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("database exceeds oracle cap: {granules} granules / {series} series (cap {max_granules} / {max_series})")]
    CapExceeded { granules: usize, series: usize, max_granules: usize, max_series: usize },
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("degenerate spec: {0}")]
    Degenerate(String),
    #[error("planted pattern {pattern}: {msg}")]
    Geometry { pattern: String, msg: String },
    #[error(transparent)]
    Pattern(#[from] ModelError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}
