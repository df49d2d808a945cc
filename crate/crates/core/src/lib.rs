//! Seasonal temporal pattern mining.
//!
//! Finds temporal patterns (Follows / Contains / Overlaps relations between
//! symbolized time-series events) whose occurrences cluster into periodic
//! seasons. Candidates are pruned with the anti-monotone maxSeason bound and
//! stored in hierarchical lookup hash indexes; every stage runs on an
//! in-process partitioned dataflow executor.

pub mod datagen;
pub mod error;
pub mod exec;
pub mod hlh;
pub mod ingest;
pub mod miner;
pub mod model;
pub mod oracle;
pub mod relations;
pub mod report;
pub mod seasonality;

pub use error::{ConfigError, ExecError, GenError, IndexError, IngestError, MineError, ModelError, OracleError, SeasonError};
pub use exec::{partition_db, Executor, Partition};
pub use miner::{mine, mine_with, MineOptions, MiningResult};
pub use model::{
    canonical_order, resolve_thresholds, EventId, EventInstance, EventSymbol, Granule, MiningConfig, PatternResult, RawConfig,
    Relation, SeasonSet, SequenceDatabase, SupportSet, SymbolTable, TemporalPattern, TemporalSequence, Threshold, TimeInterval,
    Triple,
};
