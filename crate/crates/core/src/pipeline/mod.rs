//! From parsed reports and grids to a numeric training matrix.
//!
//! Record-level stages ([`drop_state_shift_rows`], [`derive_features`],
//! [`fuse_environment`]) build a [`FusedDataset`]; dataset-level stages are
//! [`Step`]s with a separate `fit` and `transform`, so statistics are only
//! ever learned from the rows passed to `fit`. [`run_pipeline`] chains both
//! according to a [`PipelineConfig`].

mod dataset;
mod records;
mod run;
mod steps;

use thiserror::Error;

pub use dataset::{read_fused_csv, write_fused_csv, Column, ColumnKind, FusedDataset, RowKey, Value};
pub use records::{
    derive_features, drop_state_shift_rows, fuse_environment, season_of, FusionCoverage, NamedGrid, SegmentRule,
    RESPONSE,
};
pub use run::{run_pipeline, Coverage, PipelineConfig, PipelineOutput, StepReport};
pub use steps::{
    encode_categoricals, filter_startup_acceleration, prune_columns, remove_response_outliers, DropIncompleteRows,
    EncodeCategoricals, OutlierMethod, PruneColumns, RemoveResponseOutliers, StartupFilter, Step, StepSpec,
    DEFAULT_REDUNDANT,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("pruning would drop the response column {0:?}")]
    ResponseDropped(String),
    #[error("unknown category {value:?} in column {column:?}")]
    UnknownCategory { column: String, value: String },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("column {0:?} is not numeric")]
    NotNumeric(String),
    #[error("row {row}: column {column:?} is missing")]
    MissingValue { row: usize, column: String },
    #[error("step {0:?} used before fit")]
    NotFitted(String),
    #[error("bad step parameter: {0}")]
    BadParameter(String),
    #[error("dataset has no rows")]
    Empty,
    #[error("fused csv: {0}")]
    Format(String),
    #[error(transparent)]
    Model(#[from] crate::models::ModelError),
}
