use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{
    derive_features, drop_state_shift_rows, fuse_environment, FusedDataset, FusionCoverage, NamedGrid, PipelineError,
    SegmentRule, Step, StepSpec,
};
use crate::report::VoyageRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub segments: SegmentRule,
    pub steps: Vec<StepSpec>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { segments: SegmentRule::default(), steps: StepSpec::default_list() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: String,
    pub rows_in: usize,
    pub rows_out: usize,
    pub columns_in: usize,
    pub columns_out: usize,
}

/// Contents of `coverage.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub input_rows: usize,
    pub steps: Vec<StepReport>,
    /// Missing cells per column right after fusion.
    pub missing_per_column: IndexMap<String, usize>,
    pub fusion: FusionCoverage,
    pub final_rows: usize,
    pub final_columns: Vec<String>,
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub dataset: FusedDataset,
    pub coverage: Coverage,
    /// Steps in their fitted state, reusable on new rows.
    pub fitted: Vec<Box<dyn Step>>,
}

/// State-shift removal, feature derivation and fusion, then the configured
/// steps, each fitted on its own input.
pub fn run_pipeline(
    records: Vec<VoyageRecord>,
    grids: &[NamedGrid],
    cfg: &PipelineConfig,
) -> Result<PipelineOutput, PipelineError> {
    let input_rows = records.len();
    let mut reports = Vec::new();
    let kept = drop_state_shift_rows(records);
    reports.push(StepReport {
        step: "drop_state_shift_rows".into(),
        rows_in: input_rows,
        rows_out: kept.len(),
        columns_in: 0,
        columns_out: 0,
    });
    let derived = derive_features(&kept, &cfg.segments);
    let cols_derived = derived.columns.len();
    reports.push(StepReport {
        step: "derive_features".into(),
        rows_in: kept.len(),
        rows_out: derived.n_rows(),
        columns_in: 0,
        columns_out: cols_derived,
    });
    let (mut ds, fusion) = fuse_environment(derived, grids);
    reports.push(StepReport {
        step: "fuse_environment".into(),
        rows_in: ds.n_rows(),
        rows_out: ds.n_rows(),
        columns_in: cols_derived,
        columns_out: ds.columns.len(),
    });
    let missing_per_column = ds.columns.iter().enumerate().map(|(j, c)| (c.name.clone(), ds.missing_count(j))).collect();

    let mut fitted = Vec::with_capacity(cfg.steps.len());
    for spec in &cfg.steps {
        let mut step = spec.build();
        let out = step.fit_transform(&ds)?;
        log::info!("{}: {} -> {} rows, {} -> {} columns", step.name(), ds.n_rows(), out.n_rows(), ds.columns.len(), out.columns.len());
        reports.push(StepReport {
            step: step.name().into(),
            rows_in: ds.n_rows(),
            rows_out: out.n_rows(),
            columns_in: ds.columns.len(),
            columns_out: out.columns.len(),
        });
        ds = out;
        fitted.push(step);
    }
    let coverage = Coverage {
        input_rows,
        steps: reports,
        missing_per_column,
        fusion,
        final_rows: ds.n_rows(),
        final_columns: ds.columns.iter().map(|c| c.name.clone()).collect(),
    };
    Ok(PipelineOutput { dataset: ds, coverage, fitted })
}
