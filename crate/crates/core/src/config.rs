//! Run configuration shared by the command-line front end.
//!
//! Relative paths are resolved against the directory of the config file by
//! [`RunConfig::resolve_paths`].

use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{default_grid, HyperGrid, Objective, ProtocolConfig};
use crate::grid::{load_grid, GridFormat};
use crate::models::{Family, ModelSpec};
use crate::pipeline::{NamedGrid, PipelineConfig};
use crate::report::{parse_report_table, read_report_csv, ParsedReports, ReportSchema, TzPolicy};
use crate::synth::{reference_defects, FuelLaw, SynthOptions};

/// One gridded input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSource {
    pub name: String,
    pub path: PathBuf,
    /// Inferred from the extension when absent.
    #[serde(default)]
    pub format: Option<GridFormat>,
    /// Average sub-daily grids to one value per day.
    #[serde(default = "yes")]
    pub daily_mean: bool,
    /// `[lat_min, lat_max, lon_min, lon_max]` crop.
    #[serde(default)]
    pub subset: Option<[f64; 4]>,
    /// Crop before averaging instead of after.
    #[serde(default)]
    pub subset_first: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub reports: Option<PathBuf>,
    pub grids: Vec<GridSource>,
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self { reports: None, grids: Vec::new(), output_dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSettings {
    pub k: usize,
    pub rpm_column: String,
    pub sog_column: Option<String>,
    pub objective: Objective,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self { k: 5, rpm_column: "engine_rpm_avg_24h".into(), sog_column: None, objective: Objective::R2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Environment terms carry real signal.
    Material,
    /// Environment coefficients all zero.
    NullEnv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSettings {
    pub scenario: Scenario,
    pub n_days: usize,
    pub defects: bool,
    pub options: SynthOptions,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self { scenario: Scenario::Material, n_days: 296, defects: true, options: SynthOptions::default() }
    }
}

impl SynthSettings {
    pub fn law(&self, seed: u64) -> FuelLaw {
        match self.scenario {
            Scenario::Material => FuelLaw::material(seed),
            Scenario::NullEnv => FuelLaw::null_env(seed),
        }
    }

    pub fn defect_spec(&self, seed: u64) -> Option<crate::synth::DefectSpec> {
        self.defects.then(|| reference_defects(seed))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Root of every random stream in a run.
    pub seed: u64,
    pub paths: Paths,
    pub report_schema: ReportSchema,
    pub timezone: TzPolicy,
    pub delimiter: char,
    pub pipeline: PipelineConfig,
    /// Model families compared by `evaluate`, in table order.
    pub models: Vec<ModelSpec>,
    pub evaluation: EvalSettings,
    /// Search spaces keyed by family name; built-in grids fill the gaps.
    pub hypergrids: IndexMap<String, HyperGrid>,
    pub synth: SynthSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            paths: Paths::default(),
            report_schema: ReportSchema::default(),
            timezone: TzPolicy::Utc,
            delimiter: ',',
            pipeline: PipelineConfig::default(),
            models: Family::FOUR.iter().map(|f| f.default_spec()).collect(),
            evaluation: EvalSettings::default(),
            hypergrids: IndexMap::new(),
            synth: SynthSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(r) = self.paths.reports.as_mut() {
            fix(r);
        }
        for g in &mut self.paths.grids {
            fix(&mut g.path);
        }
        fix(&mut self.paths.output_dir);
    }

    /// Checks parameters, and that input files exist when `inputs` is set.
    pub fn validate(&self, inputs: bool) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.evaluation.k < 2 {
            return bad(format!("k must be >= 2, got {}", self.evaluation.k));
        }
        if !self.delimiter.is_ascii() {
            return bad("delimiter must be a single ASCII character".into());
        }
        if self.models.is_empty() {
            return bad("no model families configured".into());
        }
        for label in self.hypergrids.keys() {
            label.parse::<Family>().map_err(|e| Error::Config(format!("hypergrids.{label}: {e}")))?;
        }
        if inputs {
            match &self.paths.reports {
                None => return bad("paths.reports is not set".into()),
                Some(p) if !p.is_file() => return bad(format!("reports file {} does not exist", p.display())),
                _ => {}
            }
            for g in &self.paths.grids {
                if !g.path.is_file() {
                    return bad(format!("grid {} file {} does not exist", g.name, g.path.display()));
                }
            }
        }
        Ok(())
    }

    pub fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            rpm_column: self.evaluation.rpm_column.clone(),
            sog_column: self.evaluation.sog_column.clone(),
            k: self.evaluation.k,
            seed: self.seed,
            specs: self.models.clone(),
        }
    }

    /// The configured spec for `family`, else its defaults.
    pub fn spec_for(&self, family: Family) -> ModelSpec {
        self.models.iter().find(|s| s.family() == family).cloned().unwrap_or_else(|| family.default_spec())
    }

    pub fn hypergrid(&self, family: Family) -> HyperGrid {
        self.hypergrids
            .iter()
            .find(|(k, _)| k.parse::<Family>().ok() == Some(family))
            .map(|(_, g)| g.clone())
            .unwrap_or_else(|| default_grid(family))
    }

    pub fn load_reports(&self) -> Result<ParsedReports> {
        let path = self.paths.reports.as_ref().ok_or_else(|| Error::Config("paths.reports is not set".into()))?;
        let rows = read_report_csv(std::fs::File::open(path)?, self.delimiter as u8)?;
        Ok(parse_report_table(&rows, &self.report_schema, &self.timezone)?)
    }

    pub fn load_grids(&self) -> Result<Vec<NamedGrid>> {
        self.paths
            .grids
            .iter()
            .map(|src| {
                let fmt = src.format.unwrap_or_else(|| GridFormat::from_path(&src.path));
                let mut g = load_grid(&src.path, fmt)?;
                let crop = |g: &crate::grid::EnvGrid| match src.subset {
                    Some([a, b, c, d]) => g.subset((a, b), (c, d), (g.time.start, g.time.at(g.time.count - 1))),
                    None => Ok(g.clone()),
                };
                let averaging = src.daily_mean && g.time.step_seconds < 86_400;
                if src.subset_first {
                    g = crop(&g)?;
                }
                if averaging {
                    g = g.daily_mean()?;
                }
                if !src.subset_first {
                    g = crop(&g)?;
                }
                Ok(NamedGrid { name: src.name.clone(), grid: g })
            })
            .collect()
    }
}
