//! Seeded synthetic voyages with a known fuel law.
//!
//! [`generate_voyage`] sails a great-circle route at daily cadence over
//! smooth random ocean and atmosphere fields and writes noon reports whose
//! total fuel follows a [`FuelLaw`]. [`inject_defects`] then plants the
//! dirty rows the cleaning steps are meant to catch and returns the
//! bookkeeping needed to score them.

mod defects;
mod fields;
mod voyage;

use std::path::Path;

use chrono::{DateTime, Utc};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{write_grid, EnvGrid, GridFormat};
use crate::report::{write_report_csv, GeoPosition, ReportSchema, TzPolicy, VoyageRecord};

pub use defects::{inject_defects, DefectLog, DefectSpec};
pub use fields::SmoothField;
pub use voyage::{generate_voyage, great_circle_point};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("route out of bounds: {0}")]
    RouteOutOfBounds(String),
    #[error("invalid synthesis parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error("write failed: {0}")]
    Write(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Noise {
    Absolute { sigma: f64 },
    /// Standard deviation as a fraction of the noise-free response's std.
    Relative { fraction: f64 },
}

/// `FC = a RPM³ + Σ b_k env_k + c trim² + intercept + noise`, with `env_k`
/// the value of grid parameter `k` as fused at the report's time and place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuelLaw {
    pub rpm_cubed: f64,
    pub env: IndexMap<String, f64>,
    pub trim_squared: f64,
    pub intercept: f64,
    pub noise: Noise,
    pub seed: u64,
}

impl FuelLaw {
    /// Environment terms worth roughly a tenth of the response variance.
    pub fn material(seed: u64) -> Self {
        Self {
            rpm_cubed: 8e-5,
            env: [("swh", 2.5), ("u10", -0.4), ("uo", -3.0), ("thetao", 0.6)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            trim_squared: 0.8,
            intercept: 2.0,
            noise: Noise::Relative { fraction: 0.05 },
            seed,
        }
    }

    /// Same as [`FuelLaw::material`] with every environment coefficient 0.
    pub fn null_env(seed: u64) -> Self {
        let mut law = Self::material(seed);
        law.env.values_mut().for_each(|b| *b = 0.0);
        law
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.rpm_cubed > 0.0) {
            return Err(SynthError::InvalidParameter("rpm coefficient must be > 0".into()));
        }
        let ok = match self.noise {
            Noise::Absolute { sigma } => sigma >= 0.0,
            Noise::Relative { fraction } => fraction >= 0.0,
        };
        if !ok {
            return Err(SynthError::InvalidParameter("noise level must be >= 0".into()));
        }
        Ok(())
    }

    /// Noise-free response.
    pub fn signal(&self, rpm: f64, env: &IndexMap<String, f64>, trim: f64) -> f64 {
        let e: f64 = self.env.iter().map(|(k, b)| b * env.get(k).copied().unwrap_or(0.0)).sum();
        self.rpm_cubed * rpm.powi(3) + e + self.trim_squared * trim * trim + self.intercept
    }
}

/// Grid resolution and layout knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthOptions {
    pub start: DateTime<Utc>,
    pub ocean_step_deg: f64,
    pub atmos_step_deg: f64,
    pub atmos_step_hours: i64,
    /// Margin around the route's bounding box.
    pub pad_deg: f64,
    /// Explicit `(lat_min, lat_max, lon_min, lon_max)` grid extent.
    pub bounds: Option<(f64, f64, f64, f64)>,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            start: "2021-11-16T00:00:00Z".parse().expect("valid instant"),
            ocean_step_deg: 1.0,
            atmos_step_deg: 1.0,
            atmos_step_hours: 6,
            pad_deg: 2.0,
            bounds: None,
        }
    }
}

/// A named waypoint; reports sailing toward it carry its name as next port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub name: String,
    pub position: GeoPosition,
}

impl Waypoint {
    pub fn new(name: &str, lat: f64, lon: f64) -> Self {
        Self { name: name.to_string(), position: GeoPosition::new(lat, lon).expect("valid waypoint") }
    }
}

/// Six legs between four ports in the South China Sea and Malacca Strait.
pub fn default_route() -> Vec<Waypoint> {
    vec![
        Waypoint::new("Port Klang", 2.9, 101.3),
        Waypoint::new("Singapore", 1.2, 104.0),
        Waypoint::new("Ho Chi Minh", 10.0, 107.2),
        Waypoint::new("Manila", 14.5, 120.0),
        Waypoint::new("Ho Chi Minh", 10.0, 107.2),
        Waypoint::new("Singapore", 1.2, 104.0),
        Waypoint::new("Port Klang", 2.9, 101.3),
    ]
}

/// Exact generating parameters, written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub law: FuelLaw,
    /// Resolved noise standard deviation.
    pub sigma: f64,
    pub n_days: usize,
    pub route: Vec<Waypoint>,
    pub options: SynthOptions,
    pub ocean_fields: IndexMap<String, SmoothField>,
    pub atmos_fields: IndexMap<String, SmoothField>,
    pub defects: Option<(DefectSpec, DefectLog)>,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub records: Vec<VoyageRecord>,
    /// Daily ocean grid with two depth levels.
    pub ocean: EnvGrid,
    /// Sub-daily atmosphere grid.
    pub atmos: EnvGrid,
    /// Noise-free response per record.
    pub true_fc: Vec<f64>,
    pub manifest: Manifest,
}

impl SynthCorpus {
    /// Writes `reports.csv`, `ocean.csv`, `atmos.bin`, `truth.csv` and
    /// `manifest.json` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<(), SynthError> {
        let w = |e: std::io::Error| SynthError::Write(e.to_string());
        std::fs::create_dir_all(dir).map_err(w)?;
        let f = std::fs::File::create(dir.join("reports.csv")).map_err(w)?;
        write_report_csv(&self.records, &ReportSchema::default(), &TzPolicy::Utc, std::io::BufWriter::new(f))
            .map_err(|e| SynthError::Write(e.to_string()))?;
        write_grid(&self.ocean, &dir.join("ocean.csv"), GridFormat::Csv)?;
        write_grid(&self.atmos, &dir.join("atmos.bin"), GridFormat::PackedBinary)?;
        let mut truth = String::from("row,true_fc\n");
        for (r, v) in self.records.iter().zip(&self.true_fc) {
            truth.push_str(&format!("{},{}\n", r.row, v));
        }
        std::fs::write(dir.join("truth.csv"), truth).map_err(w)?;
        let m = serde_json::to_string_pretty(&self.manifest).map_err(|e| SynthError::Write(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), m + "\n").map_err(w)
    }
}

/// Defect rates in the proportions reported for the real voyage: 30 of 296
/// state-shift rows, a handful of response outliers and startup rows, and
/// ~1% incomplete rows.
pub fn reference_defects(seed: u64) -> DefectSpec {
    DefectSpec {
        seed,
        state_flag_rate: 30.0 / 296.0,
        startup_rate: 4.0 / 296.0,
        outlier_rate: 4.0 / 296.0,
        missing_rate: 3.0 / 296.0,
    }
}
