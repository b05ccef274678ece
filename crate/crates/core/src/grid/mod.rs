//! Regular lat/lon/time(/depth) rasters of environmental parameters.
//!
//! Values are stored as `f32` (the precision the reanalysis products ship
//! in) with `NaN` marking missing cells; the file-level fill sentinel is only
//! used on disk.

mod catalog;
mod fill;
mod io;

use chrono::{DateTime, Duration, Utc};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::GeoPosition;

pub use catalog::{lookup as catalog_lookup, ParamMeta};
pub use fill::{fill_series, fill_series_at};
pub use io::{load_grid, read_grid_bin, read_grid_csv, write_grid, write_grid_bin, write_grid_csv, GridFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Lat,
    Lon,
    Time,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Lat => "lat",
            Axis::Lon => "lon",
            Axis::Time => "time",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("format error: {0}")]
    Format(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("time step {0}s does not divide 24 h")]
    NonDivisibleStep(i64),
    #[error("query outside grid along {0}")]
    OutOfBounds(Axis),
    #[error("series has no observed values")]
    AllMissing,
    #[error("io: {0}")]
    Io(String),
}

/// Evenly spaced coordinate axis in degrees: `start + i * step`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self, GridError> {
        if !(step > 0.0) || !start.is_finite() || !step.is_finite() {
            return Err(GridError::Format(format!("axis step must be positive, got {step}")));
        }
        if count == 0 {
            return Err(GridError::Format("axis count must be >= 1".into()));
        }
        Ok(Self { start, step, count })
    }

    /// Infers a regular axis from explicit coordinates, accepting deviations
    /// up to `tol` from the fitted `start + i * step`.
    pub fn from_coords(coords: &[f64], tol: f64) -> Result<Self, GridError> {
        match coords {
            [] => Err(GridError::Format("empty coordinate list".into())),
            [c] => Self::new(*c, 1.0, 1),
            _ => {
                let n = coords.len();
                let step = (coords[n - 1] - coords[0]) / (n - 1) as f64;
                let axis = Self::new(coords[0], step, n)?;
                for (i, &c) in coords.iter().enumerate() {
                    if (axis.coord(i) - c).abs() > tol {
                        return Err(GridError::Format(format!(
                            "coordinate {c} at index {i} deviates from regular axis by more than {tol}"
                        )));
                    }
                }
                Ok(axis)
            }
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn last(&self) -> f64 {
        self.coord(self.count - 1)
    }

    /// Nearest index, ties toward the lower index. `None` when `x` lies more
    /// than half a step outside the axis.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let f = (x - self.start) / self.step;
        if !(f >= -0.5) || f > self.count as f64 - 0.5 {
            return None;
        }
        let i = (f - 0.5).ceil().max(0.0) as usize;
        Some(i.min(self.count - 1))
    }
}

/// Evenly spaced time axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis {
    pub start: DateTime<Utc>,
    pub step_seconds: i64,
    pub count: usize,
}

impl TimeAxis {
    pub fn new(start: DateTime<Utc>, step_seconds: i64, count: usize) -> Result<Self, GridError> {
        if step_seconds <= 0 {
            return Err(GridError::Format("time step must be positive".into()));
        }
        if count == 0 {
            return Err(GridError::Format("time axis count must be >= 1".into()));
        }
        Ok(Self { start, step_seconds, count })
    }

    pub fn daily(start: DateTime<Utc>, count: usize) -> Result<Self, GridError> {
        Self::new(start, 86_400, count)
    }

    pub fn at(&self, i: usize) -> DateTime<Utc> {
        self.start + Duration::seconds(self.step_seconds * i as i64)
    }

    pub fn nearest(&self, t: DateTime<Utc>) -> Option<usize> {
        let secs = (t - self.start).num_milliseconds() as f64 / 1000.0;
        let axis = GridAxis { start: 0.0, step: self.step_seconds as f64, count: self.count };
        axis.nearest(secs)
    }
}

/// Result of a point query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvSample {
    pub values: IndexMap<String, Option<f64>>,
    /// `(lat index, lon index, time index)`
    pub matched_cell: (usize, usize, usize),
    /// Larger of the latitude and longitude offsets to the matched cell
    /// center, in degrees.
    pub distance_deg: f64,
}

/// A gridded raster of one or more parameters on shared axes.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvGrid {
    pub lat: GridAxis,
    pub lon: GridAxis,
    pub time: TimeAxis,
    /// Ascending depth levels in meters; `None` for surface-only products.
    pub depth_levels: Option<Vec<f64>>,
    pub fill_value: f32,
    params: IndexMap<String, Vec<f32>>,
    meta: IndexMap<String, ParamMeta>,
}

impl EnvGrid {
    /// Builds a grid, checking every parameter array against the axes.
    /// Arrays are row-major over `(time, depth, lat, lon)`; cells equal to
    /// `fill_value` (or NaN) become missing. Parameters without an entry in
    /// `meta` get one from the built-in catalog.
    pub fn new(
        lat: GridAxis,
        lon: GridAxis,
        time: TimeAxis,
        depth_levels: Option<Vec<f64>>,
        fill_value: f32,
        params: IndexMap<String, Vec<f32>>,
        mut meta: IndexMap<String, ParamMeta>,
    ) -> Result<Self, GridError> {
        if let Some(d) = &depth_levels {
            if d.is_empty() || d.windows(2).any(|w| w[1] <= w[0]) {
                return Err(GridError::Format("depth levels must be non-empty and ascending".into()));
            }
        }
        let nd = depth_levels.as_ref().map_or(1, Vec::len);
        let expected = time.count * nd * lat.count * lon.count;
        let mut clean = IndexMap::with_capacity(params.len());
        for (code, mut values) in params {
            if values.len() != expected {
                return Err(GridError::ShapeMismatch(format!(
                    "param {code}: {} values, axes need {expected}",
                    values.len()
                )));
            }
            for v in values.iter_mut() {
                if *v == fill_value {
                    *v = f32::NAN;
                }
            }
            if !meta.contains_key(&code) {
                meta.insert(code.clone(), catalog::lookup(&code));
            }
            clean.insert(code, values);
        }
        meta.retain(|k, _| clean.contains_key(k));
        Ok(Self { lat, lon, time, depth_levels, fill_value, params: clean, meta })
    }

    pub fn param_codes(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(String::as_str)
    }

    pub fn values(&self, code: &str) -> Option<&[f32]> {
        self.params.get(code).map(Vec::as_slice)
    }

    pub fn meta(&self) -> &IndexMap<String, ParamMeta> {
        &self.meta
    }

    pub fn depth_count(&self) -> usize {
        self.depth_levels.as_ref().map_or(1, Vec::len)
    }

    pub fn cell_count(&self) -> usize {
        self.time.count * self.depth_count() * self.lat.count * self.lon.count
    }

    pub fn index(&self, t: usize, d: usize, i: usize, j: usize) -> usize {
        ((t * self.depth_count() + d) * self.lat.count + i) * self.lon.count + j
    }

    /// Cell value, `None` when missing.
    pub fn get(&self, code: &str, t: usize, d: usize, i: usize, j: usize) -> Option<f64> {
        let v = self.params.get(code)?[self.index(t, d, i, j)];
        (!v.is_nan()).then_some(v as f64)
    }

    // Longitude relative to the axis, trying the 360° aliases so that both
    // [-180, 180) and [0, 360) axes work.
    fn lon_index(&self, lon: f64) -> Option<(usize, f64)> {
        [lon, lon + 360.0, lon - 360.0]
            .into_iter()
            .find_map(|l| self.lon.nearest(l).map(|j| (j, (l - self.lon.coord(j)).abs())))
    }

    /// Nearest-cell lookup, independent per axis. Depth-resolved parameters
    /// are read at the shallowest level.
    pub fn sample_at(&self, pos: &GeoPosition, t: DateTime<Utc>) -> Result<EnvSample, GridError> {
        let i = self.lat.nearest(pos.lat).ok_or(GridError::OutOfBounds(Axis::Lat))?;
        let (j, dlon) = self.lon_index(pos.lon).ok_or(GridError::OutOfBounds(Axis::Lon))?;
        let k = self.time.nearest(t).ok_or(GridError::OutOfBounds(Axis::Time))?;
        let dlat = (pos.lat - self.lat.coord(i)).abs();
        let values = self
            .params
            .keys()
            .map(|c| (c.clone(), self.get(c, k, 0, i, j)))
            .collect();
        Ok(EnvSample { values, matched_cell: (i, j, k), distance_deg: dlat.max(dlon) })
    }

    /// Averages each calendar day (UTC) of a sub-daily grid into one value
    /// stamped at that day's noon. Missing hours are skipped; a day with no
    /// observations stays missing.
    pub fn daily_mean(&self) -> Result<EnvGrid, GridError> {
        let step = self.time.step_seconds;
        if 86_400 % step != 0 {
            return Err(GridError::NonDivisibleStep(step));
        }
        let day0 = self
            .time
            .start
            .date_naive()
            .and_hms_opt(0, 0, 0)
            .expect("midnight exists")
            .and_utc();
        let day_of = |t: usize| ((self.time.at(t) - day0).num_seconds().div_euclid(86_400)) as usize;
        let ndays = day_of(self.time.count - 1) + 1;
        let time = TimeAxis::daily(day0 + Duration::hours(12), ndays)?;
        let plane = self.depth_count() * self.lat.count * self.lon.count;

        let mut params = IndexMap::with_capacity(self.params.len());
        for (code, values) in &self.params {
            let mut sum = vec![0.0f64; ndays * plane];
            let mut cnt = vec![0u32; ndays * plane];
            for t in 0..self.time.count {
                let d = day_of(t);
                let src = &values[t * plane..(t + 1) * plane];
                for (c, &v) in src.iter().enumerate() {
                    if !v.is_nan() {
                        sum[d * plane + c] += v as f64;
                        cnt[d * plane + c] += 1;
                    }
                }
            }
            let out: Vec<f32> = sum
                .iter()
                .zip(&cnt)
                .map(|(&s, &n)| if n == 0 { f32::NAN } else { (s / n as f64) as f32 })
                .collect();
            params.insert(code.clone(), out);
        }
        EnvGrid::new(
            self.lat,
            self.lon,
            time,
            self.depth_levels.clone(),
            self.fill_value,
            params,
            self.meta.clone(),
        )
    }

    /// Crops to the cells whose centers fall inside the given closed ranges.
    pub fn subset(
        &self,
        lat_range: (f64, f64),
        lon_range: (f64, f64),
        time_range: (DateTime<Utc>, DateTime<Utc>),
    ) -> Result<EnvGrid, GridError> {
        let pick = |axis: &GridAxis, (lo, hi): (f64, f64), which: Axis| -> Result<(usize, usize), GridError> {
            let idx: Vec<usize> = (0..axis.count)
                .filter(|&i| axis.coord(i) >= lo && axis.coord(i) <= hi)
                .collect();
            match (idx.first(), idx.last()) {
                (Some(&a), Some(&b)) => Ok((a, b)),
                _ => Err(GridError::OutOfBounds(which)),
            }
        };
        let (i0, i1) = pick(&self.lat, lat_range, Axis::Lat)?;
        let (j0, j1) = pick(&self.lon, lon_range, Axis::Lon)?;
        let tidx: Vec<usize> = (0..self.time.count)
            .filter(|&t| self.time.at(t) >= time_range.0 && self.time.at(t) <= time_range.1)
            .collect();
        let (t0, t1) = match (tidx.first(), tidx.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(GridError::OutOfBounds(Axis::Time)),
        };
        let lat = GridAxis::new(self.lat.coord(i0), self.lat.step, i1 - i0 + 1)?;
        let lon = GridAxis::new(self.lon.coord(j0), self.lon.step, j1 - j0 + 1)?;
        let time = TimeAxis::new(self.time.at(t0), self.time.step_seconds, t1 - t0 + 1)?;
        let nd = self.depth_count();
        let mut params = IndexMap::with_capacity(self.params.len());
        for code in self.params.keys() {
            let src = &self.params[code];
            let mut out = Vec::with_capacity(time.count * nd * lat.count * lon.count);
            for t in t0..=t1 {
                for d in 0..nd {
                    for i in i0..=i1 {
                        for j in j0..=j1 {
                            out.push(src[self.index(t, d, i, j)]);
                        }
                    }
                }
            }
            params.insert(code.clone(), out);
        }
        EnvGrid::new(lat, lon, time, self.depth_levels.clone(), self.fill_value, params, self.meta.clone())
    }
}
