//! Normalized grid files.
//!
//! Both formats share a text header:
//!
//! ```text
//! #axes lat=<start>:<step>:<count> lon=<start>:<step>:<count> time=<iso8601 start>:<step-hours>:<count>
//! #params <code>,<code>,...
//! #fill <sentinel>
//! ```
//!
//! Two optional lines may precede `#fill`, which always closes the header:
//! `#depth <level>,<level>,...` (ascending meters) and `#meta <json object>`
//! mapping codes to `{"description", "unit"}`.
//!
//! The CSV body has one row per cell, `t_index,lat_index,lon_index,v1,v2,...`
//! (with `depth_index` after `t_index` when `#depth` is present). The packed
//! binary body is, per parameter in `#params` order, the row-major
//! `(time, depth, lat, lon)` array as little-endian `f32`.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::catalog::{self, ParamMeta};
use super::{EnvGrid, GridAxis, GridError, TimeAxis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridFormat {
    Csv,
    PackedBinary,
}

impl GridFormat {
    /// `.bin` means packed binary, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => GridFormat::PackedBinary,
            _ => GridFormat::Csv,
        }
    }
}

struct Header {
    lat: GridAxis,
    lon: GridAxis,
    time: TimeAxis,
    params: Vec<String>,
    depth: Option<Vec<f64>>,
    meta: IndexMap<String, ParamMeta>,
    fill: f32,
}

fn fmt_err(msg: impl Into<String>) -> GridError {
    GridError::Format(msg.into())
}

fn parse_axis(spec: &str) -> Result<GridAxis, GridError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, step, count] = parts.as_slice() else {
        return Err(fmt_err(format!("axis {spec:?} is not start:step:count")));
    };
    let p = |s: &str| s.trim().parse::<f64>().map_err(|_| fmt_err(format!("bad number {s:?}")));
    let count = count
        .trim()
        .parse::<usize>()
        .map_err(|_| fmt_err(format!("bad count {count:?}")))?;
    GridAxis::new(p(start)?, p(step)?, count)
}

fn parse_time_axis(spec: &str) -> Result<TimeAxis, GridError> {
    // the ISO start itself contains colons
    let mut it = spec.rsplitn(3, ':');
    let (count, step, start) = match (it.next(), it.next(), it.next()) {
        (Some(c), Some(s), Some(t)) => (c, s, t),
        _ => return Err(fmt_err(format!("time axis {spec:?} is not start:step-hours:count"))),
    };
    let start: DateTime<Utc> = start
        .trim()
        .parse()
        .map_err(|_| fmt_err(format!("bad time start {start:?}")))?;
    let hours: f64 = step.trim().parse().map_err(|_| fmt_err(format!("bad step {step:?}")))?;
    let count: usize = count.trim().parse().map_err(|_| fmt_err(format!("bad count {count:?}")))?;
    TimeAxis::new(start, (hours * 3600.0).round() as i64, count)
}

fn parse_header(lines: &mut dyn Iterator<Item = Result<String, GridError>>) -> Result<Header, GridError> {
    let mut axes: Option<(GridAxis, GridAxis, TimeAxis)> = None;
    let mut params: Option<Vec<String>> = None;
    let mut depth = None;
    let mut meta = IndexMap::new();
    loop {
        let line = lines.next().ok_or_else(|| fmt_err("header ended before #fill"))??;
        let line = line.trim_end_matches(['\r', '\n']);
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match key {
            "#axes" => {
                let mut lat = None;
                let mut lon = None;
                let mut time = None;
                for tok in rest.split_whitespace() {
                    match tok.split_once('=') {
                        Some(("lat", v)) => lat = Some(parse_axis(v)?),
                        Some(("lon", v)) => lon = Some(parse_axis(v)?),
                        Some(("time", v)) => time = Some(parse_time_axis(v)?),
                        _ => return Err(fmt_err(format!("unknown axis token {tok:?}"))),
                    }
                }
                match (lat, lon, time) {
                    (Some(a), Some(b), Some(c)) => axes = Some((a, b, c)),
                    _ => return Err(fmt_err("#axes must declare lat, lon and time")),
                }
            }
            "#params" => {
                let codes: Vec<String> = rest
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                if codes.is_empty() {
                    return Err(fmt_err("#params lists no parameters"));
                }
                params = Some(codes);
            }
            "#depth" => {
                let levels = rest
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|_| fmt_err(format!("bad depth {s:?}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                depth = Some(levels);
            }
            "#meta" => {
                meta = serde_json::from_str(rest).map_err(|e| fmt_err(format!("#meta: {e}")))?;
            }
            "#fill" => {
                let fill = rest
                    .parse::<f32>()
                    .map_err(|_| fmt_err(format!("bad fill value {rest:?}")))?;
                let (lat, lon, time) = axes.ok_or_else(|| fmt_err("missing #axes line"))?;
                let params = params.ok_or_else(|| fmt_err("missing #params line"))?;
                return Ok(Header { lat, lon, time, params, depth, meta, fill });
            }
            other => return Err(fmt_err(format!("unexpected header line {other:?}"))),
        }
    }
}

fn header_text(g: &EnvGrid) -> String {
    let mut s = format!(
        "#axes lat={}:{}:{} lon={}:{}:{} time={}:{}:{}\n#params {}\n",
        g.lat.start,
        g.lat.step,
        g.lat.count,
        g.lon.start,
        g.lon.step,
        g.lon.count,
        g.time.start.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        g.time.step_seconds as f64 / 3600.0,
        g.time.count,
        g.param_codes().collect::<Vec<_>>().join(",")
    );
    if let Some(d) = &g.depth_levels {
        let levels: Vec<String> = d.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("#depth {}\n", levels.join(",")));
    }
    if g.meta().iter().any(|(k, m)| !catalog::is_default(k, m)) {
        s.push_str(&format!(
            "#meta {}\n",
            serde_json::to_string(g.meta()).expect("meta serializes")
        ));
    }
    s.push_str(&format!("#fill {}\n", g.fill_value));
    s
}

fn build(h: Header, mut params: IndexMap<String, Vec<f32>>) -> Result<EnvGrid, GridError> {
    let mut ordered = IndexMap::with_capacity(h.params.len());
    for code in &h.params {
        ordered.insert(code.clone(), params.shift_remove(code).unwrap_or_default());
    }
    EnvGrid::new(h.lat, h.lon, h.time, h.depth, h.fill, ordered, h.meta)
}

fn io_err(e: std::io::Error) -> GridError {
    GridError::Io(e.to_string())
}

/// Reads the CSV grid layout.
pub fn read_grid_csv<R: Read>(reader: R) -> Result<EnvGrid, GridError> {
    let mut lines = BufReader::new(reader).lines().map(|l| l.map_err(io_err));
    let h = parse_header(&mut lines)?;
    let nd = h.depth.as_ref().map_or(1, Vec::len);
    let (nt, ni, nj, np) = (h.time.count, h.lat.count, h.lon.count, h.params.len());
    let total = nt * nd * ni * nj;
    let mut data = vec![vec![f32::NAN; total]; np];
    let mut seen = vec![false; total];
    let n_idx = if h.depth.is_some() { 4 } else { 3 };

    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != n_idx + np {
            return Err(GridError::ShapeMismatch(format!(
                "data line {}: {} fields, expected {}",
                lineno + 1,
                fields.len(),
                n_idx + np
            )));
        }
        let idx = |k: usize| -> Result<usize, GridError> {
            fields[k]
                .parse::<usize>()
                .map_err(|_| fmt_err(format!("data line {}: bad index {:?}", lineno + 1, fields[k])))
        };
        let (t, d, i, j) = if n_idx == 4 {
            (idx(0)?, idx(1)?, idx(2)?, idx(3)?)
        } else {
            (idx(0)?, 0, idx(1)?, idx(2)?)
        };
        if t >= nt || d >= nd || i >= ni || j >= nj {
            return Err(GridError::ShapeMismatch(format!(
                "data line {}: index outside declared axes",
                lineno + 1
            )));
        }
        let cell = ((t * nd + d) * ni + i) * nj + j;
        if std::mem::replace(&mut seen[cell], true) {
            return Err(GridError::ShapeMismatch(format!("data line {}: duplicate cell", lineno + 1)));
        }
        for (p, raw) in fields[n_idx..].iter().enumerate() {
            let v = if raw.is_empty() || raw.eq_ignore_ascii_case("nan") {
                f32::NAN
            } else {
                raw.parse::<f32>()
                    .map_err(|_| fmt_err(format!("data line {}: bad value {raw:?}", lineno + 1)))?
            };
            data[p][cell] = v;
        }
    }
    let have = seen.iter().filter(|s| **s).count();
    if have != total {
        return Err(GridError::ShapeMismatch(format!("{have} cells present, axes need {total}")));
    }
    let params = h.params.iter().cloned().zip(data).collect();
    build(h, params)
}

/// Reads the packed-binary layout.
pub fn read_grid_bin(bytes: &[u8]) -> Result<EnvGrid, GridError> {
    let mut pos = 0usize;
    let mut next_line = || -> Option<Result<String, GridError>> {
        if pos >= bytes.len() {
            return None;
        }
        let end = bytes[pos..].iter().position(|&b| b == b'\n').map(|e| pos + e)?;
        let line = String::from_utf8(bytes[pos..end].to_vec()).map_err(|_| fmt_err("header is not UTF-8"));
        pos = end + 1;
        Some(line)
    };
    let mut it = std::iter::from_fn(&mut next_line);
    let h = parse_header(&mut it)?;
    let body = &bytes[pos..];
    let nd = h.depth.as_ref().map_or(1, Vec::len);
    let per = h.time.count * nd * h.lat.count * h.lon.count;
    let expected = per * h.params.len() * 4;
    if body.len() != expected {
        return Err(GridError::ShapeMismatch(format!(
            "binary body has {} bytes, axes need {expected}",
            body.len()
        )));
    }
    let mut params = IndexMap::new();
    for (p, code) in h.params.iter().enumerate() {
        let chunk = &body[p * per * 4..(p + 1) * per * 4];
        let vals = chunk
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        params.insert(code.clone(), vals);
    }
    build(h, params)
}

fn on_disk(g: &EnvGrid, v: f32) -> f32 {
    if v.is_nan() {
        g.fill_value
    } else {
        v
    }
}

pub fn write_grid_csv<W: Write>(g: &EnvGrid, mut w: W) -> Result<(), GridError> {
    w.write_all(header_text(g).as_bytes()).map_err(io_err)?;
    let codes: Vec<&str> = g.param_codes().collect();
    let depth = g.depth_levels.is_some();
    let mut line = String::new();
    for t in 0..g.time.count {
        for d in 0..g.depth_count() {
            for i in 0..g.lat.count {
                for j in 0..g.lon.count {
                    line.clear();
                    if depth {
                        line.push_str(&format!("{t},{d},{i},{j}"));
                    } else {
                        line.push_str(&format!("{t},{i},{j}"));
                    }
                    let idx = g.index(t, d, i, j);
                    for c in &codes {
                        let v = on_disk(g, g.values(c).expect("code exists")[idx]);
                        line.push_str(&format!(",{v}"));
                    }
                    line.push('\n');
                    w.write_all(line.as_bytes()).map_err(io_err)?;
                }
            }
        }
    }
    w.flush().map_err(io_err)
}

pub fn write_grid_bin<W: Write>(g: &EnvGrid, mut w: W) -> Result<(), GridError> {
    w.write_all(header_text(g).as_bytes()).map_err(io_err)?;
    let mut buf = Vec::with_capacity(g.cell_count() * 4);
    for c in g.param_codes() {
        buf.clear();
        for &v in g.values(c).expect("code exists") {
            buf.extend_from_slice(&on_disk(g, v).to_le_bytes());
        }
        w.write_all(&buf).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn load_grid(path: &Path, format: GridFormat) -> Result<EnvGrid, GridError> {
    match format {
        GridFormat::Csv => read_grid_csv(fs::File::open(path).map_err(io_err)?),
        GridFormat::PackedBinary => read_grid_bin(&fs::read(path).map_err(io_err)?),
    }
}

pub fn write_grid(g: &EnvGrid, path: &Path, format: GridFormat) -> Result<(), GridError> {
    let f = std::io::BufWriter::new(fs::File::create(path).map_err(io_err)?);
    match format {
        GridFormat::Csv => write_grid_csv(g, f),
        GridFormat::PackedBinary => write_grid_bin(g, f),
    }
}
