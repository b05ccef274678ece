use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::ReportError;

/// Position in decimal degrees. Latitude in [-90, 90], longitude in [-180, 180).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPosition {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPosition {
    pub fn new(lat: f64, lon: f64) -> Result<Self, ReportError> {
        if !lat.is_finite() || lat.abs() > 90.0 {
            return Err(ReportError::OutOfRange(format!("latitude {lat}")));
        }
        if !lon.is_finite() || lon.abs() > 180.0 {
            return Err(ReportError::OutOfRange(format!("longitude {lon}")));
        }
        Ok(Self { lat, lon: normalize_lon(lon) })
    }
}

impl fmt::Display for GeoPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6})", self.lat, self.lon)
    }
}

/// Wraps a longitude into [-180, 180).
pub fn normalize_lon(lon: f64) -> f64 {
    let mut l = (lon + 180.0).rem_euclid(360.0) - 180.0;
    if l >= 180.0 {
        l -= 360.0;
    }
    l
}

// `DD-MM.M[NS]` <sep> `DDD-MM.M[EW]`; the separator may be a real line break,
// the two-character escape `\n` found in some spreadsheet exports, or
// whitespace/comma/semicolon/slash.
static DDM: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?x)^\s*
        (\d{1,2})\s*-\s*(\d{1,2}(?:\.\d+)?)\s*([NSns])
        (?:\s|\\n|[,;/])*
        (\d{1,3})\s*-\s*(\d{1,2}(?:\.\d+)?)\s*([EWew])
        \s*$",
    )
    .expect("valid DDM regex")
});

/// Converts a degrees-decimal-minutes position such as `"02-16.0N\n101-52.5E"`
/// to decimal degrees. South and west are negative.
pub fn parse_ddm_position(text: &str) -> Result<GeoPosition, ReportError> {
    let caps = DDM
        .captures(text)
        .ok_or_else(|| ReportError::MalformedPosition(text.to_string()))?;
    let num = |i: usize| -> f64 { caps[i].parse().expect("regex guarantees digits") };

    let (lat_deg, lat_min) = (num(1), num(2));
    let (lon_deg, lon_min) = (num(4), num(5));
    if lat_min >= 60.0 || lon_min >= 60.0 {
        return Err(ReportError::OutOfRange(format!("minutes >= 60 in {text:?}")));
    }
    let mut lat = lat_deg + lat_min / 60.0;
    let mut lon = lon_deg + lon_min / 60.0;
    if caps[3].eq_ignore_ascii_case("S") {
        lat = -lat;
    }
    if caps[6].eq_ignore_ascii_case("W") {
        lon = -lon;
    }
    GeoPosition::new(lat, lon)
}

/// Inverse of [`parse_ddm_position`] at 0.1 minute resolution, using a line
/// break as separator.
pub fn format_ddm(pos: &GeoPosition) -> String {
    let (lat_d, lat_m) = split_ddm(pos.lat);
    let (lon_d, lon_m) = split_ddm(pos.lon);
    let ns = if pos.lat.is_sign_negative() { 'S' } else { 'N' };
    let ew = if pos.lon.is_sign_negative() { 'W' } else { 'E' };
    format!("{lat_d:02}-{lat_m:04.1}{ns}\n{lon_d:03}-{lon_m:04.1}{ew}")
}

fn split_ddm(dd: f64) -> (u32, f64) {
    let tenths = (dd.abs() * 600.0).round() as u64;
    ((tenths / 600) as u32, (tenths % 600) as f64 / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sample_report_position() {
        let p = parse_ddm_position("02-16.0N\n101-52.5E").unwrap();
        assert!((p.lat - (2.0 + 16.0 / 60.0)).abs() < 1e-12);
        assert!((p.lat - 2.266667).abs() < 1e-6);
        assert!((p.lon - 101.875).abs() < 1e-12);
    }

    #[test]
    fn zero_position() {
        let p = parse_ddm_position("00-00.0N\n000-00.0E").unwrap();
        assert_eq!((p.lat, p.lon), (0.0, 0.0));
    }

    #[test]
    fn southwest_is_negative() {
        let p = parse_ddm_position("36-00.0S\n043-00.0W").unwrap();
        assert_eq!((p.lat, p.lon), (-36.0, -43.0));
    }

    #[test]
    fn escaped_newline_and_spaces_accepted() {
        let a = parse_ddm_position("05-57.0N\\n097-39.5E").unwrap();
        let b = parse_ddm_position(" 05-57.0N  097-39.5E ").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_ddm_position("2.27N 101.9E"),
            Err(ReportError::MalformedPosition(_))
        ));
        assert!(matches!(
            parse_ddm_position("02-60.0N\n101-52.5E"),
            Err(ReportError::OutOfRange(_))
        ));
        assert!(matches!(
            parse_ddm_position("91-00.0N\n101-52.5E"),
            Err(ReportError::OutOfRange(_))
        ));
    }

    #[test]
    fn antimeridian_wraps_to_negative() {
        let p = parse_ddm_position("10-00.0N\n180-00.0E").unwrap();
        assert_eq!(p.lon, -180.0);
    }

    fn ddm_string() -> impl Strategy<Value = String> {
        (0u32..90, 0u32..600, any::<bool>(), 0u32..180, 0u32..600, any::<bool>()).prop_map(
            |(ld, lm, s, od, om, w)| {
                format!(
                    "{:02}-{:04.1}{}\n{:03}-{:04.1}{}",
                    ld,
                    lm as f64 / 10.0,
                    if s { 'S' } else { 'N' },
                    od,
                    om as f64 / 10.0,
                    if w { 'W' } else { 'E' }
                )
            },
        )
    }

    proptest! {
        #[test]
        fn format_round_trips(s in ddm_string()) {
            let p = parse_ddm_position(&s).unwrap();
            prop_assert_eq!(format_ddm(&p), s);
        }

        #[test]
        fn monotone_in_minutes(deg in 0u32..89, m1 in 0u32..599, step in 1u32..10) {
            let m2 = (m1 + step).min(599);
            prop_assume!(m2 > m1);
            let a = parse_ddm_position(&format!("{deg:02}-{:04.1}S 010-00.0E", m1 as f64 / 10.0)).unwrap();
            let b = parse_ddm_position(&format!("{deg:02}-{:04.1}S 010-00.0E", m2 as f64 / 10.0)).unwrap();
            prop_assert!(b.lat.abs() > a.lat.abs());
        }
    }
}
