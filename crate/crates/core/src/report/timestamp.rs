use std::sync::LazyLock;

use chrono::{DateTime, FixedOffset, LocalResult, NaiveDate, NaiveDateTime, TimeZone, Utc};
use chrono_tz::Tz;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::ReportError;

/// How the local clock time printed on a report maps to UTC.
///
/// Report stamps read `1200LT` while the report template talks about Geneva
/// time, so the caller has to say which clock is meant.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum TzPolicy {
    /// Stamps are already UTC.
    #[default]
    Utc,
    /// Constant offset east of UTC, in seconds.
    FixedOffset { seconds: i32 },
    /// IANA zone name, e.g. `Europe/Zurich` for Geneva.
    Named { zone: String },
}

impl TzPolicy {
    pub fn fixed_hours(hours: i32) -> Self {
        TzPolicy::FixedOffset { seconds: hours * 3600 }
    }

    /// Resolves a local wall-clock time to UTC.
    pub fn to_utc(&self, local: NaiveDateTime) -> Result<DateTime<Utc>, ReportError> {
        match self {
            TzPolicy::Utc => Ok(local.and_utc()),
            TzPolicy::FixedOffset { seconds } => {
                let off = FixedOffset::east_opt(*seconds)
                    .ok_or_else(|| ReportError::AmbiguousTimezone(format!("offset {seconds}s")))?;
                single(off.from_local_datetime(&local), &local)
            }
            TzPolicy::Named { zone } => {
                let tz: Tz = zone
                    .parse()
                    .map_err(|_| ReportError::AmbiguousTimezone(format!("unknown zone {zone}")))?;
                single(tz.from_local_datetime(&local), &local)
            }
        }
    }

    /// UTC to local wall-clock time under this policy.
    pub fn to_local(&self, t: DateTime<Utc>) -> Result<NaiveDateTime, ReportError> {
        match self {
            TzPolicy::Utc => Ok(t.naive_utc()),
            TzPolicy::FixedOffset { seconds } => {
                let off = FixedOffset::east_opt(*seconds)
                    .ok_or_else(|| ReportError::AmbiguousTimezone(format!("offset {seconds}s")))?;
                Ok(t.with_timezone(&off).naive_local())
            }
            TzPolicy::Named { zone } => {
                let tz: Tz = zone
                    .parse()
                    .map_err(|_| ReportError::AmbiguousTimezone(format!("unknown zone {zone}")))?;
                Ok(t.with_timezone(&tz).naive_local())
            }
        }
    }
}

fn single<Z: TimeZone>(
    r: LocalResult<DateTime<Z>>,
    local: &NaiveDateTime,
) -> Result<DateTime<Utc>, ReportError> {
    match r {
        LocalResult::Single(t) => Ok(t.with_timezone(&Utc)),
        LocalResult::Ambiguous(..) => Err(ReportError::AmbiguousTimezone(format!(
            "{local} occurs twice in the zone"
        ))),
        LocalResult::None => Err(ReportError::AmbiguousTimezone(format!(
            "{local} does not exist in the zone"
        ))),
    }
}

static STAMP: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?xi)^\s*
        (\d{1,2})\s+([a-z]{3})[a-z]*\.?\s+(\d{4})
        (?:\s|\\n)+
        (\d{2}):?(\d{2})\s*(?:LT)?
        \s*$",
    )
    .expect("valid timestamp regex")
});

const MONTHS: [&str; 12] = [
    "JAN", "FEB", "MAR", "APR", "MAY", "JUN", "JUL", "AUG", "SEP", "OCT", "NOV", "DEC",
];

/// Parses `16 NOV 2021 1200LT` or `19 Nov 2021\n1200LT` and converts the
/// local time to UTC with `tz`.
pub fn parse_report_timestamp(text: &str, tz: &TzPolicy) -> Result<DateTime<Utc>, ReportError> {
    let bad = || ReportError::MalformedDate(text.to_string());
    let caps = STAMP.captures(text).ok_or_else(bad)?;
    let day: u32 = caps[1].parse().map_err(|_| bad())?;
    let mon = caps[2].to_ascii_uppercase();
    let month = MONTHS.iter().position(|m| *m == mon).ok_or_else(bad)? as u32 + 1;
    let year: i32 = caps[3].parse().map_err(|_| bad())?;
    let hour: u32 = caps[4].parse().map_err(|_| bad())?;
    let minute: u32 = caps[5].parse().map_err(|_| bad())?;
    let local = NaiveDate::from_ymd_opt(year, month, day)
        .and_then(|d| d.and_hms_opt(hour, minute, 0))
        .ok_or_else(bad)?;
    tz.to_utc(local)
}

/// Renders the `DD MON YYYY HHMMLT` layout for a UTC instant.
pub fn format_report_timestamp(t: DateTime<Utc>, tz: &TzPolicy) -> Result<String, ReportError> {
    let local = tz.to_local(t)?;
    Ok(local.format("%d %b %Y %H%MLT").to_string().to_uppercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn utc(s: &str) -> DateTime<Utc> {
        s.parse().unwrap()
    }

    #[test]
    fn fixed_offset_shifts_to_utc() {
        let t = parse_report_timestamp("16 NOV 2021 1200LT", &TzPolicy::fixed_hours(1)).unwrap();
        assert_eq!(t, utc("2021-11-16T11:00:00Z"));
    }

    #[test]
    fn utc_passthrough_with_line_break() {
        let t = parse_report_timestamp("19 Nov 2021\n1200LT", &TzPolicy::Utc).unwrap();
        assert_eq!(t, utc("2021-11-19T12:00:00Z"));
        let t = parse_report_timestamp("19 Nov 2021\\n1200LT", &TzPolicy::Utc).unwrap();
        assert_eq!(t, utc("2021-11-19T12:00:00Z"));
    }

    #[test]
    fn impossible_date_rejected() {
        assert!(matches!(
            parse_report_timestamp("31 FEB 2022 1200LT", &TzPolicy::Utc),
            Err(ReportError::MalformedDate(_))
        ));
        assert!(matches!(
            parse_report_timestamp("16 XYZ 2021 1200LT", &TzPolicy::Utc),
            Err(ReportError::MalformedDate(_))
        ));
    }

    #[test]
    fn named_zone_follows_dst() {
        let geneva = TzPolicy::Named { zone: "Europe/Zurich".into() };
        let winter = parse_report_timestamp("16 NOV 2021 1200LT", &geneva).unwrap();
        assert_eq!(winter, utc("2021-11-16T11:00:00Z"));
        let summer = parse_report_timestamp("16 JUL 2022 1200LT", &geneva).unwrap();
        assert_eq!(summer, utc("2022-07-16T10:00:00Z"));
    }

    #[test]
    fn nonexistent_local_time_is_ambiguous() {
        let geneva = TzPolicy::Named { zone: "Europe/Zurich".into() };
        // 2022-03-27 02:30 is skipped by the spring DST jump.
        assert!(matches!(
            parse_report_timestamp("27 MAR 2022 0230LT", &geneva),
            Err(ReportError::AmbiguousTimezone(_))
        ));
        let unknown = TzPolicy::Named { zone: "Mars/Olympus".into() };
        assert!(matches!(
            parse_report_timestamp("27 MAR 2022 1200LT", &unknown),
            Err(ReportError::AmbiguousTimezone(_))
        ));
    }

    #[test]
    fn format_round_trip() {
        let tz = TzPolicy::fixed_hours(1);
        let t = utc("2021-11-16T11:00:00Z");
        let s = format_report_timestamp(t, &tz).unwrap();
        assert_eq!(s, "16 NOV 2021 1200LT");
        assert_eq!(parse_report_timestamp(&s, &tz).unwrap(), t);
    }
}
