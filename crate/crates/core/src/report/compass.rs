use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// 16-wind compass rose plus the two non-directional log entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Compass {
    N,
    NNE,
    NE,
    ENE,
    E,
    ESE,
    SE,
    SSE,
    S,
    SSW,
    SW,
    WSW,
    W,
    WNW,
    NW,
    NNW,
    Variable,
    Calm,
}

const ROSE: [Compass; 16] = [
    Compass::N,
    Compass::NNE,
    Compass::NE,
    Compass::ENE,
    Compass::E,
    Compass::ESE,
    Compass::SE,
    Compass::SSE,
    Compass::S,
    Compass::SSW,
    Compass::SW,
    Compass::WSW,
    Compass::W,
    Compass::WNW,
    Compass::NW,
    Compass::NNW,
];

const NAMES: [&str; 16] = [
    "N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE", "S", "SSW", "SW", "WSW", "W", "WNW", "NW",
    "NNW",
];

impl Compass {
    /// Bearing in degrees clockwise from north; `None` for Variable/Calm.
    pub fn bearing_deg(self) -> Option<f64> {
        ROSE.iter().position(|&c| c == self).map(|i| i as f64 * 22.5)
    }

    /// `(sin, cos)` of the bearing; `(0, 0)` for Variable/Calm.
    pub fn sin_cos(self) -> (f64, f64) {
        match self.bearing_deg() {
            Some(d) => {
                let r = d.to_radians();
                (clean(r.sin()), clean(r.cos()))
            }
            None => (0.0, 0.0),
        }
    }

    pub fn all() -> impl Iterator<Item = Compass> {
        ROSE.into_iter().chain([Compass::Variable, Compass::Calm])
    }
}

// snaps sin/cos of multiples of 90° to exact values
fn clean(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-12 {
        r
    } else {
        v
    }
}

impl fmt::Display for Compass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Compass::Variable => f.write_str("VAR"),
            Compass::Calm => f.write_str("CALM"),
            c => f.write_str(NAMES[ROSE.iter().position(|r| r == c).unwrap()]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownCompass(pub String);

impl FromStr for Compass {
    type Err = UnknownCompass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_uppercase();
        if let Some(i) = NAMES.iter().position(|n| *n == t) {
            return Ok(ROSE[i]);
        }
        match t.as_str() {
            "NORTH" => Ok(Compass::N),
            "EAST" => Ok(Compass::E),
            "SOUTH" => Ok(Compass::S),
            "WEST" => Ok(Compass::W),
            "VAR" | "VRB" | "VARIABLE" => Ok(Compass::Variable),
            "CALM" => Ok(Compass::Calm),
            _ => Err(UnknownCompass(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_encodings() {
        assert_eq!(Compass::N.sin_cos(), (0.0, 1.0));
        assert_eq!(Compass::E.sin_cos(), (1.0, 0.0));
        assert_eq!(Compass::S.sin_cos(), (0.0, -1.0));
        assert_eq!(Compass::Calm.sin_cos(), (0.0, 0.0));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for c in Compass::all() {
            assert_eq!(c.to_string().parse::<Compass>().unwrap(), c);
        }
        assert_eq!("nne".parse::<Compass>().unwrap(), Compass::NNE);
        assert!("NEE".parse::<Compass>().is_err());
    }
}
