use serde::{Deserialize, Serialize};

/// Human-readable description and unit of a parameter code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamMeta {
    pub description: String,
    pub unit: String,
}

// Ocean physics codes plus the handful of single-level atmosphere codes the
// synthetic corpus uses. Unknown codes are treated as opaque.
const KNOWN: &[(&str, &str, &str)] = &[
    ("ist", "Sea ice surface temperature", "degC"),
    ("mlotst", "Ocean mixed layer thickness defined by sigma theta", "m"),
    ("pbo", "Sea water pressure at sea floor", "dbar"),
    ("siage", "Age of sea ice", "year"),
    ("sialb", "Sea ice albedo", "%"),
    ("siconc", "Sea ice area fraction", "ratio"),
    ("sisnthick", "Surface snow thickness", "m"),
    ("sithick", "Sea ice thickness", "m"),
    ("sivelo", "Sea ice speed", "m/s"),
    ("sob", "Sea water salinity at sea floor", "1e-3"),
    ("tob", "Sea water potential temperature at sea floor", "degC"),
    ("usi", "Eastward sea ice velocity", "m/s"),
    ("vsi", "Northward sea ice velocity", "m/s"),
    ("zos", "Sea surface height above geoid", "m"),
    ("uo", "Eastward sea water velocity", "m/s"),
    ("vo", "Northward sea water velocity", "m/s"),
    ("so", "Sea water salinity", "1e-3"),
    ("thetao", "Sea water potential temperature", "degC"),
    ("wo", "Upward sea water velocity", "m/s"),
    ("tsn", "Temperature in surface snow", "K"),
    ("u10", "10 metre U wind component", "m/s"),
    ("v10", "10 metre V wind component", "m/s"),
    ("msl", "Mean sea level pressure", "Pa"),
    ("swh", "Significant height of combined wind waves and swell", "m"),
];

pub fn lookup(code: &str) -> ParamMeta {
    KNOWN
        .iter()
        .find(|(c, _, _)| *c == code)
        .map(|(_, d, u)| ParamMeta { description: d.to_string(), unit: u.to_string() })
        .unwrap_or_else(|| ParamMeta { description: code.to_string(), unit: String::new() })
}

pub(crate) fn is_default(code: &str, meta: &ParamMeta) -> bool {
    lookup(code) == *meta
}
