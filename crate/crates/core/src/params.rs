//! Flat building parameter map: value types, canonical names, defaults.
//!
//! Every building-level knob lives in one string-keyed map so that parameter
//! variations, operational changes and metadata sidecars can treat them
//! uniformly. Values stay close to their JSON form; the converter performs
//! typed extraction.

use serde_json::Value;
use std::collections::BTreeMap;
use thiserror::Error;

/// Prefix marking a value as a reference to another parameter.
pub const LINK_PREFIX: &str = "@link:";

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{name}` expects {expected}")]
    WrongType { name: String, expected: &'static str },
}

/// One parameter value. Links are `Text` values starting with [`LINK_PREFIX`].
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Number(f64),
    Bool(bool),
    Text(String),
    /// Numeric list, used by R/C distribution parameters.
    List(Vec<f64>),
}

impl ParamValue {
    pub fn from_json(v: &Value) -> Option<ParamValue> {
        match v {
            Value::Number(n) => n.as_f64().map(ParamValue::Number),
            Value::Bool(b) => Some(ParamValue::Bool(*b)),
            Value::String(s) => Some(ParamValue::Text(s.clone())),
            Value::Array(items) => items
                .iter()
                .map(|x| x.as_f64())
                .collect::<Option<Vec<f64>>>()
                .map(ParamValue::List),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            ParamValue::Number(n) => serde_json::json!(n),
            ParamValue::Bool(b) => Value::Bool(*b),
            ParamValue::Text(s) => Value::String(s.clone()),
            ParamValue::List(xs) => serde_json::json!(xs),
        }
    }

    pub fn as_link(&self) -> Option<&str> {
        match self {
            ParamValue::Text(s) => s.strip_prefix(LINK_PREFIX),
            _ => None,
        }
    }
}

/// Flat parameter map, deterministically ordered by name.
pub type ParamMap = BTreeMap<String, ParamValue>;

/// User-facing spellings accepted in configs and mapped onto canonical names.
pub const ALIASES: &[(&str, &str)] = &[
    ("thermalZone.gWin", "gWin"),
    ("weaDat.fileName", "weather_file"),
    ("internalGain.fileName", "gain_profile"),
    ("hygienicalWindowOpening.fileName", "window_profile"),
];

/// Canonical parameter names and their defaults. Every entry survives into
/// the resolved parameter map of a run.
pub fn defaults() -> ParamMap {
    use ParamValue::*;
    let mut m = ParamMap::new();
    let mut put = |k: &str, v: ParamValue| m.insert(k.to_string(), v);

    // Geometry.
    put("zone_length", Number(10.0));
    put("zone_width", Number(8.0));
    put("n_floors", Number(1.0));
    put("floor_height", Number(2.5));
    put("fAWin_south", Number(0.15));
    put("fAWin_west", Number(0.10));
    put("fAWin_north", Number(0.05));
    put("fAWin_east", Number(0.10));
    put("fATransToAWindow", Number(0.75));
    put("fARoofToAFloor", Number(1.0));
    put("fAInt", Number(0.5));

    // Envelope U-values [W/m2K] and areal heat capacities [J/m2K].
    put("UExt", Number(0.3));
    put("UIntWall", Number(1.0));
    put("UFloor", Number(0.3));
    put("URoof", Number(0.25));
    put("UWin", Number(1.3));
    put("heatCapacity_wall", Number(265_000.0));
    put("heatCapacity_intWall", Number(60_000.0));
    put("heatCapacity_floor", Number(300_000.0));
    put("heatCapacity_roof", Number(100_000.0));
    put("heatCapacity_furniture_per_m2", Number(10_000.0));
    put("gWin", Number(0.6));

    // Construction profile shortcuts; empty means "not set".
    put("#extWall_construction", Text(String::new()));
    put("#intWall_construction", Text(String::new()));
    put("#floor_construction", Text(String::new()));
    put("#roof_construction", Text(String::new()));

    // RC chain distributions: profile name or explicit fraction list.
    put("extWall_R_distribution", Text("uniform".into()));
    put("extWall_C_distribution", Text("uniform".into()));
    put("intWall_R_distribution", Text("uniform".into()));
    put("intWall_C_distribution", Text("uniform".into()));
    put("floor_R_distribution", Text("uniform".into()));
    put("floor_C_distribution", Text("uniform".into()));
    put("roof_R_distribution", Text("uniform".into()));
    put("roof_C_distribution", Text("uniform".into()));

    // Ventilation.
    put("airChangeRate", Number(0.4));
    put("heatRecoveryRate", Number(0.0));
    put("windowOpeningArea", Number(1.5));
    put("windowOpeningHeight", Number(1.25));

    // Controller.
    put("UseInternalController", Bool(true));
    put("roomTempLowerSetpoint", Number(18.0));
    put("roomTempUpperSetpoint", Number(22.0));
    put("dayWindowStartHour", Number(6.0));
    put("dayWindowEndHour", Number(22.0));
    put("proportionalBand", Number(1.0));
    put("controlInterval", Number(60.0));
    put("UseCoolingController", Bool(false));
    put("coolingSetpoint", Number(26.0));

    // Heating and cooling loads / heat pump surrogate.
    put("heatingConvectiveFraction", Number(0.5));
    put("internalGainsConvectiveFraction", Number(0.5));
    put("relative_heatPump_efficiency", Number(1.0));
    put("heatingCurve_steepness", Number(1.0));
    put("carnotQuality", Number(0.45));
    put("copMin", Number(1.0));
    put("copMax", Number(8.0));
    put("maxSupplyTemperature", Number(70.0));
    put("designOutdoorTemperature", Number(-12.0));
    put("heatingSafetyFactor", Number(1.2));
    put("designCoolingOutdoorTemperature", Number(32.0));
    put("coolingSafetyFactor", Number(1.0));

    // Site and surfaces.
    put("solarAbsorptance", Number(0.6));
    put("albedo", Number(0.2));
    put("groundTemperature", Number(10.0));
    put("initialTemperature", Number(20.0));

    // Profile and weather references; empty means "none configured".
    put("weather_file", Text(String::new()));
    put("gain_profile", Text(String::new()));
    put("window_profile", Text(String::new()));

    m
}

/// Translates a user-facing name to its canonical form.
pub fn canonical_name(name: &str) -> &str {
    for (alias, canonical) in ALIASES {
        if *alias == name {
            return canonical;
        }
    }
    name
}

/// Inserts a user-supplied value, resolving aliases and rejecting unknown
/// names. `base` must already contain the canonical defaults.
pub fn apply_override(base: &mut ParamMap, name: &str, value: ParamValue) -> Result<(), ParamError> {
    let key = canonical_name(name);
    if !base.contains_key(key) {
        return Err(ParamError::UnknownParameter(name.to_string()));
    }
    base.insert(key.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aliases_map_to_canonical_defaults() {
        let d = defaults();
        for (alias, canonical) in ALIASES {
            assert!(!d.contains_key(*alias));
            assert!(d.contains_key(*canonical), "{canonical} missing");
            assert_eq!(canonical_name(alias), *canonical);
        }
    }

    #[test]
    fn overrides_reject_unknown_names() {
        let mut m = defaults();
        assert!(apply_override(&mut m, "UExt", ParamValue::Number(0.5)).is_ok());
        assert!(matches!(
            apply_override(&mut m, "UExterior", ParamValue::Number(0.5)),
            Err(ParamError::UnknownParameter(_))
        ));
    }

    #[test]
    fn alias_override_lands_on_canonical_key() {
        let mut m = defaults();
        apply_override(&mut m, "thermalZone.gWin", ParamValue::Number(0.7)).unwrap();
        assert_eq!(m["gWin"], ParamValue::Number(0.7));
    }

    #[test]
    fn link_values_detected() {
        let v = ParamValue::Text("@link:zone_length".into());
        assert_eq!(v.as_link(), Some("zone_length"));
        assert_eq!(ParamValue::Text("plain".into()).as_link(), None);
    }
}
