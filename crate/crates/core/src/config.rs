//! Run configuration document.
//!
//! A single JSON file with the sections `building`, `variations`,
//! `schedules`, `simulation` and `weather`; every section is optional.
//! Operational schedules may alternatively live in a second file whose
//! entries are merged with the main document's. Parsing is strict: unknown
//! sections, unknown parameter names and malformed variation axes are
//! errors, not warnings.

use crate::params::{apply_override, defaults, ParamError, ParamMap, ParamValue};
use serde_json::Value;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown section `{0}`")]
    UnknownSection(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("`{name}`: {reason}")]
    BadValue { name: String, reason: String },
    #[error("schedule entry {index}: {reason}")]
    BadSchedule { index: usize, reason: String },
}

/// How variation axes combine into runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinationMode {
    Cartesian,
    Zip,
}

/// Parameter variations: one axis per parameter, in declaration order.
#[derive(Debug, Clone)]
pub struct Variations {
    pub mode: CombinationMode,
    pub axes: Vec<(String, Vec<ParamValue>)>,
}

/// A timed parameter change applied mid-run.
#[derive(Debug, Clone)]
pub struct OperationalChange {
    pub at_s: f64,
    /// Parameter overrides, canonical names.
    pub changes: Vec<(String, ParamValue)>,
    /// Re-derive nominal heating/cooling power from the changed envelope.
    pub recalc_loads: bool,
}

/// Sampling and horizon settings.
#[derive(Debug, Clone)]
pub struct SimulationSettings {
    pub horizon_s: f64,
    pub output_interval_s: f64,
    pub integrator_step_s: f64,
    /// Output column selection; `time` is always first.
    pub columns: Vec<String>,
    pub seed: u64,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        SimulationSettings {
            horizon_s: 365.0 * 86_400.0,
            output_interval_s: 900.0,
            integrator_step_s: 60.0,
            columns: crate::orchestrator::output::COLUMNS
                .iter()
                .map(|c| c.to_string())
                .collect(),
            seed: 0,
        }
    }
}

/// Parsed and validated configuration document.
#[derive(Debug, Clone)]
pub struct ConfigDocument {
    /// Building parameters: defaults plus overrides, canonical names.
    pub building: ParamMap,
    pub variations: Option<Variations>,
    pub schedules: Vec<OperationalChange>,
    pub simulation: SimulationSettings,
    /// Weather file path, resolved against the config file's directory.
    pub weather_file: Option<PathBuf>,
    /// Directory used to resolve relative profile paths.
    pub base_dir: PathBuf,
}

impl ConfigDocument {
    pub fn from_file(path: &Path) -> Result<ConfigDocument, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let mut doc = Self::from_str(&text, &base)?;
        doc.validate_schedules()?;
        Ok(doc)
    }

    /// Parses a document. `base_dir` anchors relative weather and profile
    /// paths.
    pub fn from_str(text: &str, base_dir: &Path) -> Result<ConfigDocument, ConfigError> {
        let root: Value = serde_json::from_str(text)?;
        let Value::Object(sections) = root else {
            return Err(ConfigError::BadValue {
                name: "<document>".into(),
                reason: "top level must be a JSON object".into(),
            });
        };

        let mut doc = ConfigDocument {
            building: defaults(),
            variations: None,
            schedules: Vec::new(),
            simulation: SimulationSettings::default(),
            weather_file: None,
            base_dir: base_dir.to_path_buf(),
        };

        for (section, value) in sections {
            match section.as_str() {
                "building" => parse_building(&value, &mut doc.building)?,
                "variations" => doc.variations = Some(parse_variations(&value)?),
                "schedules" => doc.schedules = parse_schedules(&value)?,
                "simulation" => parse_simulation(&value, &mut doc.simulation)?,
                "weather" => doc.weather_file = parse_weather(&value, base_dir)?,
                other => return Err(ConfigError::UnknownSection(other.to_string())),
            }
        }

        // The weather section wins over the equivalent building parameter.
        if doc.weather_file.is_none() {
            if let Some(ParamValue::Text(p)) = doc.building.get("weather_file") {
                if !p.is_empty() {
                    doc.weather_file = Some(base_dir.join(p));
                }
            }
        }

        doc.validate()?;
        Ok(doc)
    }

    /// Merges schedule entries from the optional second file.
    pub fn merge_schedule_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let root: Value = serde_json::from_str(&text)?;
        // Accept either a bare array or an object with a `schedules` key.
        let entries = match &root {
            Value::Array(_) => parse_schedules(&root)?,
            Value::Object(map) => match map.get("schedules") {
                Some(v) => parse_schedules(v)?,
                None => {
                    return Err(ConfigError::BadValue {
                        name: "<schedule file>".into(),
                        reason: "expected an array or an object with `schedules`".into(),
                    })
                }
            },
            _ => {
                return Err(ConfigError::BadValue {
                    name: "<schedule file>".into(),
                    reason: "expected an array or an object with `schedules`".into(),
                })
            }
        };
        self.schedules.extend(entries);
        self.validate_schedules()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.simulation;
        if !(s.integrator_step_s > 0.0) {
            return Err(ConfigError::BadValue {
                name: "simulation.integrator_step".into(),
                reason: "must be positive".into(),
            });
        }
        if !(s.horizon_s > 0.0) {
            return Err(ConfigError::BadValue {
                name: "simulation.horizon".into(),
                reason: "must be positive".into(),
            });
        }
        let ratio = s.output_interval_s / s.integrator_step_s;
        if !(ratio >= 1.0) || (ratio - ratio.round()).abs() > 1e-9 {
            return Err(ConfigError::BadValue {
                name: "simulation.output_interval".into(),
                reason: format!(
                    "must be a positive multiple of the integrator step {}",
                    s.integrator_step_s
                ),
            });
        }
        for c in &s.columns {
            if !crate::orchestrator::output::COLUMNS.contains(&c.as_str()) {
                return Err(ConfigError::BadValue {
                    name: "simulation.columns".into(),
                    reason: format!("unknown column `{c}`"),
                });
            }
        }
        Ok(())
    }

    /// Checks ordering and horizon bounds over the merged schedule list.
    pub fn validate_schedules(&mut self) -> Result<(), ConfigError> {
        for (i, ch) in self.schedules.iter().enumerate() {
            if !(ch.at_s > 0.0) || ch.at_s >= self.simulation.horizon_s {
                return Err(ConfigError::BadSchedule {
                    index: i,
                    reason: format!(
                        "timestamp {} outside the open horizon (0, {})",
                        ch.at_s, self.simulation.horizon_s
                    ),
                });
            }
            if i > 0 && ch.at_s <= self.schedules[i - 1].at_s {
                return Err(ConfigError::BadSchedule {
                    index: i,
                    reason: "timestamps must be strictly increasing".into(),
                });
            }
        }
        Ok(())
    }
}

fn parse_building(value: &Value, map: &mut ParamMap) -> Result<(), ConfigError> {
    let Value::Object(entries) = value else {
        return Err(ConfigError::BadValue {
            name: "building".into(),
            reason: "must be an object of parameter values".into(),
        });
    };
    for (name, raw) in entries {
        let v = ParamValue::from_json(raw).ok_or_else(|| ConfigError::BadValue {
            name: format!("building.{name}"),
            reason: "unsupported value type".into(),
        })?;
        apply_override(map, name, v)?;
    }
    Ok(())
}

fn parse_variations(value: &Value) -> Result<Variations, ConfigError> {
    let Value::Object(entries) = value else {
        return Err(ConfigError::BadValue {
            name: "variations".into(),
            reason: "must be an object".into(),
        });
    };
    let mut mode = CombinationMode::Cartesian;
    let mut axes = Vec::new();
    for (key, raw) in entries {
        match key.as_str() {
            "mode" => {
                mode = match raw.as_str() {
                    Some("cartesian") => CombinationMode::Cartesian,
                    Some("zip") => CombinationMode::Zip,
                    _ => {
                        return Err(ConfigError::BadValue {
                            name: "variations.mode".into(),
                            reason: "expected \"cartesian\" or \"zip\"".into(),
                        })
                    }
                };
            }
            "parameters" => {
                let Value::Object(params) = raw else {
                    return Err(ConfigError::BadValue {
                        name: "variations.parameters".into(),
                        reason: "must be an object".into(),
                    });
                };
                let base = defaults();
                for (name, spec) in params {
                    let key = crate::params::canonical_name(name).to_string();
                    if !base.contains_key(&key) {
                        return Err(ParamError::UnknownParameter(name.clone()).into());
                    }
                    axes.push((key, parse_axis(name, spec)?));
                }
            }
            other => {
                return Err(ConfigError::BadValue {
                    name: format!("variations.{other}"),
                    reason: "unknown field".into(),
                })
            }
        }
    }
    Ok(Variations { mode, axes })
}

/// One variation axis: an explicit value list, a `{min, max, step}` range,
/// or a single value.
fn parse_axis(name: &str, spec: &Value) -> Result<Vec<ParamValue>, ConfigError> {
    let bad = |reason: String| ConfigError::BadValue {
        name: format!("variations.parameters.{name}"),
        reason,
    };
    match spec {
        Value::Array(items) => items
            .iter()
            .map(|v| ParamValue::from_json(v).ok_or_else(|| bad("unsupported list value".into())))
            .collect(),
        Value::Object(range) => {
            for k in range.keys() {
                if !["min", "max", "step"].contains(&k.as_str()) {
                    return Err(bad(format!("unknown range field `{k}`")));
                }
            }
            let get = |k: &str| -> Result<f64, ConfigError> {
                range
                    .get(k)
                    .and_then(Value::as_f64)
                    .ok_or_else(|| bad(format!("range needs a numeric `{k}`")))
            };
            let (min, max, step) = (get("min")?, get("max")?, get("step")?);
            if !(step > 0.0) {
                return Err(bad("range step must be positive".into()));
            }
            if max < min {
                return Err(bad("range max must not lie below min".into()));
            }
            let mut out = Vec::new();
            let mut k = 0u64;
            loop {
                let v = min + k as f64 * step;
                if v > max + 1e-9 * step {
                    break;
                }
                out.push(ParamValue::Number(v));
                k += 1;
            }
            Ok(out)
        }
        other => ParamValue::from_json(other)
            .map(|v| vec![v])
            .ok_or_else(|| bad("unsupported value type".into())),
    }
}

fn parse_schedules(value: &Value) -> Result<Vec<OperationalChange>, ConfigError> {
    let Value::Array(items) = value else {
        return Err(ConfigError::BadValue {
            name: "schedules".into(),
            reason: "must be an array".into(),
        });
    };
    let base = defaults();
    let mut out = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        let Value::Object(entry) = item else {
            return Err(ConfigError::BadSchedule {
                index,
                reason: "must be an object".into(),
            });
        };
        let mut at_s = None;
        let mut recalc = false;
        let mut changes = Vec::new();
        for (k, v) in entry {
            match k.as_str() {
                "at_s" => {
                    at_s = Some(v.as_f64().ok_or_else(|| ConfigError::BadSchedule {
                        index,
                        reason: "`at_s` must be a number".into(),
                    })?);
                }
                "recalc_loads" => {
                    recalc = v.as_bool().ok_or_else(|| ConfigError::BadSchedule {
                        index,
                        reason: "`recalc_loads` must be a boolean".into(),
                    })?;
                }
                "changes" => {
                    let Value::Object(m) = v else {
                        return Err(ConfigError::BadSchedule {
                            index,
                            reason: "`changes` must be an object".into(),
                        });
                    };
                    for (name, raw) in m {
                        let key = crate::params::canonical_name(name).to_string();
                        if !base.contains_key(&key) {
                            return Err(ParamError::UnknownParameter(name.clone()).into());
                        }
                        if key == "weather_file" {
                            return Err(ConfigError::BadSchedule {
                                index,
                                reason: "weather cannot change mid-run".into(),
                            });
                        }
                        let v = ParamValue::from_json(raw).ok_or_else(|| {
                            ConfigError::BadSchedule {
                                index,
                                reason: format!("unsupported value for `{name}`"),
                            }
                        })?;
                        changes.push((key, v));
                    }
                }
                other => {
                    return Err(ConfigError::BadSchedule {
                        index,
                        reason: format!("unknown field `{other}`"),
                    })
                }
            }
        }
        let at_s = at_s.ok_or_else(|| ConfigError::BadSchedule {
            index,
            reason: "missing `at_s`".into(),
        })?;
        if changes.is_empty() {
            return Err(ConfigError::BadSchedule {
                index,
                reason: "no changes listed".into(),
            });
        }
        out.push(OperationalChange {
            at_s,
            changes,
            recalc_loads: recalc,
        });
    }
    Ok(out)
}

fn parse_simulation(value: &Value, out: &mut SimulationSettings) -> Result<(), ConfigError> {
    let Value::Object(entries) = value else {
        return Err(ConfigError::BadValue {
            name: "simulation".into(),
            reason: "must be an object".into(),
        });
    };
    for (k, v) in entries {
        let numeric = |v: &Value| {
            v.as_f64().ok_or_else(|| ConfigError::BadValue {
                name: format!("simulation.{k}"),
                reason: "must be a number".into(),
            })
        };
        match k.as_str() {
            "horizon_s" => out.horizon_s = numeric(v)?,
            "horizon_days" => out.horizon_s = numeric(v)? * 86_400.0,
            "output_interval_s" => out.output_interval_s = numeric(v)?,
            "integrator_step_s" => out.integrator_step_s = numeric(v)?,
            "seed" => {
                out.seed = v.as_u64().ok_or_else(|| ConfigError::BadValue {
                    name: "simulation.seed".into(),
                    reason: "must be a non-negative integer".into(),
                })?;
            }
            "columns" => {
                let Value::Array(cols) = v else {
                    return Err(ConfigError::BadValue {
                        name: "simulation.columns".into(),
                        reason: "must be an array of column names".into(),
                    });
                };
                let mut names = Vec::with_capacity(cols.len() + 1);
                names.push("time".to_string());
                for c in cols {
                    let s = c.as_str().ok_or_else(|| ConfigError::BadValue {
                        name: "simulation.columns".into(),
                        reason: "column names must be strings".into(),
                    })?;
                    if s != "time" {
                        names.push(s.to_string());
                    }
                }
                out.columns = names;
            }
            other => {
                return Err(ConfigError::BadValue {
                    name: format!("simulation.{other}"),
                    reason: "unknown field".into(),
                })
            }
        }
    }
    Ok(())
}

fn parse_weather(value: &Value, base_dir: &Path) -> Result<Option<PathBuf>, ConfigError> {
    let Value::Object(entries) = value else {
        return Err(ConfigError::BadValue {
            name: "weather".into(),
            reason: "must be an object".into(),
        });
    };
    let mut file = None;
    for (k, v) in entries {
        match k.as_str() {
            "file" => {
                let s = v.as_str().ok_or_else(|| ConfigError::BadValue {
                    name: "weather.file".into(),
                    reason: "must be a path string".into(),
                })?;
                file = Some(base_dir.join(s));
            }
            other => {
                return Err(ConfigError::BadValue {
                    name: format!("weather.{other}"),
                    reason: "unknown field".into(),
                })
            }
        }
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ConfigDocument, ConfigError> {
        ConfigDocument::from_str(text, Path::new("/cfg"))
    }

    #[test]
    fn empty_document_uses_defaults() {
        let doc = parse("{}").unwrap();
        assert!(doc.variations.is_none());
        assert!(doc.schedules.is_empty());
        assert_eq!(doc.simulation.output_interval_s, 900.0);
        assert_eq!(doc.simulation.integrator_step_s, 60.0);
        assert_eq!(doc.simulation.columns[0], "time");
        assert!(doc.weather_file.is_none());
    }

    #[test]
    fn building_overrides_apply() {
        let doc = parse(r#"{"building": {"UExt": 0.21, "thermalZone.gWin": 0.5}}"#).unwrap();
        assert_eq!(doc.building["UExt"], ParamValue::Number(0.21));
        assert_eq!(doc.building["gWin"], ParamValue::Number(0.5));
    }

    #[test]
    fn unknown_parameter_rejected() {
        assert!(matches!(
            parse(r#"{"building": {"UTypo": 1.0}}"#),
            Err(ConfigError::Param(ParamError::UnknownParameter(_)))
        ));
    }

    #[test]
    fn unknown_section_rejected() {
        assert!(matches!(
            parse(r#"{"buildings": {}}"#),
            Err(ConfigError::UnknownSection(_))
        ));
    }

    #[test]
    fn variation_axes_preserve_declaration_order() {
        let doc = parse(
            r#"{"variations": {"parameters": {
                "UExt": [0.1, 0.75, 1.4],
                "airChangeRate": {"min": 0.2, "max": 0.6, "step": 0.2},
                "gWin": 0.55
            }}}"#,
        )
        .unwrap();
        let v = doc.variations.unwrap();
        assert_eq!(v.mode, CombinationMode::Cartesian);
        let names: Vec<&str> = v.axes.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["UExt", "airChangeRate", "gWin"]);
        assert_eq!(v.axes[0].1.len(), 3);
        assert_eq!(v.axes[1].1.len(), 3);
        assert_eq!(v.axes[2].1, vec![ParamValue::Number(0.55)]);
    }

    #[test]
    fn range_axis_is_inclusive() {
        let doc = parse(
            r#"{"variations": {"parameters": {"UExt": {"min": 0.1, "max": 0.4, "step": 0.1}}}}"#,
        )
        .unwrap();
        let axis = &doc.variations.unwrap().axes[0].1;
        assert_eq!(axis.len(), 4);
        match &axis[3] {
            ParamValue::Number(x) => assert!((x - 0.4).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zip_mode_parses() {
        let doc = parse(
            r#"{"variations": {"mode": "zip", "parameters": {"UExt": [0.1, 0.2], "URoof": [0.2, 0.3]}}}"#,
        )
        .unwrap();
        assert_eq!(doc.variations.unwrap().mode, CombinationMode::Zip);
    }

    #[test]
    fn schedules_parse_and_validate() {
        let doc = parse(
            r#"{"schedules": [
                {"at_s": 172800, "changes": {"UExt": 0.2}, "recalc_loads": true},
                {"at_s": 345600, "changes": {"UWin": 0.9}}
            ]}"#,
        )
        .unwrap();
        assert_eq!(doc.schedules.len(), 2);
        assert!(doc.schedules[0].recalc_loads);
        assert!(!doc.schedules[1].recalc_loads);
    }

    #[test]
    fn schedule_ordering_enforced() {
        let mut doc = parse(
            r#"{"schedules": [
                {"at_s": 345600, "changes": {"UExt": 0.2}},
                {"at_s": 172800, "changes": {"UWin": 0.9}}
            ]}"#,
        )
        .unwrap();
        assert!(matches!(
            doc.validate_schedules(),
            Err(ConfigError::BadSchedule { index: 1, .. })
        ));
    }

    #[test]
    fn schedule_weather_change_rejected() {
        assert!(matches!(
            parse(r#"{"schedules": [{"at_s": 100, "changes": {"weather_file": "x.epw"}}]}"#),
            Err(ConfigError::BadSchedule { .. })
        ));
    }

    #[test]
    fn schedule_beyond_horizon_rejected() {
        let mut doc = parse(
            r#"{"simulation": {"horizon_days": 1},
                "schedules": [{"at_s": 90000, "changes": {"UExt": 0.2}}]}"#,
        )
        .unwrap();
        assert!(doc.validate_schedules().is_err());
    }

    #[test]
    fn output_interval_must_align_with_step() {
        assert!(matches!(
            parse(r#"{"simulation": {"output_interval_s": 90, "integrator_step_s": 60}}"#),
            Err(ConfigError::BadValue { .. })
        ));
    }

    #[test]
    fn unknown_column_rejected() {
        assert!(matches!(
            parse(r#"{"simulation": {"columns": ["t_air", "entropy"]}}"#),
            Err(ConfigError::BadValue { .. })
        ));
    }

    #[test]
    fn column_selection_keeps_time_first() {
        let doc = parse(r#"{"simulation": {"columns": ["t_air", "q_heat"]}}"#).unwrap();
        assert_eq!(doc.simulation.columns, ["time", "t_air", "q_heat"]);
    }

    #[test]
    fn weather_section_resolves_against_base_dir() {
        let doc = parse(r#"{"weather": {"file": "munich.epw"}}"#).unwrap();
        assert_eq!(doc.weather_file.unwrap(), PathBuf::from("/cfg/munich.epw"));
    }

    #[test]
    fn building_weather_parameter_used_as_fallback() {
        let doc = parse(r#"{"building": {"weaDat.fileName": "site.epw"}}"#).unwrap();
        assert_eq!(doc.weather_file.unwrap(), PathBuf::from("/cfg/site.epw"));
    }

    #[test]
    fn schedule_file_merges() {
        let dir = tempfile::tempdir().unwrap();
        let main = dir.path().join("main.json");
        std::fs::write(
            &main,
            r#"{"schedules": [{"at_s": 100, "changes": {"UExt": 0.3}}]}"#,
        )
        .unwrap();
        let extra = dir.path().join("extra.json");
        std::fs::write(
            &extra,
            r#"[{"at_s": 200, "changes": {"UWin": 1.0}}]"#,
        )
        .unwrap();
        let mut doc = ConfigDocument::from_file(&main).unwrap();
        doc.merge_schedule_file(&extra).unwrap();
        assert_eq!(doc.schedules.len(), 2);
        assert_eq!(doc.schedules[1].at_s, 200.0);
    }
}
