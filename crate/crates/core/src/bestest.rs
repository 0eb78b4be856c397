//! Bundled ASHRAE 140 test cases and their reference ranges.
//!
//! The four cases share one 8 x 6 x 2.7 m zone with 12 m2 of south glazing;
//! TC600 is the lightweight construction, TC900 the heavyweight one, and the
//! FF variants run free-floating. Case configs ship with the crate; the
//! Denver-area weather file is supplied by the caller since it is not
//! redistributable.

use crate::config::{ConfigDocument, ConfigError};
use crate::orchestrator::{self, RunError, RunOutcome};
use crate::weather::parse_epw_file;
use std::path::Path;
use thiserror::Error;

pub const CASE_NAMES: [&str; 4] = ["TC600", "TC900", "TC600FF", "TC900FF"];

const TC600_JSON: &str = include_str!("../assets/bestest/tc600.json");
const TC900_JSON: &str = include_str!("../assets/bestest/tc900.json");
const TC600FF_JSON: &str = include_str!("../assets/bestest/tc600ff.json");
const TC900FF_JSON: &str = include_str!("../assets/bestest/tc900ff.json");

#[derive(Debug, Error)]
pub enum BestestError {
    #[error("unknown case `{0}`; expected one of TC600, TC900, TC600FF, TC900FF")]
    UnknownCase(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("weather: {0}")]
    Weather(#[from] crate::weather::WeatherError),
}

/// One checked metric with its published acceptance range.
#[derive(Debug, Clone, Copy)]
pub struct Metric {
    pub name: &'static str,
    pub unit: &'static str,
    pub low: f64,
    pub high: f64,
    pub value: f64,
}

impl Metric {
    pub fn pass(&self) -> bool {
        self.value >= self.low && self.value <= self.high
    }
}

#[derive(Debug)]
pub struct CaseOutcome {
    pub case_name: &'static str,
    pub metrics: Vec<Metric>,
    pub outcome: RunOutcome,
}

impl CaseOutcome {
    pub fn pass(&self) -> bool {
        self.metrics.iter().all(Metric::pass)
    }
}

/// Bundled configuration text for a case name (case-insensitive).
pub fn case_config(name: &str) -> Option<(&'static str, &'static str)> {
    match name.to_ascii_uppercase().as_str() {
        "TC600" => Some(("TC600", TC600_JSON)),
        "TC900" => Some(("TC900", TC900_JSON)),
        "TC600FF" => Some(("TC600FF", TC600FF_JSON)),
        "TC900FF" => Some(("TC900FF", TC900FF_JSON)),
        _ => None,
    }
}

/// Acceptance ranges without the measured value filled in.
fn reference_ranges(case: &str) -> Vec<Metric> {
    let m = |name, unit, low, high| Metric {
        name,
        unit,
        low,
        high,
        value: f64::NAN,
    };
    match case {
        "TC600" => vec![
            m("annual heating", "MWh", 4.298, 5.709),
            m("annual cooling", "MWh", 6.137, 7.964),
        ],
        "TC900" => vec![
            m("annual heating", "MWh", 1.17, 1.988),
            m("annual cooling", "MWh", 2.132, 3.415),
        ],
        "TC600FF" => vec![
            m("mean air temperature", "degC", 24.6, 25.9),
            m("min air temperature", "degC", -18.8, -15.6),
            m("max air temperature", "degC", 64.9, 69.5),
        ],
        "TC900FF" => vec![
            m("mean air temperature", "degC", 24.6, 25.9),
            m("min air temperature", "degC", -4.5, -1.6),
            m("max air temperature", "degC", 41.8, 44.8),
        ],
        _ => unreachable!("validated case name"),
    }
}

/// Parses a bundled case into a run-ready document with the given weather.
pub fn case_document(name: &str, weather: &Path) -> Result<ConfigDocument, BestestError> {
    let (case, json) = case_config(name).ok_or_else(|| BestestError::UnknownCase(name.into()))?;
    let base = weather.parent().unwrap_or(Path::new("."));
    let mut doc = ConfigDocument::from_str(json, base)?;
    doc.weather_file = Some(weather.to_path_buf());
    debug_assert_eq!(case, case.to_ascii_uppercase());
    Ok(doc)
}

/// Runs a case against the supplied weather file and fills the metric values.
/// Outputs land under `out_dir` like any other run.
pub fn run_case(name: &str, weather: &Path, out_dir: &Path) -> Result<CaseOutcome, BestestError> {
    let (case, _) = case_config(name).ok_or_else(|| BestestError::UnknownCase(name.into()))?;
    let doc = case_document(case, weather)?;
    let series = parse_epw_file(weather)?;
    let plans = orchestrator::expand(&doc).map_err(|e| {
        RunError::BadPlan(format!("case expansion: {e}"))
    })?;
    let outcome = orchestrator::run_one(&plans[0], &series, out_dir)?;

    let mut metrics = reference_ranges(case);
    for metric in &mut metrics {
        metric.value = match metric.name {
            "annual heating" => outcome.ledger.heating_j / 3.6e9,
            "annual cooling" => outcome.ledger.cooling_j / 3.6e9,
            "mean air temperature" => outcome.t_air_mean_c,
            "min air temperature" => outcome.t_air_min_c,
            "max air temperature" => outcome.t_air_max_c,
            other => unreachable!("unmapped metric {other}"),
        };
    }
    Ok(CaseOutcome {
        case_name: case,
        metrics,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::converter;
    use crate::params::ParamValue;

    #[test]
    fn all_bundled_configs_parse_and_resolve() {
        for name in CASE_NAMES {
            let (_, json) = case_config(name).unwrap();
            let doc = ConfigDocument::from_str(json, Path::new(".")).unwrap();
            let model = converter::resolve(&doc.building)
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            // 12 m2 of south glazing on the 8 m facade.
            assert!((model.windows.areas_m2[0] - 12.0).abs() < 1e-9, "{name}");
            assert_eq!(model.windows.areas_m2[1..], [0.0, 0.0, 0.0], "{name}");
            assert!((model.volume_m3 - 129.6).abs() < 1e-9);
            assert!((model.floor_area_m2 - 48.0).abs() < 1e-9);
            assert!(model.nominal_heating_power_w > 0.0);
            // Single zone without internal partitions.
            assert!(model.components.iter().all(|c| c.name != "int_wall"));
        }
    }

    #[test]
    fn heavyweight_case_carries_more_mass() {
        let light = converter::resolve(
            &case_document("TC600", Path::new("w.epw")).unwrap().building,
        )
        .unwrap();
        let heavy = converter::resolve(
            &case_document("TC900", Path::new("w.epw")).unwrap().building,
        )
        .unwrap();
        let mass = |m: &crate::model::ResolvedModel| -> f64 {
            m.components
                .iter()
                .flat_map(|c| c.capacities_j_k)
                .sum::<f64>()
        };
        assert!(mass(&heavy) > 4.0 * mass(&light));
    }

    #[test]
    fn free_float_variants_disable_control() {
        for name in ["TC600FF", "TC900FF"] {
            let doc = case_document(name, Path::new("w.epw")).unwrap();
            assert_eq!(doc.building["UseInternalController"], ParamValue::Bool(false));
            assert_eq!(doc.building["UseCoolingController"], ParamValue::Bool(false));
        }
    }

    #[test]
    fn reference_ranges_match_published_values() {
        let r = reference_ranges("TC600");
        assert_eq!((r[0].low, r[0].high), (4.298, 5.709));
        assert_eq!((r[1].low, r[1].high), (6.137, 7.964));
        let r = reference_ranges("TC900");
        assert_eq!((r[0].low, r[0].high), (1.17, 1.988));
        assert_eq!((r[1].low, r[1].high), (2.132, 3.415));
        let r = reference_ranges("TC600FF");
        assert_eq!((r[1].low, r[1].high), (-18.8, -15.6));
        assert_eq!((r[2].low, r[2].high), (64.9, 69.5));
        let r = reference_ranges("TC900FF");
        assert_eq!((r[0].low, r[0].high), (24.6, 25.9));
        assert_eq!((r[1].low, r[1].high), (-4.5, -1.6));
        assert_eq!((r[2].low, r[2].high), (41.8, 44.8));
    }

    #[test]
    fn unknown_case_rejected() {
        assert!(matches!(
            run_case("TC700", Path::new("w.epw"), Path::new(".")),
            Err(BestestError::UnknownCase(_))
        ));
        assert!(case_config("tc600").is_some(), "case-insensitive lookup");
    }

    #[test]
    fn metrics_fill_from_synthetic_run() {
        let dir = tempfile::tempdir().unwrap();
        let epw = dir.path().join("flat.epw");
        let mut s = String::from(
            "LOCATION,Testville,ST,XX,SRC,000000,39.76,-104.86,-7.0,1609.0\n\
             DESIGN CONDITIONS,0\nTYPICAL/EXTREME PERIODS,0\nGROUND TEMPERATURES,0\n\
             HOLIDAYS/DAYLIGHT SAVINGS,No,0,0,0\nCOMMENTS 1,synthetic\nCOMMENTS 2,\n\
             DATA PERIODS,1,1,Data,Sunday,1/1,12/31\n",
        );
        for i in 0..24 {
            let mut f = vec!["0".to_string(); 35];
            f[0] = "2020".into();
            f[1] = "1".into();
            f[2] = "1".into();
            f[3] = (i + 1).to_string();
            f[6] = "-2".into();
            s.push_str(&f.join(","));
            s.push('\n');
        }
        std::fs::write(&epw, s).unwrap();

        // Shorten the horizon so the test stays fast; metric extraction is
        // identical to the full-year path.
        let mut doc = case_document("TC600", &epw).unwrap();
        doc.simulation.horizon_s = 2.0 * 86_400.0;
        let plans = orchestrator::expand(&doc).unwrap();
        let series = parse_epw_file(&epw).unwrap();
        let outcome = orchestrator::run_one(&plans[0], &series, dir.path()).unwrap();
        assert!(outcome.ledger.heating_j > 0.0, "heated at -2 degC outdoors");
        assert!(outcome.t_air_min_c > 15.0);
        assert!(outcome.t_air_max_c < 28.0);
    }
}
