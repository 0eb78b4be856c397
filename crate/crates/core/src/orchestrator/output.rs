//! Run output: CSV table, metadata sidecar, batch report.
//!
//! Numbers are written in Rust's shortest round-trip decimal form with `.`
//! as the separator, so identical runs produce identical bytes. Wall-clock
//! timings live only in the batch report, never in per-run files.

use crate::model::Actuation;
use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Output column contract, in canonical order.
pub const COLUMNS: &[&str] = &[
    "time",
    "t_air",
    "t_out",
    "q_heat",
    "q_cool",
    "p_electric",
    "q_vent",
    "q_sol_trans",
    "u_heat",
    "u_cool",
    "window_open",
    "t_supply",
    "cop",
];

/// One output row's values; the writer picks the selected subset.
#[derive(Debug, Clone, Copy)]
pub struct Row {
    pub time_s: f64,
    pub t_air_c: f64,
    pub t_out_c: f64,
    pub q_heat_w: f64,
    pub q_cool_w: f64,
    pub p_electric_w: f64,
    /// Ventilation heat flow, positive when the zone loses heat.
    pub q_vent_w: f64,
    pub q_sol_trans_w: f64,
    pub actuation: Actuation,
    pub t_supply_c: f64,
    pub cop: f64,
}

impl Row {
    fn get(&self, column: &str) -> f64 {
        match column {
            "time" => self.time_s,
            "t_air" => self.t_air_c,
            "t_out" => self.t_out_c,
            "q_heat" => self.q_heat_w,
            "q_cool" => self.q_cool_w,
            "p_electric" => self.p_electric_w,
            "q_vent" => self.q_vent_w,
            "q_sol_trans" => self.q_sol_trans_w,
            "u_heat" => self.actuation.u_heat,
            "u_cool" => self.actuation.u_cool,
            "window_open" => self.actuation.window_open,
            "t_supply" => self.t_supply_c,
            "cop" => self.cop,
            other => unreachable!("column `{other}` validated at config parse"),
        }
    }
}

/// Accumulates CSV text for one run.
pub struct CsvWriter {
    columns: Vec<String>,
    buffer: String,
    rows: usize,
}

impl CsvWriter {
    pub fn new(columns: &[String]) -> CsvWriter {
        let mut buffer = String::with_capacity(1 << 20);
        buffer.push_str(&columns.join(","));
        buffer.push('\n');
        CsvWriter {
            columns: columns.to_vec(),
            buffer,
            rows: 0,
        }
    }

    pub fn push(&mut self, row: &Row) {
        for (i, c) in self.columns.iter().enumerate() {
            if i > 0 {
                self.buffer.push(',');
            }
            let v = row.get(c);
            // Shortest round-trip decimal; NaN should never reach output.
            self.buffer.push_str(&format!("{v}"));
        }
        self.buffer.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.buffer.as_bytes())
    }
}

/// One applied operational change, as logged in the sidecar.
#[derive(Debug, Clone)]
pub struct ScheduleLogEntry {
    pub at_s: f64,
    pub changes: Vec<(String, Value)>,
    pub recalc_loads: bool,
    pub nominal_heating_power_w: f64,
    pub nominal_cooling_power_w: f64,
}

impl ScheduleLogEntry {
    fn to_json(&self) -> Value {
        let mut changes = Map::new();
        for (k, v) in &self.changes {
            changes.insert(k.clone(), v.clone());
        }
        json!({
            "at_s": self.at_s,
            "changes": Value::Object(changes),
            "recalc_loads": self.recalc_loads,
            "nominal_heating_power_w": self.nominal_heating_power_w,
            "nominal_cooling_power_w": self.nominal_cooling_power_w,
        })
    }
}

/// Everything the metadata sidecar records. Deterministic: resolved
/// parameters are sorted by name, the rest follows fixed insertion order.
pub struct Sidecar<'a> {
    pub run_id: &'a str,
    pub index: usize,
    pub seed: u64,
    pub weather_file: Option<&'a str>,
    pub horizon_s: f64,
    pub output_interval_s: f64,
    pub integrator_step_s: f64,
    pub columns: &'a [String],
    pub variation: &'a [(String, Value)],
    pub parameters: &'a std::collections::BTreeMap<String, Value>,
    pub schedule_log: &'a [ScheduleLogEntry],
}

impl Sidecar<'_> {
    pub fn to_json(&self) -> Value {
        let mut variation = Map::new();
        for (k, v) in self.variation {
            variation.insert(k.clone(), v.clone());
        }
        json!({
            "run_id": self.run_id,
            "index": self.index,
            "engine_version": crate::VERSION,
            "seed": self.seed,
            "weather_file": self.weather_file,
            "simulation": {
                "horizon_s": self.horizon_s,
                "output_interval_s": self.output_interval_s,
                "integrator_step_s": self.integrator_step_s,
                "columns": self.columns,
            },
            "variation": Value::Object(variation),
            "parameters": self.parameters,
            "schedule_log": Value::Array(
                self.schedule_log.iter().map(|e| e.to_json()).collect()
            ),
        })
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(&self.to_json()).expect("sidecar is plain data");
        text.push('\n');
        std::fs::write(path, text)
    }
}

/// Per-run summary inside the batch report.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub run_id: String,
    pub rows: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunFailure {
    pub run_id: String,
    pub error: String,
}

/// Aggregate over a batch; failures never abort sibling runs.
#[derive(Debug, Clone, Default)]
pub struct BatchReport {
    pub total: usize,
    pub succeeded: usize,
    pub failures: Vec<RunFailure>,
    pub runs: Vec<RunSummary>,
    pub total_wall_seconds: f64,
}

impl BatchReport {
    pub fn mean_run_seconds(&self) -> f64 {
        if self.runs.is_empty() {
            0.0
        } else {
            self.runs.iter().map(|r| r.wall_seconds).sum::<f64>() / self.runs.len() as f64
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "total": self.total,
            "succeeded": self.succeeded,
            "failed": self.failures.len(),
            "total_wall_seconds": self.total_wall_seconds,
            "mean_run_seconds": self.mean_run_seconds(),
            "failures": self.failures.iter().map(|f| json!({
                "run_id": f.run_id,
                "error": f.error,
            })).collect::<Vec<_>>(),
            "runs": self.runs.iter().map(|r| json!({
                "run_id": r.run_id,
                "rows": r.rows,
                "wall_seconds": r.wall_seconds,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(&self.to_json()).expect("report is plain data");
        text.push('\n');
        std::fs::write(path, text)
    }
}

/// `<out>/<run_id>/data.csv` and `meta.json` paths.
pub fn run_paths(out_dir: &Path, run_id: &str) -> (PathBuf, PathBuf) {
    let dir = out_dir.join(run_id);
    (dir.join("data.csv"), dir.join("meta.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> Row {
        Row {
            time_s: 900.0,
            t_air_c: 20.5,
            t_out_c: -1.25,
            q_heat_w: 1500.0,
            q_cool_w: 0.0,
            p_electric_w: 600.0,
            q_vent_w: 120.0,
            q_sol_trans_w: 80.0,
            actuation: Actuation {
                u_heat: 0.75,
                u_cool: 0.0,
                window_open: 0.0,
            },
            t_supply_c: 42.0,
            cop: 2.5,
        }
    }

    #[test]
    fn csv_selects_and_orders_columns() {
        let cols: Vec<String> = ["time", "t_air", "u_heat"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut w = CsvWriter::new(&cols);
        w.push(&sample_row());
        assert_eq!(w.buffer, "time,t_air,u_heat\n900,20.5,0.75\n");
        assert_eq!(w.rows(), 1);
    }

    #[test]
    fn numbers_round_trip() {
        let cols: Vec<String> = ["time", "t_out"].iter().map(|s| s.to_string()).collect();
        let mut w = CsvWriter::new(&cols);
        let mut row = sample_row();
        row.t_out_c = 0.1 + 0.2; // 0.30000000000000004
        w.push(&row);
        let text = w.buffer.lines().nth(1).unwrap();
        let parsed: f64 = text.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(parsed.to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn sidecar_shape_is_stable() {
        let params = std::collections::BTreeMap::from([
            ("UExt".to_string(), json!(0.3)),
            ("zone_length".to_string(), json!(10.0)),
        ]);
        let variation = vec![("UExt".to_string(), json!(0.3))];
        let cols = vec!["time".to_string(), "t_air".to_string()];
        let sc = Sidecar {
            run_id: "0000_abcdef12",
            index: 0,
            seed: 7,
            weather_file: Some("munich.epw"),
            horizon_s: 86400.0,
            output_interval_s: 900.0,
            integrator_step_s: 60.0,
            columns: &cols,
            variation: &variation,
            parameters: &params,
            schedule_log: &[],
        };
        let v = sc.to_json();
        assert_eq!(v["run_id"], "0000_abcdef12");
        assert_eq!(v["simulation"]["output_interval_s"], 900.0);
        assert_eq!(v["parameters"]["UExt"], 0.3);
        assert!(v["schedule_log"].as_array().unwrap().is_empty());
        // No timing fields anywhere in the sidecar.
        assert!(!serde_json::to_string(&v).unwrap().contains("seconds"));
    }
}
