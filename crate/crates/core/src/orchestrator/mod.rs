//! Batch orchestration: variation expansion, run execution, parallel
//! scheduling, file output.
//!
//! Each run is fully isolated (own model, state, writer); outputs are
//! byte-identical regardless of worker count. Wall-clock timings appear
//! only in the batch report.

pub mod output;

use crate::config::{
    CombinationMode, ConfigDocument, OperationalChange, SimulationSettings,
};
use crate::converter::{self, ConvertError};
use crate::model::control::{ControllerFault, ControllerObservation, ExternalController};
use crate::model::heat_pump::heat_pump_power;
use crate::model::integrator::{Simulator, StepError, StepInputs};
use crate::model::network::NetworkError;
use crate::model::{control, Actuation};
use crate::params::{ParamMap, ParamValue};
use crate::profiles::{self, Profile, ProfileError, ProfileKind};
use crate::weather::{parse_epw_file, WeatherError, WeatherSeries};
use output::{BatchReport, CsvWriter, Row, RunFailure, RunSummary, ScheduleLogEntry, Sidecar};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("variation `{param}`: zip mode needs {expected} values, got {got}")]
    ZipLengthMismatch {
        param: String,
        expected: usize,
        got: usize,
    },
    #[error("variation `{param}` has no values")]
    EmptyVariationSet { param: String },
    #[error("batch i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("weather: {0}")]
    Weather(#[from] WeatherError),
    #[error("convert: {0}")]
    Convert(#[from] ConvertError),
    #[error("network: {0}")]
    Network(#[from] NetworkError),
    #[error("integrate: {0}")]
    Step(#[from] StepError),
    #[error("profile: {0}")]
    Profile(#[from] ProfileError),
    #[error("controller fault at t={}: {}", .0.time_s, .0.reason)]
    Controller(ControllerFault),
    #[error("run i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    BadPlan(String),
}

/// One fully specified simulation.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub index: usize,
    pub run_id: String,
    /// Building parameters with the variation overrides applied.
    pub params: ParamMap,
    /// The overrides this run received, in axis declaration order.
    pub overrides: Vec<(String, ParamValue)>,
    pub schedules: Vec<OperationalChange>,
    pub weather_file: Option<PathBuf>,
    pub settings: SimulationSettings,
    /// Anchor for relative profile paths.
    pub base_dir: PathBuf,
}

/// Result summary of one successful run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run_id: String,
    pub csv_path: PathBuf,
    pub meta_path: PathBuf,
    pub rows: usize,
    pub ledger: crate::model::integrator::EnergyLedger,
    pub energy_residual_j: f64,
    pub final_air_temperature_c: f64,
    /// Statistics over the emitted air-temperature rows.
    pub t_air_min_c: f64,
    pub t_air_max_c: f64,
    pub t_air_mean_c: f64,
    pub wall_seconds: f64,
}

// Expansion -------------------------------------------------------------------

/// Expands a config document into concrete run plans, one per variation
/// combination, in deterministic declaration order.
pub fn expand(doc: &ConfigDocument) -> Result<Vec<RunPlan>, OrchestratorError> {
    let combos = match &doc.variations {
        None => vec![Vec::new()],
        Some(v) => expand_axes(&v.axes, v.mode)?,
    };
    let width = combos.len().saturating_sub(1).to_string().len().max(4);

    let mut plans = Vec::with_capacity(combos.len());
    for (index, overrides) in combos.into_iter().enumerate() {
        let mut params = doc.building.clone();
        for (name, value) in &overrides {
            // Names were validated against the registry at parse time.
            params.insert(name.clone(), value.clone());
        }
        let digest = content_hash(&params, &doc.schedules, &doc.simulation, &doc.weather_file);
        let run_id = format!("{index:0width$}_{digest}");
        plans.push(RunPlan {
            index,
            run_id,
            params,
            overrides,
            schedules: doc.schedules.clone(),
            weather_file: doc.weather_file.clone(),
            settings: doc.simulation.clone(),
            base_dir: doc.base_dir.clone(),
        });
    }
    Ok(plans)
}

fn expand_axes(
    axes: &[(String, Vec<ParamValue>)],
    mode: CombinationMode,
) -> Result<Vec<Vec<(String, ParamValue)>>, OrchestratorError> {
    for (name, values) in axes {
        if values.is_empty() {
            return Err(OrchestratorError::EmptyVariationSet {
                param: name.clone(),
            });
        }
    }
    if axes.is_empty() {
        return Ok(vec![Vec::new()]);
    }

    match mode {
        CombinationMode::Cartesian => {
            let total: usize = axes.iter().map(|(_, v)| v.len()).product();
            let mut strides = vec![1usize; axes.len()];
            for i in (0..axes.len().saturating_sub(1)).rev() {
                strides[i] = strides[i + 1] * axes[i + 1].1.len();
            }
            let mut out = Vec::with_capacity(total);
            for idx in 0..total {
                let combo = axes
                    .iter()
                    .zip(&strides)
                    .map(|((name, values), stride)| {
                        let pick = (idx / stride) % values.len();
                        (name.clone(), values[pick].clone())
                    })
                    .collect();
                out.push(combo);
            }
            Ok(out)
        }
        CombinationMode::Zip => {
            let n = axes.iter().map(|(_, v)| v.len()).max().unwrap_or(1);
            for (name, values) in axes {
                if values.len() != 1 && values.len() != n {
                    return Err(OrchestratorError::ZipLengthMismatch {
                        param: name.clone(),
                        expected: n,
                        got: values.len(),
                    });
                }
            }
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let combo = axes
                    .iter()
                    .map(|(name, values)| {
                        let v = if values.len() == 1 { &values[0] } else { &values[i] };
                        (name.clone(), v.clone())
                    })
                    .collect();
                out.push(combo);
            }
            Ok(out)
        }
    }
}

/// Eight hex characters over the run's full specification.
fn content_hash(
    params: &ParamMap,
    schedules: &[OperationalChange],
    settings: &SimulationSettings,
    weather: &Option<PathBuf>,
) -> String {
    let mut hasher = Sha256::new();
    for (k, v) in params {
        hasher.update(k.as_bytes());
        hasher.update(b"=");
        hasher.update(serde_json::to_string(&v.to_json()).unwrap().as_bytes());
        hasher.update(b";");
    }
    for ch in schedules {
        hasher.update(format!("@{}:{}", ch.at_s, ch.recalc_loads).as_bytes());
        for (k, v) in &ch.changes {
            hasher.update(k.as_bytes());
            hasher.update(serde_json::to_string(&v.to_json()).unwrap().as_bytes());
        }
    }
    hasher.update(
        format!(
            "|{}|{}|{}|{}|{}",
            settings.horizon_s,
            settings.output_interval_s,
            settings.integrator_step_s,
            settings.seed,
            settings.columns.join(",")
        )
        .as_bytes(),
    );
    if let Some(w) = weather {
        hasher.update(w.to_string_lossy().as_bytes());
    }
    let digest = hasher.finalize();
    digest[..4].iter().map(|b| format!("{b:02x}")).collect()
}

// Profile wiring ----------------------------------------------------------------

/// Interprets a profile parameter: empty = none, `constant:<value>`,
/// an archetype name, or a CSV path relative to the config directory.
fn profile_from_param(
    params: &ParamMap,
    key: &str,
    kind: ProfileKind,
    base_dir: &Path,
    seed: u64,
) -> Result<Option<Profile>, RunError> {
    let Some(ParamValue::Text(source)) = params.get(key) else {
        return Ok(None);
    };
    if source.is_empty() {
        return Ok(None);
    }
    if let Some(value) = source.strip_prefix("constant:") {
        let v: f64 = value.trim().parse().map_err(|_| {
            RunError::BadPlan(format!("`{key}`: bad constant value `{value}`"))
        })?;
        return Ok(Some(Profile::constant(v)));
    }
    if profiles::ARCHETYPES.contains(&source.as_str()) {
        let (gains, window) = profiles::archetype_seeded(source, seed)?;
        return Ok(Some(match kind {
            ProfileKind::Gain => gains,
            ProfileKind::Window => window,
        }));
    }
    let path = base_dir.join(source);
    Ok(Some(profiles::load_profile_csv(&path, kind)?))
}

// Run execution -------------------------------------------------------------------

struct ActiveModel {
    sim: Simulator,
    gains: Option<Profile>,
    window: Option<Profile>,
}

fn build_model(
    params: &ParamMap,
    plan: &RunPlan,
    previous_sim: Option<&Simulator>,
    keep_loads: Option<(f64, f64)>,
) -> Result<ActiveModel, RunError> {
    let mut model = converter::resolve(params)?;
    if let Some((q_heat, q_cool)) = keep_loads {
        model.nominal_heating_power_w = q_heat;
        model.nominal_cooling_power_w = q_cool;
    }
    let mut sim = Simulator::new(&model, plan.settings.integrator_step_s)?;
    if let Some(old) = previous_sim {
        sim.carry_state_from(old);
    }
    let gains = profile_from_param(
        params,
        "gain_profile",
        ProfileKind::Gain,
        &plan.base_dir,
        plan.settings.seed,
    )?;
    let window = profile_from_param(
        params,
        "window_profile",
        ProfileKind::Window,
        &plan.base_dir,
        plan.settings.seed,
    )?;
    Ok(ActiveModel { sim, gains, window })
}

/// Executes one plan, writing `data.csv` and `meta.json` under
/// `<out_dir>/<run_id>/`.
pub fn run_one(
    plan: &RunPlan,
    weather: &WeatherSeries,
    out_dir: &Path,
) -> Result<RunOutcome, RunError> {
    run_one_with_controller(plan, weather, out_dir, None)
}

/// [`run_one`] with an optional external controller, invoked every control
/// interval with a zero-order hold in between. A controller fault aborts
/// this run only.
pub fn run_one_with_controller(
    plan: &RunPlan,
    weather: &WeatherSeries,
    out_dir: &Path,
    mut controller: Option<&mut dyn ExternalController>,
) -> Result<RunOutcome, RunError> {
    let start = std::time::Instant::now();
    let settings = &plan.settings;
    let dt = settings.integrator_step_s;
    let n_steps = (settings.horizon_s / dt).round() as u64;
    if n_steps == 0 {
        return Err(RunError::BadPlan("horizon shorter than one step".into()));
    }
    let steps_per_output = (settings.output_interval_s / dt).round() as u64;

    let mut params = plan.params.clone();
    let mut active = build_model(&params, plan, None, None)?;
    // The sidecar reports the resolved state at t=0; schedule_log captures
    // everything applied later.
    let initial_params = active.sim.model().resolved_params.clone();
    let mut schedule_log: Vec<ScheduleLogEntry> = Vec::new();
    let mut pending: &[OperationalChange] = &plan.schedules;

    let steps_per_control = |sim: &Simulator| -> u64 {
        (sim.model().controller.control_interval_s / dt).round().max(1.0) as u64
    };
    let mut control_every = steps_per_control(&active.sim);

    let mut writer = CsvWriter::new(&settings.columns);
    let mut actuation = Actuation::default();
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    let mut t_sum = 0.0;

    let site = weather.site().clone();
    let sample_at = |t: f64| weather.sample(t);
    let mut w_start = sample_at(0.0);

    for k in 0..n_steps {
        let t = k as f64 * dt;

        // Operational changes land on the step boundary nearest their
        // timestamp.
        while let Some(change) = pending.first() {
            if ((change.at_s / dt).round() as u64) != k {
                break;
            }
            for (name, value) in &change.changes {
                params.insert(name.clone(), value.clone());
            }
            let keep_loads = (!change.recalc_loads).then(|| {
                let m = active.sim.model();
                (m.nominal_heating_power_w, m.nominal_cooling_power_w)
            });
            active = build_model(&params, plan, Some(&active.sim), keep_loads)?;
            control_every = steps_per_control(&active.sim);
            let m = active.sim.model();
            schedule_log.push(ScheduleLogEntry {
                at_s: change.at_s,
                changes: change
                    .changes
                    .iter()
                    .map(|(k, v)| (k.clone(), v.to_json()))
                    .collect(),
                recalc_loads: change.recalc_loads,
                nominal_heating_power_w: m.nominal_heating_power_w,
                nominal_cooling_power_w: m.nominal_cooling_power_w,
            });
            pending = &pending[1..];
        }

        // Window profile drives the opening whenever configured.
        if let Some(wp) = &active.window {
            actuation.window_open = wp.sample(t);
        }

        if k % control_every == 0 {
            let t_air = active.sim.air_temperature_c();
            actuation = match controller.as_deref_mut() {
                Some(ext) => {
                    let obs = ControllerObservation {
                        time_s: t,
                        air_temperature_c: t_air,
                        outdoor_temperature_c: w_start.dry_bulb_c,
                        direct_normal_w_m2: w_start.direct_normal_w_m2,
                        diffuse_horizontal_w_m2: w_start.diffuse_horizontal_w_m2,
                        previous: actuation,
                    };
                    let mut act = ext.actuate(&obs).map_err(RunError::Controller)?.clamped();
                    if let Some(wp) = &active.window {
                        act.window_open = wp.sample(t);
                    }
                    act
                }
                None if active.sim.model().use_internal_controller => control::internal_controller(
                    &active.sim.model().controller,
                    t,
                    t_air,
                    actuation.window_open,
                ),
                None => Actuation {
                    window_open: actuation.window_open,
                    ..Default::default()
                },
            };
        }

        if k % steps_per_output == 0 {
            let row = make_row(&active, t, &w_start, &site, actuation);
            track(&mut t_min, &mut t_max, &mut t_sum, row.t_air_c);
            writer.push(&row);
        }

        let w_end = sample_at(t + dt);
        let gains_w = active.gains.as_ref().map_or(0.0, |p| p.sample(t));
        let albedo = active.sim.model().albedo;
        let inputs = StepInputs {
            weather_start: w_start,
            weather_end: w_end,
            irradiance_start: crate::weather::solar::incident_irradiance(
                t,
                w_start.direct_normal_w_m2,
                w_start.diffuse_horizontal_w_m2,
                &site,
                albedo,
            ),
            irradiance_end: crate::weather::solar::incident_irradiance(
                t + dt,
                w_end.direct_normal_w_m2,
                w_end.diffuse_horizontal_w_m2,
                &site,
                albedo,
            ),
            gains_w,
            actuation,
        };
        active.sim.step(&inputs)?;
        w_start = w_end;
    }

    if n_steps % steps_per_output == 0 {
        let t_end = n_steps as f64 * dt;
        let row = make_row(&active, t_end, &w_start, &site, actuation);
        track(&mut t_min, &mut t_max, &mut t_sum, row.t_air_c);
        writer.push(&row);
    }

    let run_dir = out_dir.join(&plan.run_id);
    std::fs::create_dir_all(&run_dir)?;
    let (csv_path, meta_path) = output::run_paths(out_dir, &plan.run_id);
    writer.write_to(&csv_path)?;

    let weather_name = plan.weather_file.as_ref().map(|p| p.to_string_lossy());
    let variation: Vec<(String, serde_json::Value)> = plan
        .overrides
        .iter()
        .map(|(k, v)| (k.clone(), v.to_json()))
        .collect();
    Sidecar {
        run_id: &plan.run_id,
        index: plan.index,
        seed: settings.seed,
        weather_file: weather_name.as_deref(),
        horizon_s: settings.horizon_s,
        output_interval_s: settings.output_interval_s,
        integrator_step_s: settings.integrator_step_s,
        columns: &settings.columns,
        variation: &variation,
        parameters: &initial_params,
        schedule_log: &schedule_log,
    }
    .write_to(&meta_path)?;

    let rows = writer.rows();
    Ok(RunOutcome {
        run_id: plan.run_id.clone(),
        csv_path,
        meta_path,
        rows,
        ledger: *active.sim.ledger(),
        energy_residual_j: active.sim.energy_balance_residual_j(),
        final_air_temperature_c: active.sim.air_temperature_c(),
        t_air_min_c: t_min,
        t_air_max_c: t_max,
        t_air_mean_c: t_sum / rows as f64,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

fn track(min: &mut f64, max: &mut f64, sum: &mut f64, v: f64) {
    *min = min.min(v);
    *max = max.max(v);
    *sum += v;
}

fn make_row(
    active: &ActiveModel,
    t: f64,
    w: &crate::weather::WeatherSample,
    site: &crate::weather::SiteInfo,
    actuation: Actuation,
) -> Row {
    let sim = &active.sim;
    let model = sim.model();
    let t_air = sim.air_temperature_c();
    let q_heat = actuation.u_heat * model.nominal_heating_power_w;
    let q_cool = actuation.u_cool * model.nominal_cooling_power_w;
    let setpoint = control::active_setpoint(&model.controller, t);
    let hp = heat_pump_power(&model.heat_pump, q_heat, w.dry_bulb_c, setpoint);
    let g_vent = sim.ventilation_conductance(actuation.window_open, t_air, w.dry_bulb_c);
    let irr = crate::weather::solar::incident_irradiance(
        t,
        w.direct_normal_w_m2,
        w.diffuse_horizontal_w_m2,
        site,
        model.albedo,
    );
    Row {
        time_s: t,
        t_air_c: t_air,
        t_out_c: w.dry_bulb_c,
        q_heat_w: q_heat,
        q_cool_w: q_cool,
        p_electric_w: hp.electrical_power_w,
        q_vent_w: g_vent * (t_air - w.dry_bulb_c),
        q_sol_trans_w: sim.transmitted_solar_w(&irr),
        actuation,
        t_supply_c: hp.supply_temperature_c,
        cop: hp.cop,
    }
}

// Batch ---------------------------------------------------------------------------

/// Expands and executes a whole document against a worker pool, writing all
/// run outputs plus `batch_report.json` under `out_dir`. Individual run
/// failures are captured in the report, never propagated.
pub fn run_batch(
    doc: &ConfigDocument,
    out_dir: &Path,
    workers: usize,
) -> Result<(BatchReport, Vec<RunOutcome>), OrchestratorError> {
    let batch_start = std::time::Instant::now();
    let plans = expand(doc)?;
    std::fs::create_dir_all(out_dir)?;

    // Parse each distinct weather file once, shared read-only.
    let mut weather_cache: HashMap<PathBuf, Result<Arc<WeatherSeries>, String>> = HashMap::new();
    for plan in &plans {
        if let Some(path) = &plan.weather_file {
            weather_cache
                .entry(path.clone())
                .or_insert_with(|| parse_epw_file(path).map(Arc::new).map_err(|e| e.to_string()));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| OrchestratorError::Pool(e.to_string()))?;

    let results: Vec<(String, Result<RunOutcome, String>)> = pool.install(|| {
        plans
            .par_iter()
            .map(|plan| {
                let outcome = match &plan.weather_file {
                    None => Err("no weather file configured".to_string()),
                    Some(path) => match weather_cache.get(path) {
                        Some(Ok(series)) => {
                            run_one(plan, series, out_dir).map_err(|e| e.to_string())
                        }
                        Some(Err(e)) => Err(e.clone()),
                        None => unreachable!("cache covers every plan"),
                    },
                };
                (plan.run_id.clone(), outcome)
            })
            .collect()
    });

    let mut report = BatchReport {
        total: results.len(),
        ..Default::default()
    };
    let mut outcomes = Vec::new();
    for (run_id, result) in results {
        match result {
            Ok(outcome) => {
                report.succeeded += 1;
                report.runs.push(RunSummary {
                    run_id,
                    rows: outcome.rows,
                    wall_seconds: outcome.wall_seconds,
                });
                outcomes.push(outcome);
            }
            Err(error) => report.failures.push(RunFailure { run_id, error }),
        }
    }
    report.total_wall_seconds = batch_start.elapsed().as_secs_f64();
    report.write_to(&out_dir.join("batch_report.json"))?;
    Ok((report, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigDocument;
    use crate::weather::{SiteInfo, WeatherRecord, WeatherSeries};

    fn doc(text: &str, base: &Path) -> ConfigDocument {
        ConfigDocument::from_str(text, base).unwrap()
    }

    fn constant_weather(t_c: f64) -> WeatherSeries {
        let site = SiteInfo {
            city: "Test".into(),
            latitude_deg: 48.1,
            longitude_deg: 11.7,
            timezone_hours: 1.0,
            elevation_m: 520.0,
        };
        let records = (0..24)
            .map(|i| WeatherRecord {
                timestamp_s: i as f64 * 3600.0,
                dry_bulb_c: t_c,
                direct_normal_w_m2: 0.0,
                diffuse_horizontal_w_m2: 0.0,
            })
            .collect();
        WeatherSeries::new(site, records)
    }

    fn synthetic_epw(path: &Path, t_c: f64) {
        let mut s = String::from(
            "LOCATION,Testville,ST,XX,SRC,000000,48.10,11.70,1.0,520.0\n\
             DESIGN CONDITIONS,0\n\
             TYPICAL/EXTREME PERIODS,0\n\
             GROUND TEMPERATURES,0\n\
             HOLIDAYS/DAYLIGHT SAVINGS,No,0,0,0\n\
             COMMENTS 1,synthetic\n\
             COMMENTS 2,\n\
             DATA PERIODS,1,1,Data,Sunday,1/1,12/31\n",
        );
        for i in 0..24 {
            let mut f = vec!["0".to_string(); 35];
            f[0] = "2020".into();
            f[1] = "1".into();
            f[2] = "1".into();
            f[3] = (i + 1).to_string();
            f[6] = format!("{t_c}");
            s.push_str(&f.join(","));
            s.push('\n');
        }
        std::fs::write(path, s).unwrap();
    }

    #[test]
    fn cartesian_expansion_is_first_axis_slowest() {
        let d = doc(
            r#"{"variations": {"parameters": {"UExt": [0.1, 0.2], "gWin": [0.5, 0.6, 0.7]}}}"#,
            Path::new("/cfg"),
        );
        let plans = expand(&d).unwrap();
        assert_eq!(plans.len(), 6);
        let pick = |i: usize| -> (f64, f64) {
            let get = |k: &str| match &plans[i].params[k] {
                ParamValue::Number(x) => *x,
                other => panic!("{other:?}"),
            };
            (get("UExt"), get("gWin"))
        };
        assert_eq!(pick(0), (0.1, 0.5));
        assert_eq!(pick(1), (0.1, 0.6));
        assert_eq!(pick(2), (0.1, 0.7));
        assert_eq!(pick(3), (0.2, 0.5));
        assert_eq!(pick(5), (0.2, 0.7));
    }

    #[test]
    fn five_axes_of_three_expand_to_243() {
        let d = doc(
            r#"{"variations": {"parameters": {
                "UExt": [0.1, 0.5, 1.0],
                "URoof": [0.1, 0.5, 1.0],
                "UWin": [0.8, 1.5, 3.0],
                "gWin": [0.3, 0.5, 0.7],
                "airChangeRate": [0.2, 0.4, 0.8]
            }}}"#,
            Path::new("/cfg"),
        );
        let plans = expand(&d).unwrap();
        assert_eq!(plans.len(), 243);
        assert!(plans[0].run_id.starts_with("0000_"));
        assert!(plans[242].run_id.starts_with("0242_"));
    }

    #[test]
    fn zip_broadcasts_singletons_and_rejects_mismatch() {
        let d = doc(
            r#"{"variations": {"mode": "zip", "parameters": {
                "UExt": [0.1, 0.2, 0.3],
                "gWin": 0.55
            }}}"#,
            Path::new("/cfg"),
        );
        let plans = expand(&d).unwrap();
        assert_eq!(plans.len(), 3);
        for p in &plans {
            assert_eq!(p.params["gWin"], ParamValue::Number(0.55));
        }

        let bad = doc(
            r#"{"variations": {"mode": "zip", "parameters": {
                "UExt": [0.1, 0.2, 0.3],
                "gWin": [0.5, 0.6]
            }}}"#,
            Path::new("/cfg"),
        );
        assert!(matches!(
            expand(&bad),
            Err(OrchestratorError::ZipLengthMismatch { expected: 3, got: 2, .. })
        ));
    }

    #[test]
    fn run_ids_are_stable_and_distinct() {
        let text = r#"{"variations": {"parameters": {"UExt": [0.1, 0.2]}}}"#;
        let a = expand(&doc(text, Path::new("/cfg"))).unwrap();
        let b = expand(&doc(text, Path::new("/cfg"))).unwrap();
        assert_eq!(a[0].run_id, b[0].run_id);
        assert_eq!(a[1].run_id, b[1].run_id);
        assert_ne!(a[0].run_id[5..], a[1].run_id[5..], "content hash differs");
        assert_eq!(a[0].run_id.len(), 4 + 1 + 8);
    }

    #[test]
    fn profile_source_grammar() {
        let mut params = crate::params::defaults();
        let base = Path::new("/nowhere");

        assert!(profile_from_param(&params, "gain_profile", ProfileKind::Gain, base, 0)
            .unwrap()
            .is_none());

        params.insert("gain_profile".into(), ParamValue::Text("constant:450".into()));
        let p = profile_from_param(&params, "gain_profile", ProfileKind::Gain, base, 0)
            .unwrap()
            .unwrap();
        assert_eq!(p.sample(12_345.0), 450.0);

        params.insert(
            "gain_profile".into(),
            ParamValue::Text("CHR01_Couple_both_at_Work".into()),
        );
        let p = profile_from_param(&params, "gain_profile", ProfileKind::Gain, base, 0)
            .unwrap()
            .unwrap();
        assert_eq!(p.values.len(), 365 * 288);

        params.insert("gain_profile".into(), ParamValue::Text("missing.csv".into()));
        assert!(profile_from_param(&params, "gain_profile", ProfileKind::Gain, base, 0).is_err());

        params.insert("gain_profile".into(), ParamValue::Text("constant:abc".into()));
        assert!(matches!(
            profile_from_param(&params, "gain_profile", ProfileKind::Gain, base, 0),
            Err(RunError::BadPlan(_))
        ));
    }

    #[test]
    fn archetype_profiles_follow_batch_seed() {
        let params: ParamMap = [(
            "window_profile".to_string(),
            ParamValue::Text("CHR07_Single_with_work".into()),
        )]
        .into();
        let base = Path::new("/");
        let a = profile_from_param(&params, "window_profile", ProfileKind::Window, base, 1)
            .unwrap()
            .unwrap();
        let b = profile_from_param(&params, "window_profile", ProfileKind::Window, base, 2)
            .unwrap()
            .unwrap();
        assert_ne!(a.values, b.values);
    }

    #[test]
    fn single_run_writes_csv_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let d = doc(
            r#"{"simulation": {"horizon_days": 1, "output_interval_s": 900, "integrator_step_s": 60}}"#,
            dir.path(),
        );
        let plans = expand(&d).unwrap();
        let weather = constant_weather(0.0);
        let outcome = run_one(&plans[0], &weather, dir.path()).unwrap();

        // 96 output intervals per day plus the closing row.
        assert_eq!(outcome.rows, 97);
        let csv = std::fs::read_to_string(&outcome.csv_path).unwrap();
        assert_eq!(csv.lines().count(), 98);
        assert!(csv.starts_with("time,t_air,"));
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&outcome.meta_path).unwrap()).unwrap();
        assert_eq!(meta["run_id"], serde_json::json!(plans[0].run_id));
        assert_eq!(meta["simulation"]["horizon_s"], serde_json::json!(86400.0));
        assert!(outcome.t_air_min_c <= outcome.t_air_mean_c);
        assert!(outcome.t_air_mean_c <= outcome.t_air_max_c);
        // Heated throughout a 0 C day, the zone holds a plausible band.
        assert!(outcome.final_air_temperature_c > 5.0);
        assert!(outcome.final_air_temperature_c < 30.0);
    }

    #[test]
    fn schedule_change_rebuilds_model_and_is_logged() {
        let dir = tempfile::tempdir().unwrap();
        let d = doc(
            r#"{
                "simulation": {"horizon_days": 2, "output_interval_s": 3600, "integrator_step_s": 300},
                "schedules": [{"at_s": 86400, "changes": {"UExt": 0.15}}]
            }"#,
            dir.path(),
        );
        let plans = expand(&d).unwrap();
        let weather = constant_weather(-5.0);
        let outcome = run_one(&plans[0], &weather, dir.path()).unwrap();
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&outcome.meta_path).unwrap()).unwrap();
        let log = meta["schedule_log"].as_array().unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(log[0]["at_s"], serde_json::json!(86400.0));
        assert_eq!(log[0]["recalc_loads"], serde_json::json!(false));
        // Without recalc the original nominal power is preserved.
        let logged = log[0]["nominal_heating_power_w"].as_f64().unwrap();
        let original = meta["parameters"]["nominalHeatingPower"].as_f64().unwrap();
        assert_eq!(logged, original);
    }

    #[test]
    fn recalc_loads_shrinks_heating_capacity_after_insulation() {
        let dir = tempfile::tempdir().unwrap();
        let d = doc(
            r#"{
                "simulation": {"horizon_days": 1, "output_interval_s": 3600, "integrator_step_s": 300},
                "schedules": [{"at_s": 43200, "changes": {"UExt": 0.1}, "recalc_loads": true}]
            }"#,
            dir.path(),
        );
        let plans = expand(&d).unwrap();
        let outcome = run_one(&plans[0], &constant_weather(0.0), dir.path()).unwrap();
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&outcome.meta_path).unwrap()).unwrap();
        let logged = meta["schedule_log"][0]["nominal_heating_power_w"]
            .as_f64()
            .unwrap();
        let original = meta["parameters"]["nominalHeatingPower"].as_f64().unwrap();
        assert!(logged < original, "{logged} !< {original}");
    }

    #[test]
    fn batch_runs_and_reports() {
        let dir = tempfile::tempdir().unwrap();
        let epw = dir.path().join("flat.epw");
        synthetic_epw(&epw, 5.0);
        let d = doc(
            r#"{
                "weather": {"file": "flat.epw"},
                "variations": {"parameters": {"UExt": [0.3, 0.6]}},
                "simulation": {"horizon_days": 1, "output_interval_s": 900, "integrator_step_s": 60}
            }"#,
            dir.path(),
        );
        let out = dir.path().join("out");
        let (report, outcomes) = run_batch(&d, &out, 2).unwrap();
        assert_eq!(report.total, 2);
        assert_eq!(report.succeeded, 2);
        assert!(report.failures.is_empty());
        assert_eq!(outcomes.len(), 2);
        assert!(out.join("batch_report.json").exists());
        for oc in &outcomes {
            assert!(oc.csv_path.exists());
            assert!(oc.meta_path.exists());
        }
        // Better insulation heats less.
        assert!(outcomes[0].ledger.heating_j < outcomes[1].ledger.heating_j);
    }

    #[test]
    fn batch_output_independent_of_worker_count() {
        let dir = tempfile::tempdir().unwrap();
        let epw = dir.path().join("flat.epw");
        synthetic_epw(&epw, 2.0);
        let text = r#"{
            "weather": {"file": "flat.epw"},
            "variations": {"parameters": {"UExt": [0.3, 0.6], "gWin": [0.4, 0.7]}},
            "simulation": {"horizon_days": 1, "output_interval_s": 900, "integrator_step_s": 300}
        }"#;
        let d = doc(text, dir.path());
        let out1 = dir.path().join("w1");
        let out4 = dir.path().join("w4");
        run_batch(&d, &out1, 1).unwrap();
        run_batch(&d, &out4, 4).unwrap();
        for plan in expand(&d).unwrap() {
            let (csv1, meta1) = output::run_paths(&out1, &plan.run_id);
            let (csv4, meta4) = output::run_paths(&out4, &plan.run_id);
            assert_eq!(
                std::fs::read(&csv1).unwrap(),
                std::fs::read(&csv4).unwrap(),
                "{}",
                plan.run_id
            );
            assert_eq!(std::fs::read(&meta1).unwrap(), std::fs::read(&meta4).unwrap());
        }
    }

    #[test]
    fn missing_weather_fails_run_not_batch() {
        let dir = tempfile::tempdir().unwrap();
        let d = doc(
            r#"{"simulation": {"horizon_days": 1}}"#,
            dir.path(),
        );
        let out = dir.path().join("out");
        let (report, outcomes) = run_batch(&d, &out, 1).unwrap();
        assert_eq!(report.total, 1);
        assert_eq!(report.succeeded, 0);
        assert_eq!(report.failures.len(), 1);
        assert!(outcomes.is_empty());
        assert!(out.join("batch_report.json").exists());
    }

    #[test]
    fn external_controller_drives_run() {
        use crate::model::control::TwoPointController;
        let dir = tempfile::tempdir().unwrap();
        let d = doc(
            r#"{"building": {"UseInternalController": false},
                "simulation": {"horizon_days": 1, "output_interval_s": 900, "integrator_step_s": 300}}"#,
            dir.path(),
        );
        let plans = expand(&d).unwrap();
        let mut ctrl = TwoPointController::new(21.0, 0.5);
        let outcome = run_one_with_controller(
            &plans[0],
            &constant_weather(-5.0),
            dir.path(),
            Some(&mut ctrl),
        )
        .unwrap();
        assert!(outcome.ledger.heating_j > 0.0);
        assert!(outcome.t_air_max_c < 25.0);
    }

    #[test]
    fn controller_fault_aborts_run() {
        struct Faulty;
        impl ExternalController for Faulty {
            fn actuate(
                &mut self,
                obs: &ControllerObservation,
            ) -> Result<Actuation, ControllerFault> {
                Err(ControllerFault {
                    time_s: obs.time_s,
                    reason: "refused".into(),
                })
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let d = doc(r#"{"simulation": {"horizon_days": 1}}"#, dir.path());
        let plans = expand(&d).unwrap();
        let err = run_one_with_controller(
            &plans[0],
            &constant_weather(0.0),
            dir.path(),
            Some(&mut Faulty),
        )
        .unwrap_err();
        assert!(matches!(err, RunError::Controller(_)));
    }
}
