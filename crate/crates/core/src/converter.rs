//! Configuration-to-model pipeline.
//!
//! [`resolve`] turns a flat parameter map into a [`ResolvedModel`] by running
//! nine stages in a fixed order:
//!
//! 1. link resolution (`@link:<name>` values, cycle detection),
//! 2. name normalization (alias folding),
//! 3. compatibility clamps (keeps later stages free of division hazards),
//! 4. zone dimensions (areas, volume),
//! 5. component configuration (per-orientation walls, roof, floor, internal
//!    wall, predefined construction profiles, furniture),
//! 6. RC distribution selection (named profiles or explicit fractions),
//! 7. component properties (chain resistances and capacities),
//! 8. nominal heating power,
//! 9. nominal cooling power.
//!
//! The pipeline is pure and deterministic: identical inputs produce
//! bit-identical models.

use crate::model::*;
use crate::params::{canonical_name, ParamError, ParamMap, ParamValue, ALIASES};
use serde_json::Value;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConvertError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("unresolvable link on `{name}`: {reason}")]
    UnresolvableLink { name: String, reason: String },
    #[error("unknown profile `{value}` for `{name}`")]
    UnknownProfileName { name: String, value: String },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("bad distribution for `{name}`: {reason}")]
    BadDistribution { name: String, reason: String },
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
}

/// Stage names, in execution order.
pub const STAGE_NAMES: [&str; 9] = [
    "Link_Resolver",
    "Miscellaneous_Handler",
    "Model_Compatibility_Layer",
    "Zone_Dimensions_Calculator",
    "Component_Configurator",
    "RC_Distribution_Configurator",
    "Component_Properties_Calculator",
    "Nominal_Heating_Power_Calculator",
    "Nominal_Cooling_Power_Calculator",
];

/// Predefined wall construction profile.
#[derive(Debug, Clone, Copy)]
pub struct WallProfile {
    pub name: &'static str,
    pub u_value_w_m2k: f64,
    pub heat_capacity_j_m2k: f64,
    pub description: &'static str,
}

/// Selectable via the `#..._construction` parameters.
pub const WALL_PROFILES: &[WallProfile] = &[
    WallProfile {
        name: "High-hole brick (1980s)",
        u_value_w_m2k: 0.83,
        heat_capacity_j_m2k: 250e3,
        description: "poor insulation, high inertia",
    },
    WallProfile {
        name: "Solid brick",
        u_value_w_m2k: 1.61,
        heat_capacity_j_m2k: 376e3,
        description: "very poor insulation, very high inertia",
    },
    WallProfile {
        name: "Concrete + ETICS",
        u_value_w_m2k: 0.21,
        heat_capacity_j_m2k: 470e3,
        description: "good insulation, high inertia",
    },
    WallProfile {
        name: "Timber construction",
        u_value_w_m2k: 0.15,
        heat_capacity_j_m2k: 75e3,
        description: "very good insulation, low inertia",
    },
    WallProfile {
        name: "High-hole brick (today)",
        u_value_w_m2k: 0.23,
        heat_capacity_j_m2k: 265e3,
        description: "good insulation, high inertia",
    },
    WallProfile {
        name: "Drywall",
        u_value_w_m2k: 0.56,
        heat_capacity_j_m2k: 17.6e3,
        description: "internal wall, insulated, low heat capacity",
    },
];

pub fn wall_profile(name: &str) -> Option<&'static WallProfile> {
    WALL_PROFILES.iter().find(|p| p.name == name)
}

/// Named RC distribution profiles accepted by the `*_distribution`
/// parameters (alternatively an explicit fraction list).
pub const DISTRIBUTION_PROFILES: &[&str] = &["uniform", "mass-inside", "mass-outside"];

fn named_r_distribution(name: &str) -> Option<[f64; 4]> {
    match name {
        "uniform" => Some([0.25; 4]),
        // Resistance concentrated toward the exterior: insulation outside,
        // mass at the room side.
        "mass-inside" => Some([0.4, 0.3, 0.2, 0.1]),
        "mass-outside" => Some([0.1, 0.2, 0.3, 0.4]),
        _ => None,
    }
}

fn named_c_distribution(name: &str) -> Option<[f64; 3]> {
    match name {
        "uniform" => Some([1.0 / 3.0; 3]),
        "mass-inside" => Some([0.2, 0.3, 0.5]),
        "mass-outside" => Some([0.5, 0.3, 0.2]),
        _ => None,
    }
}

// Typed extraction -----------------------------------------------------------

fn num(map: &ParamMap, name: &str) -> Result<f64, ConvertError> {
    match map.get(name) {
        Some(ParamValue::Number(x)) if x.is_finite() => Ok(*x),
        Some(ParamValue::Number(_)) => Err(ConvertError::InvalidParameter {
            name: name.into(),
            reason: "must be finite".into(),
        }),
        Some(_) => Err(ParamError::WrongType {
            name: name.into(),
            expected: "a number",
        }
        .into()),
        None => Err(ParamError::UnknownParameter(name.into()).into()),
    }
}

fn flag(map: &ParamMap, name: &str) -> Result<bool, ConvertError> {
    match map.get(name) {
        Some(ParamValue::Bool(b)) => Ok(*b),
        Some(_) => Err(ParamError::WrongType {
            name: name.into(),
            expected: "a boolean",
        }
        .into()),
        None => Err(ParamError::UnknownParameter(name.into()).into()),
    }
}

fn text<'m>(map: &'m ParamMap, name: &str) -> Result<&'m str, ConvertError> {
    match map.get(name) {
        Some(ParamValue::Text(s)) => Ok(s),
        Some(_) => Err(ParamError::WrongType {
            name: name.into(),
            expected: "a string",
        }
        .into()),
        None => Err(ParamError::UnknownParameter(name.into()).into()),
    }
}

// Stage 1: link resolution ----------------------------------------------------

fn resolve_links(map: &mut ParamMap) -> Result<(), ConvertError> {
    let keys: Vec<String> = map.keys().cloned().collect();
    for key in keys {
        let mut chain = vec![key.clone()];
        let mut cursor = key.clone();
        loop {
            let Some(target) = map.get(&cursor).and_then(|v| v.as_link().map(str::to_string))
            else {
                break;
            };
            let target = canonical_name(&target).to_string();
            if chain.contains(&target) {
                return Err(ConvertError::UnresolvableLink {
                    name: key,
                    reason: format!("link cycle through `{target}`"),
                });
            }
            if !map.contains_key(&target) {
                return Err(ConvertError::UnresolvableLink {
                    name: key,
                    reason: format!("target `{target}` does not exist"),
                });
            }
            chain.push(target.clone());
            cursor = target;
        }
        if cursor != key {
            let value = map[&cursor].clone();
            map.insert(key, value);
        }
    }
    Ok(())
}

// Stage 2: name normalization -------------------------------------------------

fn fold_aliases(map: &mut ParamMap) {
    for (alias, canonical) in ALIASES {
        if let Some(v) = map.remove(*alias) {
            map.insert((*canonical).to_string(), v);
        }
    }
}

// Stage 3: compatibility clamps ------------------------------------------------

fn clamp_number(map: &mut ParamMap, name: &str, lo: f64, hi: f64) {
    if let Some(ParamValue::Number(x)) = map.get_mut(name) {
        *x = x.clamp(lo, hi);
    }
}

/// Keeps downstream stages free of division-by-zero and out-of-range hazards
/// without rejecting the config. Geometry violations are real errors and are
/// handled in the dimension stage instead.
fn compatibility_layer(map: &mut ParamMap) {
    clamp_number(map, "fATransToAWindow", 0.0, 1.0);
    clamp_number(map, "gWin", 0.0, 1.0);
    clamp_number(map, "heatRecoveryRate", 0.0, 1.0);
    clamp_number(map, "internalGainsConvectiveFraction", 0.0, 1.0);
    clamp_number(map, "heatingConvectiveFraction", 0.0, 1.0);
    clamp_number(map, "airChangeRate", 0.0, f64::INFINITY);
    clamp_number(map, "windowOpeningArea", 0.0, f64::INFINITY);
    clamp_number(map, "windowOpeningHeight", 0.0, f64::INFINITY);
    clamp_number(map, "proportionalBand", 1e-6, f64::INFINITY);
    clamp_number(map, "controlInterval", 1.0, f64::INFINITY);
    clamp_number(map, "carnotQuality", 0.0, 1.0);
    clamp_number(map, "relative_heatPump_efficiency", 1e-6, f64::INFINITY);
    if let (Ok(lo), Ok(hi)) = (num(map, "copMin"), num(map, "copMax")) {
        if lo > hi {
            map.insert("copMax".into(), ParamValue::Number(lo));
        }
    }
}

// Stage 4: zone dimensions ------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct ZoneDimensions {
    floor_m2: f64,
    /// Window areas by orientation: south, west, north, east.
    windows_m2: [f64; 4],
    /// Opaque wall areas by orientation, window areas already removed.
    walls_m2: [f64; 4],
    walls_total_m2: f64,
    roof_m2: f64,
    internal_m2: f64,
    volume_m3: f64,
}

fn zone_dimensions(map: &ParamMap) -> Result<ZoneDimensions, ConvertError> {
    let length = num(map, "zone_length")?;
    let width = num(map, "zone_width")?;
    let n_floors = num(map, "n_floors")?;
    let height = num(map, "floor_height")?;
    for (name, v) in [
        ("zone_length", length),
        ("zone_width", width),
        ("n_floors", n_floors),
        ("floor_height", height),
    ] {
        if !(v > 0.0) {
            return Err(ConvertError::InvalidGeometry(format!(
                "`{name}` must be positive, got {v}"
            )));
        }
    }

    let facade_lengths = [length, width, length, width]; // south, west, north, east
    let mut windows = [0.0; 4];
    let mut walls = [0.0; 4];
    for (i, o) in ["south", "west", "north", "east"].iter().enumerate() {
        let name = format!("fAWin_{o}");
        let f = num(map, &name)?;
        if !(0.0..=1.0).contains(&f) {
            return Err(ConvertError::InvalidGeometry(format!(
                "`{name}` must lie in [0, 1], got {f}"
            )));
        }
        let facade = height * n_floors * facade_lengths[i];
        windows[i] = facade * f;
        walls[i] = facade - windows[i];
    }

    let gross = 2.0 * n_floors * height * (length + width);
    let win_total: f64 = windows.iter().sum();
    if win_total >= gross {
        return Err(ConvertError::InvalidGeometry(format!(
            "window area {win_total:.3} m2 covers the gross wall area {gross:.3} m2"
        )));
    }
    let walls_total = gross - win_total;

    let f_roof = num(map, "fARoofToAFloor")?;
    let f_int = num(map, "fAInt")?;
    for (name, v) in [("fARoofToAFloor", f_roof), ("fAInt", f_int)] {
        if v < 0.0 {
            return Err(ConvertError::InvalidGeometry(format!(
                "`{name}` must be non-negative, got {v}"
            )));
        }
    }

    Ok(ZoneDimensions {
        floor_m2: length * width,
        windows_m2: windows,
        walls_m2: walls,
        walls_total_m2: walls_total,
        roof_m2: length * width * f_roof,
        internal_m2: walls_total * f_int,
        volume_m3: length * width * height * n_floors,
    })
}

// Stage 5: component configuration ---------------------------------------------

/// A component before its RC chain is derived: area plus the envelope
/// parameters it draws from.
#[derive(Debug, Clone)]
struct ComponentDraft {
    name: String,
    orientation: Orientation,
    area_m2: f64,
    u_value_w_m2k: f64,
    capacity_j_m2k: f64,
    /// Parameter-name stem for its R/C distribution entries.
    dist_stem: &'static str,
}

/// Applies a `#..._construction` profile, writing the effective values back
/// into the map so the resolved metadata reflects them.
fn apply_construction_profile(
    map: &mut ParamMap,
    selector: &str,
    u_name: &str,
    cap_name: &str,
) -> Result<(), ConvertError> {
    let choice = text(map, selector)?.to_string();
    if choice.is_empty() {
        return Ok(());
    }
    let profile = wall_profile(&choice).ok_or_else(|| ConvertError::UnknownProfileName {
        name: selector.to_string(),
        value: choice.clone(),
    })?;
    map.insert(u_name.into(), ParamValue::Number(profile.u_value_w_m2k));
    map.insert(
        cap_name.into(),
        ParamValue::Number(profile.heat_capacity_j_m2k),
    );
    Ok(())
}

fn configure_components(
    map: &mut ParamMap,
    dims: &ZoneDimensions,
) -> Result<(Vec<ComponentDraft>, f64), ConvertError> {
    apply_construction_profile(map, "#extWall_construction", "UExt", "heatCapacity_wall")?;
    apply_construction_profile(
        map,
        "#intWall_construction",
        "UIntWall",
        "heatCapacity_intWall",
    )?;
    apply_construction_profile(map, "#floor_construction", "UFloor", "heatCapacity_floor")?;
    apply_construction_profile(map, "#roof_construction", "URoof", "heatCapacity_roof")?;

    let u_ext = num(map, "UExt")?;
    let u_int = num(map, "UIntWall")?;
    let u_floor = num(map, "UFloor")?;
    let u_roof = num(map, "URoof")?;
    let cap_ext = num(map, "heatCapacity_wall")?;
    let cap_int = num(map, "heatCapacity_intWall")?;
    let cap_floor = num(map, "heatCapacity_floor")?;
    let cap_roof = num(map, "heatCapacity_roof")?;

    let furniture_j = num(map, "heatCapacity_furniture_per_m2")?.max(0.0) * dims.floor_m2;
    let mut cap_int_effective = cap_int;
    let mut air_capacity_j_k = 0.0;
    if dims.internal_m2 > 0.0 {
        cap_int_effective += furniture_j / dims.internal_m2;
    } else {
        // No internal walls to attach the furniture to; lump it on the air.
        air_capacity_j_k = furniture_j;
    }

    let orientations = [
        Orientation::South,
        Orientation::West,
        Orientation::North,
        Orientation::East,
    ];
    let mut drafts = Vec::with_capacity(7);
    for (i, o) in orientations.into_iter().enumerate() {
        drafts.push(ComponentDraft {
            name: format!("ext_wall_{}", o.label()),
            orientation: o,
            area_m2: dims.walls_m2[i],
            u_value_w_m2k: u_ext,
            capacity_j_m2k: cap_ext,
            dist_stem: "extWall",
        });
    }
    drafts.push(ComponentDraft {
        name: "roof".into(),
        orientation: Orientation::Horizontal,
        area_m2: dims.roof_m2,
        u_value_w_m2k: u_roof,
        capacity_j_m2k: cap_roof,
        dist_stem: "roof",
    });
    drafts.push(ComponentDraft {
        name: "floor".into(),
        orientation: Orientation::Ground,
        area_m2: dims.floor_m2,
        u_value_w_m2k: u_floor,
        capacity_j_m2k: cap_floor,
        dist_stem: "floor",
    });
    drafts.push(ComponentDraft {
        name: "int_wall".into(),
        orientation: Orientation::Internal,
        area_m2: dims.internal_m2,
        u_value_w_m2k: u_int,
        capacity_j_m2k: cap_int_effective,
        dist_stem: "intWall",
    });

    // Zero-area components contribute nothing; keep the network clean.
    drafts.retain(|d| d.area_m2 > 0.0);

    for d in &drafts {
        if !(d.u_value_w_m2k > 0.0) {
            return Err(ConvertError::InvalidParameter {
                name: format!("U ({})", d.name),
                reason: format!("must be positive, got {}", d.u_value_w_m2k),
            });
        }
        if !(d.capacity_j_m2k > 0.0) {
            return Err(ConvertError::InvalidParameter {
                name: format!("heatCapacity ({})", d.name),
                reason: format!("must be positive, got {}", d.capacity_j_m2k),
            });
        }
    }
    Ok((drafts, air_capacity_j_k))
}

// Stage 6: RC distributions ------------------------------------------------------

fn check_fractions(name: &str, values: &[f64]) -> Result<(), ConvertError> {
    if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(ConvertError::BadDistribution {
            name: name.into(),
            reason: "every fraction must be positive".into(),
        });
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(ConvertError::BadDistribution {
            name: name.into(),
            reason: format!("fractions sum to {sum}, expected 1"),
        });
    }
    Ok(())
}

fn r_distribution(map: &ParamMap, stem: &str) -> Result<[f64; 4], ConvertError> {
    let name = format!("{stem}_R_distribution");
    match map.get(&name) {
        Some(ParamValue::Text(s)) => {
            named_r_distribution(s).ok_or_else(|| ConvertError::UnknownProfileName {
                name: name.clone(),
                value: s.clone(),
            })
        }
        Some(ParamValue::List(xs)) => {
            let arr: [f64; 4] = xs.as_slice().try_into().map_err(|_| {
                ConvertError::BadDistribution {
                    name: name.clone(),
                    reason: format!("expected 4 fractions, got {}", xs.len()),
                }
            })?;
            check_fractions(&name, &arr)?;
            Ok(arr)
        }
        Some(_) => Err(ParamError::WrongType {
            name,
            expected: "a profile name or fraction list",
        }
        .into()),
        None => Err(ParamError::UnknownParameter(name).into()),
    }
}

fn c_distribution(map: &ParamMap, stem: &str) -> Result<[f64; 3], ConvertError> {
    let name = format!("{stem}_C_distribution");
    match map.get(&name) {
        Some(ParamValue::Text(s)) => {
            named_c_distribution(s).ok_or_else(|| ConvertError::UnknownProfileName {
                name: name.clone(),
                value: s.clone(),
            })
        }
        Some(ParamValue::List(xs)) => {
            let arr: [f64; 3] = xs.as_slice().try_into().map_err(|_| {
                ConvertError::BadDistribution {
                    name: name.clone(),
                    reason: format!("expected 3 fractions, got {}", xs.len()),
                }
            })?;
            check_fractions(&name, &arr)?;
            Ok(arr)
        }
        Some(_) => Err(ParamError::WrongType {
            name,
            expected: "a profile name or fraction list",
        }
        .into()),
        None => Err(ParamError::UnknownParameter(name).into()),
    }
}

// Stage 7: component properties ---------------------------------------------------

/// Derives the RC chain of one component. The configured U-value includes
/// the standard surface films (interior 0.13, exterior 0.04 m2K/W); the
/// remainder is the construction resistance spread over the chain. A floor
/// of 1e-4 m2K/W keeps extreme U-values from producing a degenerate chain.
fn component_properties(
    draft: &ComponentDraft,
    r_dist: [f64; 4],
    c_dist: [f64; 3],
    solar_absorptance: f64,
) -> RCComponent {
    let r_constr = (1.0 / draft.u_value_w_m2k - R_SI - R_SE).max(R_CONSTR_MIN);
    let mut resistances = [0.0; 4];
    for (r, f) in resistances.iter_mut().zip(r_dist) {
        *r = f * r_constr / draft.area_m2;
    }
    let mut capacities = [0.0; 3];
    for (c, f) in capacities.iter_mut().zip(c_dist) {
        *c = f * draft.capacity_j_m2k * draft.area_m2;
    }
    RCComponent {
        name: draft.name.clone(),
        orientation: draft.orientation,
        area_m2: draft.area_m2,
        resistances_k_w: resistances,
        capacities_j_k: capacities,
        solar_absorptance,
    }
}

// Stages 8 and 9: nominal powers ---------------------------------------------------

/// Steady-state loss conductance of the envelope, W/K: opaque loss surfaces
/// plus windows plus ventilation. Internal walls separate conditioned space
/// from itself and do not count.
fn loss_conductance_w_k(
    drafts: &[ComponentDraft],
    window_area_m2: f64,
    u_window: f64,
    volume_m3: f64,
    ach: f64,
    heat_recovery: f64,
) -> f64 {
    let opaque: f64 = drafts
        .iter()
        .filter(|d| d.orientation != Orientation::Internal)
        .map(|d| d.u_value_w_m2k * d.area_m2)
        .sum();
    let vent = RHO_AIR * CP_AIR * volume_m3 * ach / 3600.0 * (1.0 - heat_recovery);
    opaque + u_window * window_area_m2 + vent
}

fn nominal_heating_power(loss_w_k: f64, delta_t_k: f64, safety: f64) -> f64 {
    safety * loss_w_k * delta_t_k
}

fn nominal_cooling_power(
    loss_w_k: f64,
    delta_t_k: f64,
    solar_margin_w: f64,
    safety: f64,
) -> f64 {
    safety * (loss_w_k * delta_t_k + solar_margin_w)
}

// Pipeline -------------------------------------------------------------------------

/// Runs all nine stages on a parameter map (defaults plus overrides, see
/// [`crate::params`]) and returns the ready-to-simulate model.
pub fn resolve(params: &ParamMap) -> Result<ResolvedModel, ConvertError> {
    let mut map = params.clone();

    resolve_links(&mut map)?;
    fold_aliases(&mut map);
    compatibility_layer(&mut map);
    let dims = zone_dimensions(&map)?;
    let (drafts, air_capacity_j_k) = configure_components(&mut map, &dims)?;

    let solar_absorptance = num(&map, "solarAbsorptance")?.clamp(0.0, 1.0);
    let mut components = Vec::with_capacity(drafts.len());
    for d in &drafts {
        let r = r_distribution(&map, d.dist_stem)?;
        let c = c_distribution(&map, d.dist_stem)?;
        components.push(component_properties(d, r, c, solar_absorptance));
    }

    let u_window = num(&map, "UWin")?;
    if u_window < 0.0 {
        return Err(ConvertError::InvalidParameter {
            name: "UWin".into(),
            reason: format!("must be non-negative, got {u_window}"),
        });
    }
    let window_area: f64 = dims.windows_m2.iter().sum();
    let ach = num(&map, "airChangeRate")?;
    let heat_recovery = num(&map, "heatRecoveryRate")?;
    let loss_w_k = loss_conductance_w_k(
        &drafts,
        window_area,
        u_window,
        dims.volume_m3,
        ach,
        heat_recovery,
    );

    let day_setpoint = num(&map, "roomTempUpperSetpoint")?;
    let night_setpoint = num(&map, "roomTempLowerSetpoint")?;
    let design_out = num(&map, "designOutdoorTemperature")?;
    if day_setpoint <= design_out {
        return Err(ConvertError::InvalidParameter {
            name: "designOutdoorTemperature".into(),
            reason: format!(
                "must lie below the day setpoint {day_setpoint}, got {design_out}"
            ),
        });
    }
    let q_heat = nominal_heating_power(
        loss_w_k,
        day_setpoint - design_out,
        num(&map, "heatingSafetyFactor")?,
    );

    let cooling_setpoint = num(&map, "coolingSetpoint")?;
    let design_cool = num(&map, "designCoolingOutdoorTemperature")?;
    if design_cool <= cooling_setpoint {
        return Err(ConvertError::InvalidParameter {
            name: "designCoolingOutdoorTemperature".into(),
            reason: format!(
                "must lie above the cooling setpoint {cooling_setpoint}, got {design_cool}"
            ),
        });
    }
    let g_value = num(&map, "gWin")?;
    let transparent = num(&map, "fATransToAWindow")?;
    // Peak-irradiance margin for the solar load on the glazing.
    let solar_margin = g_value * transparent * window_area * 500.0;
    let q_cool = nominal_cooling_power(
        loss_w_k,
        design_cool - cooling_setpoint,
        solar_margin,
        num(&map, "coolingSafetyFactor")?,
    );

    let model = ResolvedModel {
        components,
        windows: WindowGroup {
            areas_m2: dims.windows_m2,
            u_value_w_m2k: u_window,
            g_value,
            transparent_fraction: transparent,
            opening_height_m: num(&map, "windowOpeningHeight")?,
            opening_area_m2: num(&map, "windowOpeningArea")?,
        },
        ventilation: VentilationSpec {
            air_change_rate: ach,
            heat_recovery_rate: heat_recovery,
        },
        heat_pump: HeatPumpSpec {
            carnot_quality: num(&map, "carnotQuality")?,
            relative_efficiency: num(&map, "relative_heatPump_efficiency")?,
            heating_curve_steepness: num(&map, "heatingCurve_steepness")?,
            max_supply_temperature_c: num(&map, "maxSupplyTemperature")?,
            cop_min: num(&map, "copMin")?,
            cop_max: num(&map, "copMax")?,
        },
        controller: ControllerSpec {
            day_setpoint_c: day_setpoint,
            night_setpoint_c: night_setpoint,
            day_window_hours: (num(&map, "dayWindowStartHour")?, num(&map, "dayWindowEndHour")?),
            proportional_band_k: num(&map, "proportionalBand")?,
            control_interval_s: num(&map, "controlInterval")?,
            cooling_setpoint_c: flag(&map, "UseCoolingController")?.then_some(cooling_setpoint),
        },
        splits: SplitFractions {
            heating_convective: num(&map, "heatingConvectiveFraction")?,
            gains_convective: num(&map, "internalGainsConvectiveFraction")?,
        },
        use_internal_controller: flag(&map, "UseInternalController")?,
        volume_m3: dims.volume_m3,
        floor_area_m2: dims.floor_m2,
        additional_air_capacity_j_k: air_capacity_j_k,
        nominal_heating_power_w: q_heat,
        nominal_cooling_power_w: q_cool,
        ground_temperature_c: num(&map, "groundTemperature")?,
        albedo: num(&map, "albedo")?.clamp(0.0, 1.0),
        initial_temperature_c: num(&map, "initialTemperature")?,
        resolved_params: resolved_metadata(&map, &dims, q_heat, q_cool),
    };
    Ok(model)
}

/// Flat metadata map: every canonical parameter after resolution plus the
/// derived quantities, ready for the run sidecar.
fn resolved_metadata(
    map: &ParamMap,
    dims: &ZoneDimensions,
    q_heat: f64,
    q_cool: f64,
) -> BTreeMap<String, Value> {
    let mut out: BTreeMap<String, Value> =
        map.iter().map(|(k, v)| (k.clone(), v.to_json())).collect();
    let mut put = |k: &str, v: f64| out.insert(k.to_string(), serde_json::json!(v));
    put("A_floor", dims.floor_m2);
    put("A_roof", dims.roof_m2);
    put("A_intWall", dims.internal_m2);
    put("A_walls", dims.walls_total_m2);
    put("A_win_south", dims.windows_m2[0]);
    put("A_win_west", dims.windows_m2[1]);
    put("A_win_north", dims.windows_m2[2]);
    put("A_win_east", dims.windows_m2[3]);
    put("zoneVolume", dims.volume_m3);
    put("nominalHeatingPower", q_heat);
    put("nominalCoolingPower", q_cool);
    out
}
