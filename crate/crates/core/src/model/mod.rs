//! Thermal model domain types and the simulation engine.
//!
//! A zone is a set of opaque RC components (each discretized into a chain of
//! four resistances and three capacity nodes), a massless window group, an
//! air node and a massless radiant star node that couples all interior
//! surfaces radiatively.

pub mod airflow;
pub mod control;
pub mod heat_pump;
pub mod integrator;
pub mod network;

use std::collections::BTreeMap;

/// Exterior film coefficient, W/m2K.
pub const H_EXTERIOR: f64 = 25.0;
/// Interior convective film coefficient, W/m2K.
pub const H_INT_CONVECTIVE: f64 = 2.5;
/// Interior radiative coupling to the star node, W/m2K.
pub const H_INT_RADIATIVE: f64 = 5.2;
/// Interior film resistance folded into U-values, m2K/W.
pub const R_SI: f64 = 0.13;
/// Exterior film resistance folded into U-values, m2K/W.
pub const R_SE: f64 = 0.04;
/// Lower clamp for the areal construction resistance, m2K/W.
pub const R_CONSTR_MIN: f64 = 1e-4;
/// Air density, kg/m3.
pub const RHO_AIR: f64 = 1.2;
/// Specific heat capacity of air, J/kgK.
pub const CP_AIR: f64 = 1005.0;

/// Resistances and capacity nodes per opaque component chain.
pub const CHAIN_RESISTANCES: usize = 4;
pub const CHAIN_CAPACITIES: usize = 3;

/// Surface orientation of an opaque component or window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    South,
    West,
    North,
    East,
    /// Roof: horizontal irradiance, ambient boundary.
    Horizontal,
    /// Floor: constant ground temperature boundary, no solar.
    Ground,
    /// Interior wall: no exterior boundary (adiabatic far side).
    Internal,
}

impl Orientation {
    pub fn label(&self) -> &'static str {
        match self {
            Orientation::South => "south",
            Orientation::West => "west",
            Orientation::North => "north",
            Orientation::East => "east",
            Orientation::Horizontal => "roof",
            Orientation::Ground => "floor",
            Orientation::Internal => "internal",
        }
    }

    /// True when the far side faces ambient air (receives weather and solar).
    pub fn is_exterior(&self) -> bool {
        matches!(
            self,
            Orientation::South
                | Orientation::West
                | Orientation::North
                | Orientation::East
                | Orientation::Horizontal
        )
    }
}

/// One opaque component as a 4R3C chain from the exterior surface (index 0)
/// to the interior surface.
#[derive(Debug, Clone, PartialEq)]
pub struct RCComponent {
    pub name: String,
    pub orientation: Orientation,
    /// Net surface area, m2.
    pub area_m2: f64,
    /// Chain resistances exterior to interior, K/W.
    pub resistances_k_w: [f64; CHAIN_RESISTANCES],
    /// Chain capacities exterior to interior, J/K.
    pub capacities_j_k: [f64; CHAIN_CAPACITIES],
    /// Shortwave absorptance of the exterior surface.
    pub solar_absorptance: f64,
}

/// All windows of the zone, lumped per orientation. Massless: a single
/// resistance couples ambient to the air node.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowGroup {
    /// Glazed areas by orientation [south, west, north, east], m2.
    pub areas_m2: [f64; 4],
    pub u_value_w_m2k: f64,
    /// Total solar energy transmittance of the glazing.
    pub g_value: f64,
    /// Transparent fraction of the window area (rest is frame).
    pub transparent_fraction: f64,
    /// Effective height of the openable part, m.
    pub opening_height_m: f64,
    /// Openable area used by the airing model, m2.
    pub opening_area_m2: f64,
}

impl WindowGroup {
    pub fn total_area_m2(&self) -> f64 {
        self.areas_m2.iter().sum()
    }
}

/// Mechanical ventilation / infiltration.
#[derive(Debug, Clone, PartialEq)]
pub struct VentilationSpec {
    /// Air changes per hour.
    pub air_change_rate: f64,
    /// Heat recovery effectiveness applied to the mechanical share.
    pub heat_recovery_rate: f64,
}

/// Heating-curve driven heat pump surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatPumpSpec {
    pub carnot_quality: f64,
    pub relative_efficiency: f64,
    pub heating_curve_steepness: f64,
    pub max_supply_temperature_c: f64,
    pub cop_min: f64,
    pub cop_max: f64,
}

/// Internal proportional controller with night setback.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSpec {
    pub day_setpoint_c: f64,
    pub night_setpoint_c: f64,
    /// Clock hours [start, end) during which the day setpoint applies.
    pub day_window_hours: (f64, f64),
    pub proportional_band_k: f64,
    /// Seconds between controller invocations (zero-order hold in between).
    pub control_interval_s: f64,
    /// Proportional cooling above this setpoint when present.
    pub cooling_setpoint_c: Option<f64>,
}

/// Convective/radiative split of injected heat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub heating_convective: f64,
    pub gains_convective: f64,
}

/// Fully resolved single-zone model, ready for network assembly.
#[derive(Debug, Clone)]
pub struct ResolvedModel {
    pub components: Vec<RCComponent>,
    pub windows: WindowGroup,
    pub ventilation: VentilationSpec,
    pub heat_pump: HeatPumpSpec,
    pub controller: ControllerSpec,
    pub splits: SplitFractions,
    pub use_internal_controller: bool,
    /// Zone air volume, m3.
    pub volume_m3: f64,
    /// Heated floor area, m2.
    pub floor_area_m2: f64,
    /// Extra lumped capacity on the air node, J/K. Used for furniture when
    /// the zone has no internal walls to attach it to.
    pub additional_air_capacity_j_k: f64,
    pub nominal_heating_power_w: f64,
    pub nominal_cooling_power_w: f64,
    pub ground_temperature_c: f64,
    pub albedo: f64,
    pub initial_temperature_c: f64,
    /// Flat resolved parameter map for metadata sidecars.
    pub resolved_params: BTreeMap<String, serde_json::Value>,
}

/// Dynamic state of a simulated zone.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneState {
    pub time_s: f64,
    pub air_temperature_c: f64,
    pub radiant_node_temperature_c: f64,
    /// Component chain node temperatures, 3 per component, exterior first.
    pub component_temperatures_c: Vec<f64>,
    pub cumulative_heating_j: f64,
    pub cumulative_cooling_j: f64,
    pub cumulative_electrical_j: f64,
}

/// Normalized actuation applied to the zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Actuation {
    /// Heating output as a fraction of nominal power, [0, 1].
    pub u_heat: f64,
    /// Cooling output as a fraction of nominal power, [0, 1].
    pub u_cool: f64,
    /// Window opening fraction, [0, 1].
    pub window_open: f64,
}

impl Default for Actuation {
    fn default() -> Self {
        Actuation {
            u_heat: 0.0,
            u_cool: 0.0,
            window_open: 0.0,
        }
    }
}

impl Actuation {
    pub fn clamped(self) -> Self {
        Actuation {
            u_heat: self.u_heat.clamp(0.0, 1.0),
            u_cool: self.u_cool.clamp(0.0, 1.0),
            window_open: self.window_open.clamp(0.0, 1.0),
        }
    }
}
