//! Heat pump surrogate: heating-curve supply temperature and a
//! Carnot-quality COP.

use super::HeatPumpSpec;

/// Electrical side of the heat pump at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatPumpPoint {
    pub supply_temperature_c: f64,
    pub cop: f64,
    pub electrical_power_w: f64,
}

/// Evaluates the surrogate for a heating power demand.
///
/// The supply temperature follows a linear heating curve
/// `t_supply = setpoint + steepness * (setpoint - t_out)` clamped to
/// [setpoint, max supply]. The COP is a quality-scaled Carnot value over the
/// lift `t_supply - t_out` (floored at 1 K), clamped to the configured
/// bounds. Zero heat demand draws zero electrical power.
pub fn heat_pump_power(
    spec: &HeatPumpSpec,
    q_heat_w: f64,
    t_out_c: f64,
    room_setpoint_c: f64,
) -> HeatPumpPoint {
    let raw = room_setpoint_c + spec.heating_curve_steepness * (room_setpoint_c - t_out_c);
    let supply = raw.clamp(room_setpoint_c, spec.max_supply_temperature_c);
    let lift = (supply - t_out_c).max(1.0);
    let carnot = (supply + 273.15) / lift;
    let cop = (spec.carnot_quality * spec.relative_efficiency * carnot)
        .clamp(spec.cop_min, spec.cop_max);
    let electrical = if q_heat_w > 0.0 { q_heat_w / cop } else { 0.0 };
    HeatPumpPoint {
        supply_temperature_c: supply,
        cop,
        electrical_power_w: electrical,
    }
}
