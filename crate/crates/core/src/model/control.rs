//! Heating/cooling control: built-in proportional controller with night
//! setback and the external controller interface.

use super::{Actuation, ControllerSpec};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("external controller fault at t={time_s}: {reason}")]
pub struct ControllerFault {
    pub time_s: f64,
    pub reason: String,
}

/// Values exposed to a controller at each control instant.
#[derive(Debug, Clone, Copy)]
pub struct ControllerObservation {
    pub time_s: f64,
    pub air_temperature_c: f64,
    pub outdoor_temperature_c: f64,
    pub direct_normal_w_m2: f64,
    pub diffuse_horizontal_w_m2: f64,
    /// Actuation currently held from the previous control instant.
    pub previous: Actuation,
}

/// User-supplied control strategy, invoked every control interval; the
/// returned actuation is clamped to [0, 1] and held until the next call.
pub trait ExternalController: Send {
    fn actuate(&mut self, obs: &ControllerObservation) -> Result<Actuation, ControllerFault>;
}

/// Heating setpoint active at a clock time: day setpoint inside the day
/// window, night setpoint otherwise.
pub fn active_setpoint(spec: &ControllerSpec, time_s: f64) -> f64 {
    let hour = (time_s.rem_euclid(86_400.0)) / 3600.0;
    let (start, end) = spec.day_window_hours;
    let day = if start <= end {
        hour >= start && hour < end
    } else {
        // Window wrapping midnight.
        hour >= start || hour < end
    };
    if day {
        spec.day_setpoint_c
    } else {
        spec.night_setpoint_c
    }
}

/// Built-in proportional controller. Heating output ramps linearly from 0 to
/// 1 over `proportional_band_k` below the active setpoint; cooling mirrors
/// this above the cooling setpoint when one is configured. Window actuation
/// is left to the opening profile.
pub fn internal_controller(
    spec: &ControllerSpec,
    time_s: f64,
    air_temperature_c: f64,
    window_open: f64,
) -> Actuation {
    let setpoint = active_setpoint(spec, time_s);
    let band = spec.proportional_band_k.max(1e-9);
    let u_heat = ((setpoint - air_temperature_c) / band).clamp(0.0, 1.0);
    let u_cool = match spec.cooling_setpoint_c {
        Some(cool) => ((air_temperature_c - cool) / band).clamp(0.0, 1.0),
        None => 0.0,
    };
    Actuation {
        u_heat,
        u_cool,
        window_open,
    }
}

/// Two-point (hysteresis) heating controller around a fixed setpoint,
/// usable as an external controller.
pub struct TwoPointController {
    pub setpoint_c: f64,
    pub hysteresis_k: f64,
    on: bool,
}

impl TwoPointController {
    pub fn new(setpoint_c: f64, hysteresis_k: f64) -> Self {
        Self {
            setpoint_c,
            hysteresis_k,
            on: false,
        }
    }
}

impl ExternalController for TwoPointController {
    fn actuate(&mut self, obs: &ControllerObservation) -> Result<Actuation, ControllerFault> {
        if obs.air_temperature_c < self.setpoint_c - self.hysteresis_k {
            self.on = true;
        } else if obs.air_temperature_c > self.setpoint_c + self.hysteresis_k {
            self.on = false;
        }
        Ok(Actuation {
            u_heat: if self.on { 1.0 } else { 0.0 },
            u_cool: 0.0,
            window_open: obs.previous.window_open,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ControllerSpec {
        ControllerSpec {
            day_setpoint_c: 22.0,
            night_setpoint_c: 18.0,
            day_window_hours: (6.0, 22.0),
            proportional_band_k: 2.0,
            control_interval_s: 900.0,
            cooling_setpoint_c: None,
        }
    }

    #[test]
    fn proportional_band_midpoint() {
        // 21 C air against a 22 C setpoint with a 2 K band: u = 0.5.
        let a = internal_controller(&spec(), 12.0 * 3600.0, 21.0, 0.0);
        assert!((a.u_heat - 0.5).abs() < 1e-12);
        assert_eq!(a.u_cool, 0.0);
    }

    #[test]
    fn saturates_at_band_edges() {
        let s = spec();
        let noon = 12.0 * 3600.0;
        assert_eq!(internal_controller(&s, noon, 19.0, 0.0).u_heat, 1.0);
        assert_eq!(internal_controller(&s, noon, 23.5, 0.0).u_heat, 0.0);
    }

    #[test]
    fn night_setback_applies_outside_day_window() {
        let s = spec();
        // 03:00: night setpoint 18 C; air at 18 C -> no heating.
        let night = internal_controller(&s, 3.0 * 3600.0, 18.0, 0.0);
        assert_eq!(night.u_heat, 0.0);
        // Same air temperature at noon demands full heating (4 K below 22 C,
        // band 2 K).
        let day = internal_controller(&s, 12.0 * 3600.0, 18.0, 0.0);
        assert_eq!(day.u_heat, 1.0);
        // Boundary hours: day window is [6, 22).
        assert_eq!(active_setpoint(&s, 6.0 * 3600.0), 22.0);
        assert_eq!(active_setpoint(&s, 22.0 * 3600.0), 18.0);
    }

    #[test]
    fn cooling_engages_above_cooling_setpoint() {
        let mut s = spec();
        s.cooling_setpoint_c = Some(26.0);
        let a = internal_controller(&s, 12.0 * 3600.0, 27.0, 0.0);
        assert_eq!(a.u_heat, 0.0);
        assert!((a.u_cool - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_point_hysteresis_cycle() {
        let mut c = TwoPointController::new(21.0, 0.5);
        let obs = |t_air: f64, prev: Actuation| ControllerObservation {
            time_s: 0.0,
            air_temperature_c: t_air,
            outdoor_temperature_c: 0.0,
            direct_normal_w_m2: 0.0,
            diffuse_horizontal_w_m2: 0.0,
            previous: prev,
        };
        let prev = Actuation::default();
        assert_eq!(c.actuate(&obs(20.4, prev)).unwrap().u_heat, 1.0);
        // Inside the deadband the previous command holds.
        assert_eq!(c.actuate(&obs(21.2, prev)).unwrap().u_heat, 1.0);
        assert_eq!(c.actuate(&obs(21.6, prev)).unwrap().u_heat, 0.0);
        assert_eq!(c.actuate(&obs(20.8, prev)).unwrap().u_heat, 0.0);
    }
}
