//! Buoyancy-driven airflow through a partially opened window.

use super::WindowGroup;

/// Discharge coefficient of a sharp-edged window opening.
pub const DISCHARGE_COEFFICIENT: f64 = 0.7;
const GRAVITY: f64 = 9.81;

/// Volume flow in m3/s for single-sided buoyancy-driven airing:
///
/// `V = open * (Cd/3) * A * sqrt(g * H * |Ti - Te| / Tm)`
///
/// with `Tm` the mean of inside and outside temperature in Kelvin. Returns
/// zero for a closed window or equal temperatures.
pub fn window_airflow(
    window: &WindowGroup,
    open_fraction: f64,
    t_inside_c: f64,
    t_outside_c: f64,
) -> f64 {
    let open = open_fraction.clamp(0.0, 1.0);
    if open == 0.0 {
        return 0.0;
    }
    let dt = (t_inside_c - t_outside_c).abs();
    let t_mean_k = 0.5 * (t_inside_c + t_outside_c) + 273.15;
    open * (DISCHARGE_COEFFICIENT / 3.0)
        * window.opening_area_m2
        * (GRAVITY * window.opening_height_m * dt / t_mean_k).sqrt()
}
