//! Solar position and irradiance projection onto the zone surfaces.
//!
//! Position uses the Spencer series for declination and equation of time
//! together with the standard hour-angle formulation. Sky diffuse is treated
//! isotropically; vertical surfaces additionally see ground-reflected
//! radiation from the configured albedo.

use super::SiteInfo;

/// Fraction of the sky dome seen by a vertical surface.
const VERTICAL_SKY_VIEW: f64 = 0.5;

/// Solar position at one instant.
#[derive(Debug, Clone, Copy)]
pub struct SolarPosition {
    /// Altitude above the horizon, radians.
    pub altitude_rad: f64,
    /// Azimuth measured from south, westward positive, radians.
    pub azimuth_rad: f64,
    pub declination_rad: f64,
    pub equation_of_time_min: f64,
}

/// Irradiance on the five zone surface orientations, W/m2.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SurfaceIrradiance {
    pub south: f64,
    pub west: f64,
    pub north: f64,
    pub east: f64,
    pub horizontal: f64,
}

/// Computes the solar position for a simulation timestamp. `t_s` counts from
/// local standard midnight at the start of day 1; multi-year horizons wrap.
pub fn solar_position(t_s: f64, site: &SiteInfo) -> SolarPosition {
    let day = ((t_s / 86_400.0).floor() as i64).rem_euclid(365) as f64;
    let b = 2.0 * std::f64::consts::PI * day / 365.0;

    // Spencer series; equation of time in minutes.
    let eot = 229.2
        * (0.000075 + 0.001868 * b.cos()
            - 0.032077 * b.sin()
            - 0.014615 * (2.0 * b).cos()
            - 0.04089 * (2.0 * b).sin());
    let decl = 0.006918 - 0.399912 * b.cos() + 0.070257 * b.sin() - 0.006758 * (2.0 * b).cos()
        + 0.000907 * (2.0 * b).sin()
        - 0.002697 * (3.0 * b).cos()
        + 0.00148 * (3.0 * b).sin();

    let clock_hours = (t_s.rem_euclid(86_400.0)) / 3600.0;
    let solar_hours =
        clock_hours + eot / 60.0 + (site.longitude_deg - 15.0 * site.timezone_hours) / 15.0;
    let hour_angle = (solar_hours - 12.0) * 15.0_f64.to_radians();

    let lat = site.latitude_deg.to_radians();
    let sin_alt =
        lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.cos();
    let altitude = sin_alt.clamp(-1.0, 1.0).asin();
    // Azimuth from south, westward positive.
    let azimuth = f64::atan2(
        hour_angle.sin() * decl.cos(),
        hour_angle.cos() * decl.cos() * lat.sin() - decl.sin() * lat.cos(),
    );

    SolarPosition {
        altitude_rad: altitude,
        azimuth_rad: azimuth,
        declination_rad: decl,
        equation_of_time_min: eot,
    }
}

/// Local standard time of solar noon (seconds into the day) for the day
/// containing `t_s`.
pub fn solar_noon_s(t_s: f64, site: &SiteInfo) -> f64 {
    let pos = solar_position(t_s, site);
    let noon_hours = 12.0 - pos.equation_of_time_min / 60.0
        - (site.longitude_deg - 15.0 * site.timezone_hours) / 15.0;
    (t_s / 86_400.0).floor() * 86_400.0 + noon_hours * 3600.0
}

/// Projects direct normal and diffuse horizontal irradiance onto the four
/// vertical orientations and the horizontal.
///
/// Vertical surfaces: beam by incidence cosine, half the isotropic sky
/// diffuse, and half the ground-reflected global (`albedo` fraction).
/// Horizontal surfaces: beam plus full sky diffuse.
pub fn incident_irradiance(
    t_s: f64,
    direct_normal: f64,
    diffuse_horizontal: f64,
    site: &SiteInfo,
    albedo: f64,
) -> SurfaceIrradiance {
    let pos = solar_position(t_s, site);
    let sin_alt = pos.altitude_rad.sin();
    let up = sin_alt > 0.0;

    let beam_horizontal = if up { direct_normal * sin_alt } else { 0.0 };
    let global_horizontal = beam_horizontal + diffuse_horizontal;
    let ground = VERTICAL_SKY_VIEW * albedo * global_horizontal;
    let sky = VERTICAL_SKY_VIEW * diffuse_horizontal;

    let vertical = |surface_azimuth_deg: f64| -> f64 {
        let beam = if up {
            let cos_inc = pos.altitude_rad.cos()
                * (pos.azimuth_rad - surface_azimuth_deg.to_radians()).cos();
            direct_normal * cos_inc.max(0.0)
        } else {
            0.0
        };
        beam + sky + ground
    };

    SurfaceIrradiance {
        south: vertical(0.0),
        west: vertical(90.0),
        north: vertical(180.0),
        east: vertical(-90.0),
        horizontal: beam_horizontal + diffuse_horizontal,
    }
}
