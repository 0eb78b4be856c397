//! Shared helpers for integration tests: synthetic EPW weather.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// EPW header for a Munich-like site.
pub fn epw_header() -> &'static str {
    "LOCATION,Synthtown,BY,DE,SRC,000000,48.10,11.70,1.0,520.0\n\
     DESIGN CONDITIONS,0\n\
     TYPICAL/EXTREME PERIODS,0\n\
     GROUND TEMPERATURES,0\n\
     HOLIDAYS/DAYLIGHT SAVINGS,No,0,0,0\n\
     COMMENTS 1,synthetic test weather\n\
     COMMENTS 2,\n\
     DATA PERIODS,1,1,Data,Sunday,1/1,12/31\n"
}

fn epw_row(day: usize, hour: usize, dry_bulb: f64, dni: f64, dhi: f64) -> String {
    let mut fields = vec!["0".to_string(); 35];
    fields[0] = "2021".into();
    fields[1] = "1".into();
    fields[2] = (day % 28 + 1).to_string();
    fields[3] = (hour + 1).to_string();
    fields[6] = format!("{dry_bulb:.2}");
    fields[14] = format!("{dni:.1}");
    fields[15] = format!("{dhi:.1}");
    fields.join(",") + "\n"
}

/// A full synthetic year: seasonal and diurnal temperature cycles plus a
/// clear-sky-like irradiance shape. Deterministic, heating-dominated
/// mid-latitude climate with sunny summers.
pub fn annual_epw_text() -> String {
    let mut out = String::with_capacity(9000 * 120);
    out.push_str(epw_header());
    for day in 0..365 {
        let season = 2.0 * PI * (day as f64 - 20.0) / 365.0;
        let sun_season = 1.0 - 0.45 * (2.0 * PI * (day as f64 - 172.0) / 365.0).cos();
        for hour in 0..24 {
            let diurnal = 2.0 * PI * (hour as f64 - 9.0) / 24.0;
            let t = 9.0 - 10.0 * season.cos() + 4.0 * diurnal.sin();
            let s = if (6..=18).contains(&hour) {
                (PI * (hour as f64 - 6.0) / 12.0).sin().max(0.0)
            } else {
                0.0
            };
            let dni = 750.0 * s * sun_season;
            let dhi = 110.0 * s * sun_season;
            out.push_str(&epw_row(day, hour, t, dni, dhi));
        }
    }
    out
}

/// Constant weather: fixed dry bulb, no sun, `days` long.
pub fn constant_epw_text(dry_bulb: f64, days: usize) -> String {
    let mut out = String::with_capacity(days * 24 * 120);
    out.push_str(epw_header());
    for day in 0..days {
        for hour in 0..24 {
            out.push_str(&epw_row(day, hour, dry_bulb, 0.0, 0.0));
        }
    }
    out
}

pub fn write_epw(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}
