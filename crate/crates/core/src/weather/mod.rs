//! EPW weather file parsing and hourly series interpolation.
//!
//! Only the channels the thermal model consumes are retained: dry-bulb
//! temperature, direct normal irradiance and diffuse horizontal irradiance.
//! Missing-value sentinels are repaired by linear interpolation between the
//! nearest valid neighbours.

pub mod solar;

use std::path::Path;
use thiserror::Error;

/// Missing-value sentinel for dry-bulb temperature in EPW files.
const MISSING_DRY_BULB: f64 = 99.9;
/// Missing-value sentinel for irradiance columns in EPW files.
const MISSING_IRRADIANCE: f64 = 9999.0;
/// Number of header lines preceding the data section.
const HEADER_LINES: usize = 8;
/// Minimum comma-separated fields per data row.
const MIN_DATA_FIELDS: usize = 35;

/// Plausible dry-bulb range; values outside are treated as missing.
const DRY_BULB_MIN: f64 = -90.0;
const DRY_BULB_MAX: f64 = 70.0;

#[derive(Debug, Error)]
pub enum WeatherError {
    /// Structural defect: wrong header line count, bad LOCATION line, or a
    /// data row with too few fields or an unparseable number.
    #[error("malformed EPW structure at line {line}: {reason}")]
    MalformedHeader { line: usize, reason: String },
    /// Data rows are not consecutive hourly records.
    #[error("non-hourly data at line {line}: expected hour {expected}")]
    NonHourlyData { line: usize, expected: u32 },
    /// Every value of a required column carries the missing sentinel.
    #[error("column {column} has no valid values")]
    AllMissingColumn { column: &'static str },
    #[error("weather i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Site metadata from the EPW LOCATION header.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteInfo {
    pub city: String,
    /// Degrees, north positive.
    pub latitude_deg: f64,
    /// Degrees, east positive.
    pub longitude_deg: f64,
    /// Offset from UTC in hours (west negative).
    pub timezone_hours: f64,
    pub elevation_m: f64,
}

/// One hourly record. `timestamp_s` counts from the start of the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherRecord {
    pub timestamp_s: f64,
    pub dry_bulb_c: f64,
    pub direct_normal_w_m2: f64,
    pub diffuse_horizontal_w_m2: f64,
}

/// Hourly weather series with site metadata.
///
/// Sampling beyond the last record wraps around to the start, so a series of
/// any length periodically extends to arbitrary horizons.
#[derive(Debug, Clone)]
pub struct WeatherSeries {
    site: SiteInfo,
    records: Vec<WeatherRecord>,
}

/// Instantaneous weather sample produced by [`WeatherSeries::sample`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherSample {
    pub dry_bulb_c: f64,
    pub direct_normal_w_m2: f64,
    pub diffuse_horizontal_w_m2: f64,
}

impl WeatherSeries {
    /// Builds a series from already-validated records. Records must be
    /// hourly-spaced starting at zero.
    pub fn new(site: SiteInfo, records: Vec<WeatherRecord>) -> Self {
        debug_assert!(records
            .iter()
            .enumerate()
            .all(|(i, r)| (r.timestamp_s - i as f64 * 3600.0).abs() < 1e-6));
        Self { site, records }
    }

    pub fn site(&self) -> &SiteInfo {
        &self.site
    }

    pub fn records(&self) -> &[WeatherRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Covered time span in seconds (records are hourly).
    pub fn span_s(&self) -> f64 {
        self.records.len() as f64 * 3600.0
    }

    /// Linear interpolation between hourly records; wraps cyclically past the
    /// end of the series.
    pub fn sample(&self, t_s: f64) -> WeatherSample {
        let span = self.span_s();
        let t = t_s.rem_euclid(span);
        let idx = (t / 3600.0) as usize;
        let frac = (t - idx as f64 * 3600.0) / 3600.0;
        let a = &self.records[idx.min(self.records.len() - 1)];
        let b = &self.records[(idx + 1) % self.records.len()];
        let lerp = |x: f64, y: f64| x + (y - x) * frac;
        WeatherSample {
            dry_bulb_c: lerp(a.dry_bulb_c, b.dry_bulb_c),
            direct_normal_w_m2: lerp(a.direct_normal_w_m2, b.direct_normal_w_m2),
            diffuse_horizontal_w_m2: lerp(a.diffuse_horizontal_w_m2, b.diffuse_horizontal_w_m2),
        }
    }
}

/// Parses an EPW file from disk.
pub fn parse_epw_file(path: &Path) -> Result<WeatherSeries, WeatherError> {
    let text = std::fs::read_to_string(path)?;
    parse_epw(&text)
}

/// Parses EPW text: 8 header lines, then one comma-separated row per hour.
///
/// Consumed data fields (1-based): 7 dry-bulb [C], 15 direct normal
/// irradiance [Wh/m2], 16 diffuse horizontal irradiance [Wh/m2]. Missing
/// sentinels (99.9 / 9999) and out-of-range dry-bulbs are replaced by linear
/// interpolation between the nearest valid neighbours.
pub fn parse_epw(text: &str) -> Result<WeatherSeries, WeatherError> {
    let mut lines = text.lines().enumerate();

    let (_, location) = lines.next().ok_or_else(|| WeatherError::MalformedHeader {
        line: 1,
        reason: "empty file".into(),
    })?;
    let site = parse_location_line(location)?;

    let mut header_seen = 1;
    for (i, line) in lines.by_ref() {
        header_seen += 1;
        if header_seen == HEADER_LINES {
            // Standard files declare one record per hour in DATA PERIODS.
            if let Some(rest) = line.strip_prefix("DATA PERIODS,") {
                let fields: Vec<&str> = rest.split(',').collect();
                if let Some(per_hour) = fields.get(1) {
                    if per_hour.trim().parse::<f64>().map_or(false, |v| v != 1.0) {
                        return Err(WeatherError::NonHourlyData {
                            line: i + 1,
                            expected: 1,
                        });
                    }
                }
            }
            break;
        }
    }
    if header_seen < HEADER_LINES {
        return Err(WeatherError::MalformedHeader {
            line: header_seen,
            reason: format!("expected {HEADER_LINES} header lines"),
        });
    }

    let mut dry = Vec::new();
    let mut dni = Vec::new();
    let mut dhi = Vec::new();
    let mut row = 0usize;
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < MIN_DATA_FIELDS {
            return Err(WeatherError::MalformedHeader {
                line: i + 1,
                reason: format!("data row has {} fields, expected >= {MIN_DATA_FIELDS}", fields.len()),
            });
        }
        let num = |idx: usize| -> Result<f64, WeatherError> {
            fields[idx]
                .trim()
                .parse::<f64>()
                .map_err(|_| WeatherError::MalformedHeader {
                    line: i + 1,
                    reason: format!("unparseable number in field {}", idx + 1),
                })
        };
        let hour = num(3)? as u32;
        let expected = (row % 24) as u32 + 1;
        if hour != expected {
            return Err(WeatherError::NonHourlyData { line: i + 1, expected });
        }
        let t = num(6)?;
        dry.push(if (DRY_BULB_MIN..=DRY_BULB_MAX).contains(&t) && t != MISSING_DRY_BULB {
            Some(t)
        } else {
            None
        });
        let rad = |v: f64| if (0.0..MISSING_IRRADIANCE).contains(&v) { Some(v) } else { None };
        dni.push(rad(num(14)?));
        dhi.push(rad(num(15)?));
        row += 1;
    }
    if row == 0 {
        return Err(WeatherError::MalformedHeader {
            line: HEADER_LINES + 1,
            reason: "no data rows".into(),
        });
    }

    let dry = fill_missing(&dry).ok_or(WeatherError::AllMissingColumn { column: "dry_bulb" })?;
    let dni = fill_missing(&dni).ok_or(WeatherError::AllMissingColumn { column: "direct_normal" })?;
    let dhi = fill_missing(&dhi).ok_or(WeatherError::AllMissingColumn {
        column: "diffuse_horizontal",
    })?;

    let records = (0..row)
        .map(|i| WeatherRecord {
            timestamp_s: i as f64 * 3600.0,
            dry_bulb_c: dry[i],
            direct_normal_w_m2: dni[i],
            diffuse_horizontal_w_m2: dhi[i],
        })
        .collect();
    Ok(WeatherSeries::new(site, records))
}

fn parse_location_line(line: &str) -> Result<SiteInfo, WeatherError> {
    let fields: Vec<&str> = line.split(',').collect();
    if !fields[0].trim().eq_ignore_ascii_case("LOCATION") || fields.len() < 10 {
        return Err(WeatherError::MalformedHeader {
            line: 1,
            reason: "LOCATION line with 10 fields expected".into(),
        });
    }
    let num = |idx: usize| -> Result<f64, WeatherError> {
        fields[idx]
            .trim()
            .parse::<f64>()
            .map_err(|_| WeatherError::MalformedHeader {
                line: 1,
                reason: format!("unparseable LOCATION field {}", idx + 1),
            })
    };
    Ok(SiteInfo {
        city: fields[1].trim().to_string(),
        latitude_deg: num(6)?,
        longitude_deg: num(7)?,
        timezone_hours: num(8)?,
        elevation_m: num(9)?,
    })
}

/// Replaces `None` gaps by linear interpolation between valid neighbours;
/// leading/trailing gaps take the nearest valid value. Returns `None` when
/// the whole column is missing.
fn fill_missing(values: &[Option<f64>]) -> Option<Vec<f64>> {
    let n = values.len();
    let mut out = vec![0.0; n];
    let valid: Vec<usize> = (0..n).filter(|&i| values[i].is_some()).collect();
    if valid.is_empty() {
        return None;
    }
    for i in 0..n {
        if let Some(v) = values[i] {
            out[i] = v;
            continue;
        }
        let next = valid.partition_point(|&j| j < i);
        out[i] = match (next.checked_sub(1).map(|k| valid[k]), valid.get(next)) {
            (Some(a), Some(&b)) => {
                let (va, vb) = (values[a].unwrap(), values[b].unwrap());
                va + (vb - va) * (i - a) as f64 / (b - a) as f64
            }
            (Some(a), None) => values[a].unwrap(),
            (None, Some(&b)) => values[b].unwrap(),
            (None, None) => unreachable!(),
        };
    }
    Some(out)
}
