//! Internal-gain and window-opening profiles.
//!
//! A profile is a year of values on a fixed five-minute grid, either
//! generated from day templates (workday, Saturday, Sunday, holiday) plus a
//! seeded random process for window airing, loaded from CSV, or constant.
//! Five predefined household archetypes ship with documented template
//! constants; they are qualitative approximations, not survey data.
//!
//! Calendar convention: 365 days, January 1st is a Monday, a small fixed
//! holiday set. Sampling is zero-order hold and wraps cyclically, so leap
//! days and multi-year horizons reuse the profile.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

/// Profile slot width, seconds ("every five minutes").
pub const PROFILE_STEP_S: f64 = 300.0;
pub const SLOTS_PER_DAY: usize = 288;
pub const DAYS_PER_YEAR: usize = 365;
const SLOTS_PER_HOUR: usize = 12;

/// Default sensible metabolic output per person, W.
pub const WATTS_PER_PERSON: f64 = 100.0;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("line {line}: non-uniform time step")]
    NonUniformStep { line: usize },
    #[error("line {line}: value {value} out of range for a {kind} profile")]
    OutOfRangeValue {
        line: usize,
        value: f64,
        kind: &'static str,
    },
    #[error("profile has no data rows")]
    EmptyProfile,
    #[error("unknown archetype `{0}`")]
    UnknownArchetype(String),
}

/// What a profile's values mean, and therefore which range they must lie in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// Internal gains, W; non-negative.
    Gain,
    /// Window-open fraction in [0, 1].
    Window,
}

/// A sampled time series with uniform step, cyclic beyond its span.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub step_s: f64,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn constant(value: f64) -> Profile {
        Profile {
            step_s: PROFILE_STEP_S,
            values: vec![value],
        }
    }

    /// Zero-order-hold sample, wrapping cyclically.
    pub fn sample(&self, t_s: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let slot = (t_s / self.step_s).floor() as i64;
        let n = self.values.len() as i64;
        self.values[slot.rem_euclid(n) as usize]
    }
}

/// Hourly pattern for one kind of day.
#[derive(Debug, Clone)]
pub struct DayTemplate {
    /// Persons present, per hour of day.
    pub occupancy: [f64; 24],
    /// Appliance load, W, per hour of day.
    pub device_load_w: [f64; 24],
    /// Sleep window in hours; wraps past midnight when start > end.
    pub sleep: (f64, f64),
}

impl DayTemplate {
    pub fn asleep(&self, hour: f64) -> bool {
        let (start, end) = self.sleep;
        if start == end {
            false
        } else if start < end {
            (start..end).contains(&hour)
        } else {
            hour >= start || hour < end
        }
    }
}

/// One template per day kind.
#[derive(Debug, Clone)]
pub struct DayTemplates {
    pub workday: DayTemplate,
    pub saturday: DayTemplate,
    pub sunday: DayTemplate,
    pub holiday: DayTemplate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DayKind {
    Workday,
    Saturday,
    Sunday,
    Holiday,
}

/// Day kind for a zero-based day of year. January 1st is a Monday.
pub fn day_kind(day: usize, holidays: &BTreeSet<usize>) -> DayKind {
    if holidays.contains(&(day % DAYS_PER_YEAR)) {
        return DayKind::Holiday;
    }
    match day % 7 {
        5 => DayKind::Saturday,
        6 => DayKind::Sunday,
        _ => DayKind::Workday,
    }
}

impl DayTemplates {
    pub fn for_kind(&self, kind: DayKind) -> &DayTemplate {
        match kind {
            DayKind::Workday => &self.workday,
            DayKind::Saturday => &self.saturday,
            DayKind::Sunday => &self.sunday,
            DayKind::Holiday => &self.holiday,
        }
    }
}

/// Fixed public holidays as zero-based days of year: New Year, May 1st,
/// October 3rd, Christmas Day, Boxing Day.
pub fn default_holidays() -> BTreeSet<usize> {
    BTreeSet::from([0, 120, 275, 358, 359])
}

/// Knobs of the stochastic window-airing process and the gain scaling.
#[derive(Debug, Clone, Copy)]
pub struct GenerationParams {
    pub watts_per_person: f64,
    /// Chance of starting an airing event per occupied-awake slot.
    pub airing_probability: f64,
    pub mean_airing_duration_min: f64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            watts_per_person: WATTS_PER_PERSON,
            airing_probability: 0.04,
            mean_airing_duration_min: 15.0,
        }
    }
}

/// Generates one year of gains (occupants plus devices) and window states.
///
/// Window airing: in each five-minute slot where someone is present and
/// awake, an event starts with `airing_probability` and lasts a geometric
/// number of slots with the configured mean. The window closes immediately
/// when the occupied-awake gate drops. Identical seeds give identical
/// profiles.
pub fn generate_year(
    templates: &DayTemplates,
    holidays: &BTreeSet<usize>,
    seed: u64,
    params: &GenerationParams,
) -> (Profile, Profile) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = DAYS_PER_YEAR * SLOTS_PER_DAY;
    let mut gains = Vec::with_capacity(n);
    let mut window = Vec::with_capacity(n);

    let mean_slots = (params.mean_airing_duration_min * 60.0 / PROFILE_STEP_S).max(1.0);
    let mut open_remaining = 0u32;

    for day in 0..DAYS_PER_YEAR {
        let template = templates.for_kind(day_kind(day, holidays));
        for slot in 0..SLOTS_PER_DAY {
            let hour = slot / SLOTS_PER_HOUR;
            let occupants = template.occupancy[hour];
            gains.push(occupants * params.watts_per_person + template.device_load_w[hour]);

            let gate = occupants > 0.0 && !template.asleep(hour as f64);
            if !gate {
                open_remaining = 0;
                window.push(0.0);
                continue;
            }
            if open_remaining > 0 {
                open_remaining -= 1;
                window.push(1.0);
                continue;
            }
            if rng.random::<f64>() < params.airing_probability {
                open_remaining = geometric_slots(&mut rng, mean_slots) - 1;
                window.push(1.0);
            } else {
                window.push(0.0);
            }
        }
    }

    (
        Profile {
            step_s: PROFILE_STEP_S,
            values: gains,
        },
        Profile {
            step_s: PROFILE_STEP_S,
            values: window,
        },
    )
}

/// Duration in slots, at least one, geometric with the given mean.
fn geometric_slots(rng: &mut ChaCha8Rng, mean_slots: f64) -> u32 {
    if mean_slots <= 1.0 {
        return 1;
    }
    let p = 1.0 / mean_slots;
    let u: f64 = rng.random();
    // 1 + floor(ln(1-u) / ln(1-p)) has mean 1/p.
    1 + ((1.0 - u).ln() / (1.0 - p).ln()).floor() as u32
}

// Archetypes -----------------------------------------------------------------

/// Predefined household archetype names.
pub const ARCHETYPES: &[&str] = &[
    "CHR01_Couple_both_at_Work",
    "CHR07_Single_with_work",
    "CHR16_Couple_over_65_years",
    "CHR27_Family_both_at_work_2_children",
    "CHR52_Student_Flatsharing",
];

fn hours(spans: &[(usize, usize, f64)]) -> [f64; 24] {
    let mut out = [0.0; 24];
    for &(from, to, v) in spans {
        for h in from..to {
            out[h] = v;
        }
    }
    out
}

struct Archetype {
    templates: DayTemplates,
    params: GenerationParams,
    seed: u64,
}

/// Single adult with daytime work: away on workdays from 08 to 18, morning
/// and evening appliance peaks.
fn chr07() -> Archetype {
    let workday = DayTemplate {
        occupancy: hours(&[(0, 8, 1.0), (18, 24, 1.0)]),
        device_load_w: hours(&[(0, 24, 25.0), (6, 8, 150.0), (18, 22, 220.0)]),
        sleep: (23.0, 7.0),
    };
    let weekend = DayTemplate {
        occupancy: hours(&[(0, 11, 1.0), (14, 24, 1.0)]),
        device_load_w: hours(&[(0, 24, 25.0), (9, 11, 180.0), (18, 22, 220.0)]),
        sleep: (24.0, 8.0),
    };
    Archetype {
        templates: DayTemplates {
            workday,
            saturday: weekend.clone(),
            sunday: weekend.clone(),
            holiday: weekend,
        },
        params: GenerationParams::default(),
        seed: 0x07,
    }
}

/// Two working adults: weekday absence, pronounced evening peaks.
fn chr01() -> Archetype {
    let workday = DayTemplate {
        occupancy: hours(&[(0, 8, 2.0), (17, 18, 1.0), (18, 24, 2.0)]),
        device_load_w: hours(&[(0, 24, 35.0), (6, 8, 200.0), (18, 22, 380.0)]),
        sleep: (23.0, 6.0),
    };
    let weekend = DayTemplate {
        occupancy: hours(&[(0, 10, 2.0), (10, 16, 1.0), (16, 24, 2.0)]),
        device_load_w: hours(&[(0, 24, 35.0), (9, 13, 250.0), (18, 22, 350.0)]),
        sleep: (24.0, 8.0),
    };
    Archetype {
        templates: DayTemplates {
            workday,
            saturday: weekend.clone(),
            sunday: weekend.clone(),
            holiday: weekend,
        },
        params: GenerationParams {
            airing_probability: 0.05,
            ..Default::default()
        },
        seed: 0x01,
    }
}

/// Family of four: children home in the afternoon, strong morning and
/// evening peaks, busier weekends.
fn chr27() -> Archetype {
    let workday = DayTemplate {
        occupancy: hours(&[(0, 8, 4.0), (14, 17, 2.0), (17, 18, 3.0), (18, 24, 4.0)]),
        device_load_w: hours(&[(0, 24, 45.0), (6, 8, 420.0), (17, 22, 520.0)]),
        sleep: (22.0, 6.0),
    };
    let saturday = DayTemplate {
        occupancy: hours(&[(0, 10, 4.0), (10, 15, 2.0), (15, 24, 4.0)]),
        device_load_w: hours(&[(0, 24, 45.0), (9, 14, 400.0), (17, 22, 480.0)]),
        sleep: (23.0, 7.0),
    };
    let sunday = DayTemplate {
        occupancy: hours(&[(0, 24, 4.0)]),
        device_load_w: hours(&[(0, 24, 45.0), (11, 14, 450.0), (17, 21, 420.0)]),
        sleep: (22.0, 7.0),
    };
    Archetype {
        templates: DayTemplates {
            workday,
            saturday,
            sunday: sunday.clone(),
            holiday: sunday,
        },
        params: GenerationParams {
            airing_probability: 0.06,
            mean_airing_duration_min: 10.0,
            ..Default::default()
        },
        seed: 0x27,
    }
}

/// Retired couple: home most of the day, flat gains with small peaks.
fn chr16() -> Archetype {
    let day = DayTemplate {
        occupancy: hours(&[(0, 10, 2.0), (10, 12, 1.0), (12, 24, 2.0)]),
        device_load_w: hours(&[(0, 24, 50.0), (8, 13, 130.0), (17, 21, 150.0)]),
        sleep: (22.0, 7.0),
    };
    Archetype {
        templates: DayTemplates {
            workday: day.clone(),
            saturday: day.clone(),
            sunday: day.clone(),
            holiday: day,
        },
        params: GenerationParams {
            airing_probability: 0.03,
            mean_airing_duration_min: 20.0,
            ..Default::default()
        },
        seed: 0x16,
    }
}

/// Shared student flat: irregular presence, late and high evening loads.
fn chr52() -> Archetype {
    let workday = DayTemplate {
        occupancy: hours(&[(0, 9, 3.0), (9, 13, 1.0), (13, 17, 2.0), (17, 24, 3.0)]),
        device_load_w: hours(&[(0, 24, 40.0), (11, 14, 180.0), (19, 24, 430.0)]),
        sleep: (1.0, 9.0),
    };
    let weekend = DayTemplate {
        occupancy: hours(&[(0, 12, 3.0), (12, 18, 2.0), (18, 24, 4.0)]),
        device_load_w: hours(&[(0, 24, 40.0), (12, 15, 220.0), (19, 24, 460.0)]),
        sleep: (2.0, 10.0),
    };
    Archetype {
        templates: DayTemplates {
            workday,
            saturday: weekend.clone(),
            sunday: weekend.clone(),
            holiday: weekend,
        },
        params: GenerationParams {
            airing_probability: 0.05,
            mean_airing_duration_min: 12.0,
            ..Default::default()
        },
        seed: 0x52,
    }
}

fn archetype_by_name(name: &str) -> Option<Archetype> {
    match name {
        "CHR01_Couple_both_at_Work" => Some(chr01()),
        "CHR07_Single_with_work" => Some(chr07()),
        "CHR16_Couple_over_65_years" => Some(chr16()),
        "CHR27_Family_both_at_work_2_children" => Some(chr27()),
        "CHR52_Student_Flatsharing" => Some(chr52()),
        _ => None,
    }
}

/// Generates the gain and window profiles of a named archetype.
pub fn archetype(name: &str) -> Result<(Profile, Profile), ProfileError> {
    archetype_seeded(name, 0)
}

/// Archetype generation with an extra seed folded in, so batches can vary
/// the stochastic window behavior while staying reproducible.
pub fn archetype_seeded(name: &str, seed: u64) -> Result<(Profile, Profile), ProfileError> {
    let a = archetype_by_name(name)
        .ok_or_else(|| ProfileError::UnknownArchetype(name.to_string()))?;
    Ok(generate_year(
        &a.templates,
        &default_holidays(),
        a.seed ^ seed,
        &a.params,
    ))
}

#[cfg(test)]
pub(crate) fn archetype_templates(name: &str) -> Option<DayTemplates> {
    archetype_by_name(name).map(|a| a.templates)
}

// CSV ------------------------------------------------------------------------

/// Loads a `time_s,value` CSV with uniform step, validating the value range
/// for the given kind.
pub fn load_profile_csv(path: &Path, kind: ProfileKind) -> Result<Profile, ProfileError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    parse_profile_csv(reader, kind)
}

fn parse_profile_csv<R: BufRead>(reader: R, kind: ProfileKind) -> Result<Profile, ProfileError> {
    let mut values = Vec::new();
    let mut step = None;
    let mut prev_t: Option<f64> = None;

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let trimmed = line.trim();
        if i == 0 {
            if trimmed != "time_s,value" {
                return Err(ProfileError::MalformedRow {
                    line: 1,
                    reason: format!("expected header `time_s,value`, got `{trimmed}`"),
                });
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let (t_str, v_str) = trimmed.split_once(',').ok_or(ProfileError::MalformedRow {
            line: line_no,
            reason: "expected two comma-separated fields".into(),
        })?;
        let t: f64 = t_str.trim().parse().map_err(|_| ProfileError::MalformedRow {
            line: line_no,
            reason: format!("bad time `{t_str}`"),
        })?;
        let v: f64 = v_str.trim().parse().map_err(|_| ProfileError::MalformedRow {
            line: line_no,
            reason: format!("bad value `{v_str}`"),
        })?;

        let in_range = match kind {
            ProfileKind::Gain => v >= 0.0 && v.is_finite(),
            ProfileKind::Window => (0.0..=1.0).contains(&v),
        };
        if !in_range {
            return Err(ProfileError::OutOfRangeValue {
                line: line_no,
                value: v,
                kind: match kind {
                    ProfileKind::Gain => "gain",
                    ProfileKind::Window => "window",
                },
            });
        }

        if let Some(p) = prev_t {
            let dt = t - p;
            if dt <= 0.0 {
                return Err(ProfileError::NonUniformStep { line: line_no });
            }
            match step {
                None => step = Some(dt),
                Some(s) if (dt - s).abs() > 1e-6 => {
                    return Err(ProfileError::NonUniformStep { line: line_no });
                }
                _ => {}
            }
        }
        prev_t = Some(t);
        values.push(v);
    }

    if values.is_empty() {
        return Err(ProfileError::EmptyProfile);
    }
    Ok(Profile {
        step_s: step.unwrap_or(PROFILE_STEP_S),
        values,
    })
}

/// Writes a profile in the `time_s,value` format accepted by the loader.
pub fn save_profile_csv(path: &Path, profile: &Profile) -> Result<(), ProfileError> {
    let mut out = String::from("time_s,value\n");
    for (i, v) in profile.values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i as f64 * profile.step_s, v));
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn flat_templates(occupants: f64, device_w: f64) -> DayTemplates {
        let day = DayTemplate {
            occupancy: [occupants; 24],
            device_load_w: [device_w; 24],
            sleep: (0.0, 0.0),
        };
        DayTemplates {
            workday: day.clone(),
            saturday: day.clone(),
            sunday: day.clone(),
            holiday: day,
        }
    }

    #[test]
    fn empty_occupancy_gives_zero_profiles() {
        let (gains, window) = generate_year(
            &flat_templates(0.0, 0.0),
            &default_holidays(),
            1,
            &GenerationParams::default(),
        );
        assert_eq!(gains.values.len(), 365 * 288);
        assert!(gains.values.iter().all(|v| *v == 0.0));
        assert!(window.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constant_occupancy_gives_constant_gains() {
        let (gains, _) = generate_year(
            &flat_templates(2.0, 0.0),
            &default_holidays(),
            1,
            &GenerationParams::default(),
        );
        assert!(gains.values.iter().all(|v| *v == 200.0));
    }

    #[test]
    fn airing_rate_matches_bernoulli_model() {
        // Mean duration of one slot makes slots independent Bernoulli draws;
        // the open fraction must sit within 3 sigma of the probability.
        let p = 0.05;
        let (_, window) = generate_year(
            &flat_templates(1.0, 0.0),
            &BTreeSet::new(),
            42,
            &GenerationParams {
                watts_per_person: 100.0,
                airing_probability: p,
                mean_airing_duration_min: 5.0,
            },
        );
        let n = window.values.len() as f64;
        let frac = window.values.iter().sum::<f64>() / n;
        let sigma = (p * (1.0 - p) / n).sqrt();
        assert!((frac - p).abs() < 3.0 * sigma, "{frac} vs {p}");
    }

    #[test]
    fn mean_airing_duration_respected() {
        let (_, window) = generate_year(
            &flat_templates(1.0, 0.0),
            &BTreeSet::new(),
            7,
            &GenerationParams {
                watts_per_person: 100.0,
                airing_probability: 0.02,
                mean_airing_duration_min: 20.0, // 4 slots
            },
        );
        // Average run length of consecutive open slots.
        let mut runs = 0u64;
        let mut open_slots = 0u64;
        let mut in_run = false;
        for v in &window.values {
            if *v > 0.0 {
                open_slots += 1;
                if !in_run {
                    runs += 1;
                    in_run = true;
                }
            } else {
                in_run = false;
            }
        }
        let mean = open_slots as f64 / runs as f64;
        // Concatenated events inflate the estimate slightly; wide bounds.
        assert!((3.0..6.0).contains(&mean), "mean run {mean}");
    }

    #[test]
    fn generation_is_deterministic() {
        let t = flat_templates(1.0, 50.0);
        let h = default_holidays();
        let p = GenerationParams::default();
        let (g1, w1) = generate_year(&t, &h, 99, &p);
        let (g2, w2) = generate_year(&t, &h, 99, &p);
        assert_eq!(g1, g2);
        assert_eq!(w1, w2);
        let (_, w3) = generate_year(&t, &h, 100, &p);
        assert_ne!(w1, w3);
    }

    #[test]
    fn calendar_maps_days_correctly() {
        let h = default_holidays();
        assert_eq!(day_kind(0, &h), DayKind::Holiday); // Jan 1st
        assert_eq!(day_kind(1, &h), DayKind::Workday); // Tuesday
        assert_eq!(day_kind(5, &h), DayKind::Saturday);
        assert_eq!(day_kind(6, &h), DayKind::Sunday);
        assert_eq!(day_kind(7, &h), DayKind::Workday);
        assert_eq!(day_kind(358, &h), DayKind::Holiday); // Dec 25th
    }

    #[test]
    fn workday_daytime_absence_for_single_worker() {
        let templates = archetype_templates("CHR07_Single_with_work").unwrap();
        for hour in 10..16 {
            assert_eq!(templates.workday.occupancy[hour], 0.0, "hour {hour}");
        }
        assert!(templates.workday.occupancy[7] > 0.0);
        assert!(templates.workday.occupancy[19] > 0.0);
    }

    #[test]
    fn window_gate_invariant() {
        // Open windows require someone present and awake in that slot.
        let (_, window) = archetype("CHR27_Family_both_at_work_2_children").unwrap();
        let templates = archetype_templates("CHR27_Family_both_at_work_2_children").unwrap();
        let holidays = default_holidays();
        for (i, v) in window.values.iter().enumerate() {
            if *v == 0.0 {
                continue;
            }
            let day = i / SLOTS_PER_DAY;
            let hour = (i % SLOTS_PER_DAY) / 12;
            let t = templates.for_kind(day_kind(day, &holidays));
            assert!(t.occupancy[hour] > 0.0, "open while empty at slot {i}");
            assert!(!t.asleep(hour as f64), "open while asleep at slot {i}");
        }
    }

    #[test]
    fn retiree_profile_flatter_than_worker() {
        let (worker, _) = archetype("CHR07_Single_with_work").unwrap();
        let (retiree, _) = archetype("CHR16_Couple_over_65_years").unwrap();
        let ratio = |p: &Profile| {
            let mean = p.values.iter().sum::<f64>() / p.values.len() as f64;
            let max = p.values.iter().cloned().fold(0.0, f64::max);
            max / mean
        };
        assert!(ratio(&retiree) < ratio(&worker));
    }

    #[test]
    fn archetype_annual_energies_distinct() {
        let mut annual: Vec<(&str, f64)> = Vec::new();
        for name in ARCHETYPES {
            let (gains, _) = archetype(name).unwrap();
            let joules: f64 = gains.values.iter().map(|w| w * PROFILE_STEP_S).sum();
            assert!(joules > 0.0, "{name}");
            annual.push((name, joules));
        }
        for i in 0..annual.len() {
            for j in (i + 1)..annual.len() {
                let (a, b) = (annual[i].1, annual[j].1);
                assert!(
                    (a - b).abs() / a.max(b) > 1e-3,
                    "{} and {} indistinct",
                    annual[i].0,
                    annual[j].0
                );
            }
        }
    }

    #[test]
    fn unknown_archetype_rejected() {
        assert!(matches!(
            archetype("CHR99_Hermit"),
            Err(ProfileError::UnknownArchetype(_))
        ));
    }

    #[test]
    fn sleep_window_wraps_midnight() {
        let t = DayTemplate {
            occupancy: [1.0; 24],
            device_load_w: [0.0; 24],
            sleep: (23.0, 7.0),
        };
        assert!(t.asleep(23.5));
        assert!(t.asleep(3.0));
        assert!(!t.asleep(7.0));
        assert!(!t.asleep(12.0));
    }

    #[test]
    fn profile_sampling_wraps() {
        let p = Profile {
            step_s: 300.0,
            values: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(p.sample(0.0), 1.0);
        assert_eq!(p.sample(299.0), 1.0);
        assert_eq!(p.sample(300.0), 2.0);
        assert_eq!(p.sample(900.0), 1.0);
        assert_eq!(p.sample(-1.0), 3.0);
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gains.csv");
        let original = Profile {
            step_s: 300.0,
            values: vec![0.0, 120.5, 300.0, 75.25],
        };
        save_profile_csv(&path, &original).unwrap();
        let loaded = load_profile_csv(&path, ProfileKind::Gain).unwrap();
        assert_eq!(original, loaded);
    }

    #[test]
    fn csv_three_rows() {
        let text = "time_s,value\n0,10\n300,20\n600,30\n";
        let p = parse_profile_csv(Cursor::new(text), ProfileKind::Gain).unwrap();
        assert_eq!(p.values, vec![10.0, 20.0, 30.0]);
        assert_eq!(p.step_s, 300.0);
    }

    #[test]
    fn csv_negative_gain_rejected() {
        let text = "time_s,value\n0,10\n300,-5\n";
        assert!(matches!(
            parse_profile_csv(Cursor::new(text), ProfileKind::Gain),
            Err(ProfileError::OutOfRangeValue { line: 3, .. })
        ));
    }

    #[test]
    fn csv_window_fraction_bounds() {
        let text = "time_s,value\n0,0.5\n300,1.5\n";
        assert!(matches!(
            parse_profile_csv(Cursor::new(text), ProfileKind::Window),
            Err(ProfileError::OutOfRangeValue { .. })
        ));
    }

    #[test]
    fn csv_step_jump_rejected() {
        let text = "time_s,value\n0,1\n300,2\n900,3\n";
        assert!(matches!(
            parse_profile_csv(Cursor::new(text), ProfileKind::Gain),
            Err(ProfileError::NonUniformStep { line: 4 })
        ));
    }

    #[test]
    fn csv_bad_rows_rejected() {
        for text in [
            "wrong,header\n0,1\n",
            "time_s,value\nabc,1\n",
            "time_s,value\n0\n",
        ] {
            assert!(matches!(
                parse_profile_csv(Cursor::new(text), ProfileKind::Gain),
                Err(ProfileError::MalformedRow { .. })
            ));
        }
        assert!(matches!(
            parse_profile_csv(Cursor::new("time_s,value\n"), ProfileKind::Gain),
            Err(ProfileError::EmptyProfile)
        ));
    }
}
