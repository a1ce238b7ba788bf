//! Scenario synthesis and labeled dataset generation.
//!
//! A study run covers a number of days at 15-minute resolution (96 slots
//! per day). Solar output follows a seeded synthetic bell per day; loads
//! are scaled to Low/Medium/High; every combination is solved with the AC
//! load flow and labeled. Two datasets come out of this:
//!
//! * the congestion dataset: one row per (day, daylight instant, load
//!   level) with all generators online; features are the bus voltage
//!   magnitudes plus the three solar outputs, the label is whether any
//!   branch is overloaded;
//! * the subset dataset: one row per (day, daylight instant with a
//!   successor, off-pattern); features are the all-on base-state voltages
//!   plus a descriptor of the candidate pattern, the target is the total
//!   dispatch penalty the pattern incurs one step later.
//!
//! Both generators are pure functions of (network, profiles, config):
//! rerunning them yields byte-identical CSV text. Solves are independent
//! and run on the rayon worker pool; results are merged in (day, instant,
//! level/pattern) order.

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{EnergySource, Network};
use crate::powerflow::{
    detect_congestion, injections_at, solve_ac, PowerFlowError, PowerFlowSolution,
};
use crate::subset::{compute_l2, raw_commitment_error, PenaltyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 15-minute sampling.
pub const SAMPLES_PER_DAY: usize = 96;
/// The study grid carries three dispatchable solar units.
pub const SOLAR_UNITS: usize = 3;
/// Newton-Raphson settings used for every scenario solve.
pub const SOLVE_TOL: f64 = 1e-8;
pub const SOLVE_MAX_ITER: usize = 30;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("{0}")]
    Input(String),
}

// ---------------------------------------------------------------------------
// Solar profiles

/// Per-generator time series of active power, MW, one value per 15-minute
/// slot across consecutive days.
#[derive(Debug, Clone, PartialEq)]
pub struct SolarProfile {
    /// Index among the solar units (0-based, network order).
    pub generator: usize,
    pub samples: Vec<f64>,
}

impl SolarProfile {
    pub fn days(&self) -> usize {
        self.samples.len() / SAMPLES_PER_DAY
    }

    pub fn sample(&self, day: usize, slot: usize) -> f64 {
        self.samples[day * SAMPLES_PER_DAY + slot]
    }
}

/// Minutes past midnight for a slot index.
pub fn slot_minutes(slot: usize) -> u32 {
    (slot * 15) as u32
}

/// Synthetic clear-sky bell: zero outside (05:15, 18:45), peaking at noon.
fn bell(slot: usize) -> f64 {
    let d = slot as f64 - 48.0;
    if d.abs() >= 27.0 {
        return 0.0;
    }
    let c = (std::f64::consts::PI * d / 54.0).cos();
    c * c
}

/// Synthesizes `days` days of solar output for each configured unit.
///
/// Each day draws a weather factor in [0.4, 1.0]; daylight samples get a
/// small additive noise term and are clamped to [0, peak]. Night samples
/// are exactly zero. Fully determined by `seed`.
pub fn synth_solar(days: usize, peaks_mw: &[f64], seed: u64) -> Vec<SolarProfile> {
    peaks_mw
        .iter()
        .enumerate()
        .map(|(g, &peak)| {
            let stream = seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(g as u64 + 1);
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            let mut samples = Vec::with_capacity(days * SAMPLES_PER_DAY);
            for _ in 0..days {
                let weather: f64 = rng.gen_range(0.4..=1.0);
                for slot in 0..SAMPLES_PER_DAY {
                    let shape = bell(slot);
                    if shape == 0.0 {
                        samples.push(0.0);
                    } else {
                        let noise: f64 = rng.gen_range(-1.0..=1.0) * 0.02 * peak;
                        samples.push((peak * weather * shape + noise).clamp(0.0, peak));
                    }
                }
            }
            SolarProfile { generator: g, samples }
        })
        .collect()
}

/// Day slots inside the kept daylight window: 06:00 through 18:30, 51
/// instants at 15-minute sampling. Everything later or earlier is
/// discarded as (near-)zero-generation time; the window also keeps the
/// successor of every decision instant strictly inside positive-sun
/// slots, so a unit left on always carries a live commitment.
pub fn daylight_slots() -> Vec<usize> {
    (24..=74).collect()
}

/// Forecast for `horizon_day`: the mean over all prior days of the sample
/// at the same time of day. Needs at least one prior day of history.
pub fn predicted_solar(
    profile: &SolarProfile,
    horizon_day: usize,
) -> Result<Vec<f64>, ScenarioError> {
    if horizon_day == 0 {
        return Err(ScenarioError::Input(
            "prediction needs at least one prior day of history".into(),
        ));
    }
    if horizon_day >= profile.days() {
        return Err(ScenarioError::Input(format!(
            "horizon day {horizon_day} outside profile ({} days)",
            profile.days()
        )));
    }
    let mut out = vec![0.0; SAMPLES_PER_DAY];
    for (slot, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for d in 0..horizon_day {
            acc += profile.sample(d, slot);
        }
        *o = acc / horizon_day as f64;
    }
    Ok(out)
}

/// Per-day forecast profiles aligned with `profiles`.
///
/// For every day in `days` the forecast is the prior-day average; earlier
/// days (history only, never used as dataset rows) carry their actual
/// values so the profile stays rectangular.
pub fn predicted_profiles(
    profiles: &[SolarProfile],
    days: std::ops::Range<usize>,
) -> Result<Vec<SolarProfile>, ScenarioError> {
    profiles
        .iter()
        .map(|p| {
            let mut samples = p.samples[..days.start * SAMPLES_PER_DAY].to_vec();
            for day in days.clone() {
                samples.extend(predicted_solar(p, day)?);
            }
            Ok(SolarProfile { generator: p.generator, samples })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Solar CSV interchange

/// Reads a `timestamp,gen1_mw,gen2_mw,gen3_mw` CSV covering whole days of
/// strict 15-minute samples starting at midnight.
pub fn load_solar_csv(text: &str) -> Result<Vec<SolarProfile>, ScenarioError> {
    use chrono::NaiveDateTime;
    let err = |line: usize, msg: String| ScenarioError::Csv { line, msg };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty file".into()))?;
    if header.trim() != "timestamp,gen1_mw,gen2_mw,gen3_mw" {
        return Err(err(1, format!("unexpected header {header:?}")));
    }
    let mut samples: Vec<[f64; SOLAR_UNITS]> = Vec::new();
    let mut prev: Option<NaiveDateTime> = None;
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 1 + SOLAR_UNITS {
            return Err(err(line_no, format!("expected 4 fields, got {}", fields.len())));
        }
        let stamp = NaiveDateTime::parse_from_str(fields[0], "%Y-%m-%dT%H:%M:%S")
            .map_err(|e| err(line_no, format!("bad timestamp {:?}: {e}", fields[0])))?;
        match prev {
            None => {
                if stamp.time() != chrono::NaiveTime::from_hms_opt(0, 0, 0).unwrap() {
                    return Err(err(line_no, "series must start at midnight".into()));
                }
            }
            Some(p) => {
                if stamp - p != chrono::Duration::minutes(15) {
                    return Err(err(
                        line_no,
                        format!("non-uniform interval: {p} -> {stamp}"),
                    ));
                }
            }
        }
        prev = Some(stamp);
        let mut row = [0.0; SOLAR_UNITS];
        for (k, r) in row.iter_mut().enumerate() {
            let v: f64 = fields[1 + k]
                .trim()
                .parse()
                .map_err(|_| err(line_no, format!("bad number {:?}", fields[1 + k])))?;
            if v < 0.0 {
                return Err(err(line_no, format!("negative power {v}")));
            }
            *r = v;
        }
        samples.push(row);
    }
    if samples.is_empty() || !samples.len().is_multiple_of(SAMPLES_PER_DAY) {
        return Err(ScenarioError::Input(format!(
            "expected whole days of 96 samples, got {} rows",
            samples.len()
        )));
    }
    Ok((0..SOLAR_UNITS)
        .map(|g| SolarProfile {
            generator: g,
            samples: samples.iter().map(|r| r[g]).collect(),
        })
        .collect())
}

/// Canonical CSV text for a set of aligned profiles; inverse of
/// [`load_solar_csv`]. Timestamps start at `start_date` midnight.
pub fn solar_to_csv(profiles: &[SolarProfile], start_date: chrono::NaiveDate) -> String {
    assert_eq!(profiles.len(), SOLAR_UNITS);
    let n = profiles[0].samples.len();
    let mut s = String::from("timestamp,gen1_mw,gen2_mw,gen3_mw\n");
    let start = start_date.and_hms_opt(0, 0, 0).unwrap();
    for i in 0..n {
        let stamp = start + chrono::Duration::minutes(15 * i as i64);
        s.push_str(&stamp.format("%Y-%m-%dT%H:%M:%S").to_string());
        for p in profiles {
            s.push(',');
            s.push_str(&format!("{}", p.samples[i]));
        }
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------------------
// Load levels and subset choices

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevelName {
    Low,
    Medium,
    High,
}

impl LevelName {
    pub fn as_str(self) -> &'static str {
        match self {
            LevelName::Low => "low",
            LevelName::Medium => "medium",
            LevelName::High => "high",
        }
    }
}

/// A system loading level: every load's base P and Q scaled by `scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadLevel {
    pub name: LevelName,
    pub scale: f64,
}

/// The study's three loading levels.
pub fn default_levels() -> [LoadLevel; 3] {
    [
        LoadLevel { name: LevelName::Low, scale: 0.7 },
        LoadLevel { name: LevelName::Medium, scale: 1.0 },
        LoadLevel { name: LevelName::High, scale: 1.3 },
    ]
}

/// Which of the three solar units a candidate pattern switches off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsetChoice {
    pub off: [bool; SOLAR_UNITS],
}

impl SubsetChoice {
    pub const ALL_ON: SubsetChoice = SubsetChoice { off: [false; SOLAR_UNITS] };

    pub fn off_count(&self) -> usize {
        self.off.iter().filter(|&&o| o).count()
    }

    /// Stable display label, e.g. `all-on`, `off:1`, `off:1+3`.
    pub fn label(&self) -> String {
        if self.off_count() == 0 {
            return "all-on".into();
        }
        let ids: Vec<String> = self
            .off
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(|(k, _)| (k + 1).to_string())
            .collect();
        format!("off:{}", ids.join("+"))
    }
}

/// The seven candidate off-patterns, in study order: each single unit,
/// the pairs 1+2, 2+3, 1+3, then all three.
pub fn subset_combinations() -> Vec<SubsetChoice> {
    [
        [true, false, false],
        [false, true, false],
        [false, false, true],
        [true, true, false],
        [false, true, true],
        [true, false, true],
        [true, true, true],
    ]
    .into_iter()
    .map(|off| SubsetChoice { off })
    .collect()
}

// ---------------------------------------------------------------------------
// Scenario solving

/// Buses hosting solar units, in network order.
pub fn solar_buses(net: &Network) -> Vec<usize> {
    net.generators
        .iter()
        .filter(|g| g.source == EnergySource::Solar)
        .map(|g| g.bus)
        .collect()
}

/// One archived load-flow result.
#[derive(Debug, Clone)]
pub struct SolveRecord {
    pub day: usize,
    pub slot: usize,
    pub level: LevelName,
    /// `None` for all-on states (congestion rows, subset base states).
    pub choice: Option<SubsetChoice>,
    pub solution: PowerFlowSolution,
}

/// Solves one operating point: solar setpoints applied (off units
/// dropped), loads scaled. Never panics on solver trouble; a singular
/// Jacobian surfaces as the non-converged last iterate.
fn solve_scenario(
    net: &Network,
    buses: &[usize],
    solar_mw: &[f64],
    choice: SubsetChoice,
    scale: f64,
) -> PowerFlowSolution {
    let mut scen = net.clone();
    for (k, &bus) in buses.iter().enumerate() {
        for g in scen.generators.iter_mut().filter(|g| g.bus == bus) {
            if choice.off[k] {
                g.online = false;
            } else {
                g.p_set_mw = solar_mw[k];
            }
        }
    }
    let inj = injections_at(&scen, scale);
    match solve_ac(&scen, &inj, SOLVE_TOL, SOLVE_MAX_ITER) {
        Ok(sol) => sol,
        Err(PowerFlowError::SingularJacobian { last, .. }) => *last,
        Err(PowerFlowError::Grid(e)) => panic!("scenario network invalid: {e}"),
    }
}

// ---------------------------------------------------------------------------
// Congestion dataset

/// One labeled operating point with every generator online.
#[derive(Debug, Clone, PartialEq)]
pub struct CongestionRow {
    /// Voltage magnitude at every bus, p.u.
    pub voltages: Vec<f64>,
    /// Actual output of the three solar units, MW.
    pub solar_mw: [f64; SOLAR_UNITS],
    pub congested: bool,
}

#[derive(Debug)]
pub struct CongestionOutcome {
    pub rows: Vec<CongestionRow>,
    /// One record per solve, aligned with `rows`.
    pub records: Vec<SolveRecord>,
}

/// Generates the congestion dataset over `days` (profile day indices),
/// one row per (day, daylight instant, level), in that order.
pub fn gen_congestion_dataset(
    net: &Network,
    profiles: &[SolarProfile],
    levels: &[LoadLevel],
    days: std::ops::Range<usize>,
    threshold: f64,
) -> Result<CongestionOutcome, ScenarioError> {
    check_profiles(net, profiles, days.end)?;
    let buses = solar_buses(net);
    let slots = daylight_slots();
    let mut plan = Vec::new();
    for day in days {
        for &slot in &slots {
            for &level in levels {
                plan.push((day, slot, level));
            }
        }
    }
    let solved: Vec<(CongestionRow, SolveRecord)> = plan
        .par_iter()
        .map(|&(day, slot, level)| {
            let solar: Vec<f64> = profiles.iter().map(|p| p.sample(day, slot)).collect();
            let sol = solve_scenario(net, &buses, &solar, SubsetChoice::ALL_ON, level.scale);
            let congested = detect_congestion(net, &sol, threshold).congested;
            let row = CongestionRow {
                voltages: sol.voltage_mag.clone(),
                solar_mw: [solar[0], solar[1], solar[2]],
                congested,
            };
            let record = SolveRecord {
                day,
                slot,
                level: level.name,
                choice: None,
                solution: sol,
            };
            (row, record)
        })
        .collect();
    let (rows, records) = solved.into_iter().unzip();
    Ok(CongestionOutcome { rows, records })
}

fn check_profiles(
    net: &Network,
    profiles: &[SolarProfile],
    days_end: usize,
) -> Result<(), ScenarioError> {
    let buses = solar_buses(net);
    if buses.len() != SOLAR_UNITS {
        return Err(ScenarioError::Input(format!(
            "network has {} solar units, expected {SOLAR_UNITS}",
            buses.len()
        )));
    }
    if profiles.len() != SOLAR_UNITS {
        return Err(ScenarioError::Input(format!(
            "{} profiles for {SOLAR_UNITS} solar units",
            profiles.len()
        )));
    }
    for p in profiles {
        if p.days() < days_end {
            return Err(ScenarioError::Input(format!(
                "profile covers {} days, need {days_end}",
                p.days()
            )));
        }
        if p.samples.iter().any(|&s| s < 0.0) {
            return Err(ScenarioError::Input("negative solar sample".into()));
        }
    }
    Ok(())
}

/// Serializes congestion rows as `v1..v20,solar1,solar2,solar3,label`.
pub fn congestion_to_csv(rows: &[CongestionRow]) -> String {
    let n = rows.first().map_or(20, |r| r.voltages.len());
    let mut s = String::new();
    for i in 1..=n {
        s.push_str(&format!("v{i},"));
    }
    s.push_str("solar1,solar2,solar3,label\n");
    for r in rows {
        for v in &r.voltages {
            s.push_str(&format!("{v},"));
        }
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.solar_mw[0], r.solar_mw[1], r.solar_mw[2], r.congested as u8
        ));
    }
    s
}

/// Parses the CSV form produced by [`congestion_to_csv`].
pub fn congestion_from_csv(text: &str) -> Result<Vec<CongestionRow>, ScenarioError> {
    let err = |line: usize, msg: String| ScenarioError::Csv { line, msg };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 5 || cols[cols.len() - 1] != "label" {
        return Err(err(1, "expected v1..vN,solar1,solar2,solar3,label header".into()));
    }
    let n = cols.len() - 4;
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(err(idx + 1, format!("expected {} fields", cols.len())));
        }
        let parse = |s: &str| -> Result<f64, ScenarioError> {
            s.parse().map_err(|_| err(idx + 1, format!("bad number {s:?}")))
        };
        let voltages = fields[..n].iter().map(|s| parse(s)).collect::<Result<_, _>>()?;
        let solar_mw = [
            parse(fields[n])?,
            parse(fields[n + 1])?,
            parse(fields[n + 2])?,
        ];
        let congested = match fields[n + 3] {
            "0" => false,
            "1" => true,
            other => return Err(err(idx + 1, format!("bad label {other:?}"))),
        };
        rows.push(CongestionRow { voltages, solar_mw, congested });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Subset dataset

/// One candidate-pattern outcome one step after a base state.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetRow {
    /// All-on base-state voltage magnitudes at decision time, p.u.
    pub voltages: Vec<f64>,
    /// Predicted MW per unit, zeroed for the units the pattern turns off.
    pub descriptor: [f64; SOLAR_UNITS],
    /// Total penalty the pattern incurred: scaled L1 plus L2.
    pub target: f64,
}

#[derive(Debug)]
pub struct SubsetOutcome {
    pub rows: Vec<SubsetRow>,
    pub records: Vec<SolveRecord>,
    /// The L1 multiplier actually applied (calibrated unless fixed).
    pub l1_scale: f64,
}

/// Generates the subset dataset for one loading level over `days`.
///
/// For each daylight instant t with a successor t+1 in the same day's
/// window, the all-on base state at t is solved once, then every
/// off-pattern is solved at the actual t+1 solar output. The row target is
/// `l1_scale * sum_on |predicted - actual| + L2`.
///
/// With `l1_scale` unset, the multiplier is calibrated on this dataset so
/// the mean scaled L1 lands at half the congestion charge, putting both
/// penalty components on the same scale.
#[allow(clippy::too_many_arguments)] // one run really has eight independent knobs
pub fn gen_subset_dataset(
    net: &Network,
    profiles: &[SolarProfile],
    predicted: &[SolarProfile],
    level: LoadLevel,
    days: std::ops::Range<usize>,
    l1_scale: Option<f64>,
    l2_penalty: f64,
    threshold: f64,
) -> Result<SubsetOutcome, ScenarioError> {
    check_profiles(net, profiles, days.end)?;
    check_profiles(net, predicted, days.end)?;
    let buses = solar_buses(net);
    let slots = daylight_slots();
    let pair_slots = &slots[..slots.len() - 1]; // t+1 must stay in the window
    let choices = subset_combinations();

    let plan: Vec<(usize, usize)> = days
        .flat_map(|day| pair_slots.iter().map(move |&slot| (day, slot)))
        .collect();

    struct RawRow {
        voltages: Vec<f64>,
        descriptor: [f64; SOLAR_UNITS],
        raw_l1: f64,
        congested: bool,
    }

    let solved: Vec<(Vec<RawRow>, Vec<SolveRecord>)> = plan
        .par_iter()
        .map(|&(day, slot)| {
            let now: Vec<f64> = profiles.iter().map(|p| p.sample(day, slot)).collect();
            let next: Vec<f64> = profiles.iter().map(|p| p.sample(day, slot + 1)).collect();
            let pred: Vec<f64> = predicted.iter().map(|p| p.sample(day, slot + 1)).collect();

            let base = solve_scenario(net, &buses, &now, SubsetChoice::ALL_ON, level.scale);
            let base_voltages = base.voltage_mag.clone();
            let mut records = vec![SolveRecord {
                day,
                slot,
                level: level.name,
                choice: None,
                solution: base,
            }];
            let mut rows = Vec::with_capacity(choices.len());
            for &choice in &choices {
                let sol = solve_scenario(net, &buses, &next, choice, level.scale);
                let congested = detect_congestion(net, &sol, threshold).congested;
                let mut descriptor = [0.0; SOLAR_UNITS];
                for k in 0..SOLAR_UNITS {
                    if !choice.off[k] {
                        descriptor[k] = pred[k];
                    }
                }
                rows.push(RawRow {
                    voltages: base_voltages.clone(),
                    descriptor,
                    raw_l1: raw_commitment_error(&pred, &next, &choice),
                    congested,
                });
                records.push(SolveRecord {
                    day,
                    slot,
                    level: level.name,
                    choice: Some(choice),
                    solution: sol,
                });
            }
            (rows, records)
        })
        .collect();

    let mut raw_rows = Vec::new();
    let mut records = Vec::new();
    for (rr, rec) in solved {
        raw_rows.extend(rr);
        records.extend(rec);
    }

    let cfg_scale = PenaltyConfig { l2_penalty, l1_scale: 1.0 };
    let scale = match l1_scale {
        Some(s) => s,
        None => calibrate_l1_scale(
            raw_rows.iter().map(|r| (r.raw_l1, r.congested)),
            cfg_scale.l2_penalty,
        ),
    };

    let rows = raw_rows
        .into_iter()
        .map(|r| {
            let l2 = compute_l2(
                &crate::powerflow::CongestionReport {
                    congested: r.congested,
                    overloaded_branches: vec![],
                },
                &cfg_scale,
            );
            SubsetRow {
                voltages: r.voltages,
                descriptor: r.descriptor,
                target: scale * r.raw_l1 + l2,
            }
        })
        .collect();
    Ok(SubsetOutcome { rows, records, l1_scale: scale })
}

/// Multiplier that puts the mean scaled L1 at half the congestion charge:
/// `scale * mean(raw L1) = mean(L2 over congested rows) / 2`. Falls back
/// to 1.0 when the dataset has no congested row or no commitment error.
pub fn calibrate_l1_scale(
    rows: impl Iterator<Item = (f64, bool)>,
    l2_penalty: f64,
) -> f64 {
    let mut l1_sum = 0.0;
    let mut count = 0usize;
    let mut congested = 0usize;
    for (raw_l1, c) in rows {
        l1_sum += raw_l1;
        count += 1;
        if c {
            congested += 1;
        }
    }
    if count == 0 || l1_sum == 0.0 || congested == 0 {
        return 1.0;
    }
    let mean_l1 = l1_sum / count as f64;
    (l2_penalty / 2.0) / mean_l1
}

/// Serializes subset rows as `v1..v20,d1,d2,d3,target`.
pub fn subset_to_csv(rows: &[SubsetRow]) -> String {
    let n = rows.first().map_or(20, |r| r.voltages.len());
    let mut s = String::new();
    for i in 1..=n {
        s.push_str(&format!("v{i},"));
    }
    s.push_str("d1,d2,d3,target\n");
    for r in rows {
        for v in &r.voltages {
            s.push_str(&format!("{v},"));
        }
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.descriptor[0], r.descriptor[1], r.descriptor[2], r.target
        ));
    }
    s
}

/// Parses the CSV form produced by [`subset_to_csv`].
pub fn subset_from_csv(text: &str) -> Result<Vec<SubsetRow>, ScenarioError> {
    let err = |line: usize, msg: String| ScenarioError::Csv { line, msg };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 5 || cols[cols.len() - 1] != "target" {
        return Err(err(1, "expected v1..vN,d1,d2,d3,target header".into()));
    }
    let n = cols.len() - 4;
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(err(idx + 1, format!("expected {} fields", cols.len())));
        }
        let parse = |s: &str| -> Result<f64, ScenarioError> {
            s.parse().map_err(|_| err(idx + 1, format!("bad number {s:?}")))
        };
        let voltages = fields[..n].iter().map(|s| parse(s)).collect::<Result<_, _>>()?;
        rows.push(SubsetRow {
            voltages,
            descriptor: [parse(fields[n])?, parse(fields[n + 1])?, parse(fields[n + 2])?],
            target: parse(fields[n + 3])?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Raw solution archive

/// Line-delimited structured text, one record per solve: identifiers,
/// convergence info, then full magnitudes, angles and branch flows.
pub fn records_to_text(records: &[SolveRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let choice = r.choice.map_or("base".to_string(), |c| c.label());
        let join = |v: &[f64]| {
            v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
        };
        s.push_str(&format!(
            "day={} slot={} level={} pattern={} converged={} iterations={} vm=[{}] va=[{}] flow_mva=[{}]\n",
            r.day,
            r.slot,
            r.level.as_str(),
            choice,
            r.solution.converged as u8,
            r.solution.iterations,
            join(&r.solution.voltage_mag),
            join(&r.solution.voltage_ang),
            join(&r.solution.branch_flow_mva),
        ));
    }
    s
}
