//! Command-line front end.
//!
//! Subcommands cover the full pipeline: `grid validate` checks a grid
//! file, `gen-data` writes every dataset, `train` and `eval` handle the
//! three models, `select` picks a subset pattern for one operating
//! point (optionally priced against the solved ground truth), and
//! `plot` renders training curves. All artifacts live in one output
//! directory and every run is reproducible from the config seed.

mod config;
mod plot;

pub use config::{parse_config, RunConfig, SolarSource};
pub use plot::render_curve_svg;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::congestion::{
    eval_congestion_model, swap_to_predicted, train_congestion_nn, train_congestion_svm,
    ClassifierConfig,
};
use crate::grid::{load_network, Network};
use crate::ml::{load_model, save_model, LossKind, ModelFile};
use crate::powerflow::{injections_at, solve_ac, PowerFlowError, PowerFlowSolution};
use crate::scenario::{
    congestion_from_csv, congestion_to_csv, daylight_slots, gen_congestion_dataset,
    gen_subset_dataset, load_solar_csv, predicted_profiles, records_to_text, slot_minutes,
    solar_buses, solar_to_csv, subset_combinations, subset_from_csv, subset_to_csv,
    synth_solar, CongestionRow, LevelName, SolarProfile, SubsetChoice, SubsetRow,
    SAMPLES_PER_DAY, SOLAR_UNITS, SOLVE_MAX_ITER, SOLVE_TOL,
};
use crate::subset::{
    best_candidate, eval_penalty_regressor, oracle_select, score_candidates,
    train_penalty_regressor, PenaltyConfig,
};
use crate::{sha256_hex, TOOL_VERSION};

/// Failure modes with distinct exit codes: bad input exits 1, a broken
/// invariant on our side exits 2.
#[derive(Debug)]
pub enum CliError {
    User(String),
    Internal(String),
}

/// Runs the tool on the given argv and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(CliError::User(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            2
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gridsel",
    version = TOOL_VERSION,
    about = "Grid scenario datasets, congestion models, and solar-subset selection"
)]
struct Cli {
    /// Configuration file; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override the run seed (solar synthesis and all training).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the artifact directory.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Worker threads for scenario generation (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Grid-file utilities.
    Grid {
        #[command(subcommand)]
        action: GridAction,
    },
    /// Generate the solar traces and every dataset.
    GenData,
    /// Train a model on a generated dataset.
    Train {
        #[arg(long, value_enum)]
        which: TrainTask,
    },
    /// Re-score a stored model, or measure the forecast-feature drop.
    Eval {
        #[arg(long, value_enum)]
        which: EvalTask,
    },
    /// Pick the cheapest subset pattern for one operating point.
    Select(SelectArgs),
    /// Render a training-curve CSV as a self-contained SVG.
    Plot {
        #[arg(long, value_name = "CSV")]
        curve: PathBuf,
        #[arg(long, value_name = "SVG")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum GridAction {
    /// Parse a grid file and check every structural invariant.
    Validate {
        /// Grid file; the configured grid when omitted.
        path: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TrainTask {
    CongestionNn,
    CongestionSvm,
    Subset,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalTask {
    CongestionNn,
    CongestionSvm,
    Subset,
    PredictedNn,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Low,
    Medium,
    High,
}

impl From<LevelArg> for LevelName {
    fn from(a: LevelArg) -> LevelName {
        match a {
            LevelArg::Low => LevelName::Low,
            LevelArg::Medium => LevelName::Medium,
            LevelArg::High => LevelName::High,
        }
    }
}

#[derive(Args)]
struct SelectArgs {
    /// Trained penalty model (default: <out_dir>/subset.model).
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Profile day of the decision instant (day 0 is burn-in).
    #[arg(long)]
    day: usize,
    /// Quarter-hour slot 0..=94 of the decision instant.
    #[arg(long, required_unless_present = "sweep", conflicts_with = "sweep")]
    slot: Option<usize>,
    /// Loading level.
    #[arg(long, value_enum, default_value_t = LevelArg::High)]
    level: LevelArg,
    /// Also price every candidate against the solved ground truth.
    #[arg(long)]
    oracle: bool,
    /// Walk N daylight instants starting at --day and summarize regret.
    #[arg(long, value_name = "N")]
    sweep: Option<usize>,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::User(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text)
                .map_err(|e| CliError::User(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.sync_seeds();
    }
    if let Some(dir) = cli.out_dir {
        cfg.out_dir = dir;
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::User("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Grid { action: GridAction::Validate { path } } => {
            cmd_grid_validate(&cfg, path.as_deref())
        }
        Command::GenData => cmd_gen_data(&cfg),
        Command::Train { which } => cmd_train(&cfg, which),
        Command::Eval { which } => cmd_eval(&cfg, which),
        Command::Select(args) => cmd_select(&cfg, &args),
        Command::Plot { curve, out } => cmd_plot(&curve, &out),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing

fn user(e: impl std::fmt::Display) -> CliError {
    CliError::User(e.to_string())
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

fn load_grid(cfg: &RunConfig) -> Result<Network, CliError> {
    load_network(&cfg.grid)
        .map_err(|e| CliError::User(format!("{}: {e}", cfg.grid.display())))
}

fn load_profiles(cfg: &RunConfig, total_days: usize) -> Result<Vec<SolarProfile>, CliError> {
    match &cfg.solar {
        SolarSource::Synthetic { peaks_mw } => Ok(synth_solar(total_days, peaks_mw, cfg.seed)),
        SolarSource::Csv(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::User(format!("cannot read {}: {e}", path.display())))?;
            let mut profiles = load_solar_csv(&text)
                .map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
            let have = profiles.first().map(|p| p.days()).unwrap_or(0);
            if have < total_days {
                return Err(CliError::User(format!(
                    "{}: trace covers {have} days, the run needs {total_days} \
                     (the first day is burn-in for the forecasts)",
                    path.display()
                )));
            }
            for p in &mut profiles {
                p.samples.truncate(total_days * SAMPLES_PER_DAY);
            }
            Ok(profiles)
        }
    }
}

fn write_artifact(cfg: &RunConfig, name: &str, text: &str) -> Result<(), CliError> {
    let path = cfg.out_dir.join(name);
    fs::write(&path, text)
        .map_err(|e| CliError::User(format!("cannot write {}: {e}", path.display())))
}

fn read_artifact(path: &Path, hint: &str) -> Result<String, CliError> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(CliError::User(format!("{} not found; {hint}", path.display())))
        }
        Err(e) => Err(CliError::User(format!("cannot read {}: {e}", path.display()))),
    }
}

fn read_congestion_rows(cfg: &RunConfig, name: &str) -> Result<Vec<CongestionRow>, CliError> {
    let path = cfg.out_dir.join(name);
    let text = read_artifact(&path, "run `gridsel gen-data` first")?;
    congestion_from_csv(&text).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

fn read_subset_rows(cfg: &RunConfig, name: &str) -> Result<Vec<SubsetRow>, CliError> {
    let path = cfg.out_dir.join(name);
    let text = read_artifact(&path, "run `gridsel gen-data` first")?;
    subset_from_csv(&text).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

fn read_model(cfg: &RunConfig, name: &str) -> Result<ModelFile, CliError> {
    let path = cfg.out_dir.join(name);
    if !path.exists() {
        return Err(CliError::User(format!(
            "{} not found; run `gridsel train` first",
            path.display()
        )));
    }
    load_model(&path).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

fn report_value(text: &str, key: &str) -> Option<f64> {
    let prefix = format!("{key}=");
    text.lines().find_map(|l| l.strip_prefix(&prefix).and_then(|v| v.trim().parse().ok()))
}

fn fmt_time(slot: usize) -> String {
    let m = slot_minutes(slot);
    format!("{:02}:{:02}", m / 60, m % 60)
}

/// All-on base state at the decision instant; a non-converged solve
/// still yields its last iterate, matching dataset generation.
fn base_solution(
    net: &Network,
    buses: &[usize],
    solar_now: &[f64],
    scale: f64,
) -> Result<PowerFlowSolution, CliError> {
    let mut scen = net.clone();
    for (k, &bus) in buses.iter().enumerate() {
        for g in scen.generators.iter_mut().filter(|g| g.bus == bus) {
            g.p_set_mw = solar_now[k];
        }
    }
    let inj = injections_at(&scen, scale);
    match solve_ac(&scen, &inj, SOLVE_TOL, SOLVE_MAX_ITER) {
        Ok(sol) => Ok(sol),
        Err(PowerFlowError::SingularJacobian { last, .. }) => Ok(*last),
        Err(PowerFlowError::Grid(e)) => Err(internal(format!("base state: {e}"))),
    }
}

// ---------------------------------------------------------------------------
// grid validate

fn cmd_grid_validate(cfg: &RunConfig, path: Option<&Path>) -> Result<(), CliError> {
    let path = path.unwrap_or(&cfg.grid);
    let net = load_network(path)
        .map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
    println!(
        "{} buses, {} generators, {} loads, {} tie-lines",
        net.buses.len(),
        net.generators.len(),
        net.loads.len(),
        net.tie_lines().len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// gen-data

fn cmd_gen_data(cfg: &RunConfig) -> Result<(), CliError> {
    let net = load_grid(cfg)?;
    let total_days = cfg.days + 1;
    let profiles = load_profiles(cfg, total_days)?;
    let predicted = predicted_profiles(&profiles, 1..total_days).map_err(internal)?;

    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::User(format!("cannot create {}: {e}", cfg.out_dir.display())))?;

    let start = chrono::NaiveDate::from_ymd_opt(2024, 6, 1).expect("valid date");
    let solar_csv = solar_to_csv(&profiles, start);
    write_artifact(cfg, "solar.csv", &solar_csv)?;
    println!("solar.csv: {total_days} days, {} units", profiles.len());

    let congestion =
        gen_congestion_dataset(&net, &profiles, &cfg.levels, 1..total_days, cfg.threshold)
            .map_err(internal)?;
    let congestion_csv = congestion_to_csv(&congestion.rows);
    write_artifact(cfg, "congestion.csv", &congestion_csv)?;
    write_artifact(cfg, "records_congestion.txt", &records_to_text(&congestion.records))?;
    let positives = congestion.rows.iter().filter(|r| r.congested).count();
    println!("congestion.csv: {} rows, {positives} congested", congestion.rows.len());

    let swapped = swap_to_predicted(&congestion.rows, &congestion.records, &predicted);
    let predicted_csv = congestion_to_csv(&swapped);
    write_artifact(cfg, "congestion_predicted.csv", &predicted_csv)?;
    println!("congestion_predicted.csv: {} rows", swapped.len());

    // High first: it calibrates the L1 multiplier the other levels reuse,
    // so one multiplier prices all three datasets.
    let high = gen_subset_dataset(
        &net,
        &profiles,
        &predicted,
        cfg.level(LevelName::High),
        1..total_days,
        cfg.l1_scale,
        cfg.l2_penalty,
        cfg.threshold,
    )
    .map_err(internal)?;
    let scale = high.l1_scale;
    let low = gen_subset_dataset(
        &net,
        &profiles,
        &predicted,
        cfg.level(LevelName::Low),
        1..total_days,
        Some(scale),
        cfg.l2_penalty,
        cfg.threshold,
    )
    .map_err(internal)?;
    let medium = gen_subset_dataset(
        &net,
        &profiles,
        &predicted,
        cfg.level(LevelName::Medium),
        1..total_days,
        Some(scale),
        cfg.l2_penalty,
        cfg.threshold,
    )
    .map_err(internal)?;

    let mut meta = String::new();
    let _ = writeln!(meta, "tool_version={TOOL_VERSION}");
    let _ = writeln!(meta, "seed={}", cfg.seed);
    let _ = writeln!(meta, "days={}", cfg.days);
    let _ = writeln!(meta, "grid={}", cfg.grid.display());
    let grid_bytes = fs::read(&cfg.grid)
        .map_err(|e| CliError::User(format!("cannot read {}: {e}", cfg.grid.display())))?;
    let _ = writeln!(meta, "grid_sha256={}", sha256_hex(&grid_bytes));
    let _ = writeln!(meta, "threshold={}", cfg.threshold);
    let _ = writeln!(
        meta,
        "levels={}",
        cfg.levels
            .iter()
            .map(|l| format!("{}:{}", l.name.as_str(), l.scale))
            .collect::<Vec<_>>()
            .join(",")
    );
    let _ = writeln!(meta, "l2_penalty={}", cfg.l2_penalty);
    let _ = writeln!(meta, "l1_scale={scale}");
    let _ = writeln!(
        meta,
        "l1_scale_source={}",
        if cfg.l1_scale.is_some() { "fixed" } else { "calibrated" }
    );
    let _ = writeln!(
        meta,
        "solar_source={}",
        match &cfg.solar {
            SolarSource::Synthetic { .. } => "synthetic".to_string(),
            SolarSource::Csv(path) => path.display().to_string(),
        }
    );
    let _ = writeln!(meta, "solar_sha256={}", sha256_hex(solar_csv.as_bytes()));
    let _ = writeln!(meta, "congestion_rows={}", congestion.rows.len());
    let _ = writeln!(meta, "congestion_sha256={}", sha256_hex(congestion_csv.as_bytes()));
    let _ = writeln!(meta, "congestion_predicted_rows={}", swapped.len());
    let _ = writeln!(
        meta,
        "congestion_predicted_sha256={}",
        sha256_hex(predicted_csv.as_bytes())
    );
    for (name, out) in [("low", &low), ("medium", &medium), ("high", &high)] {
        let csv = subset_to_csv(&out.rows);
        write_artifact(cfg, &format!("subset_{name}.csv"), &csv)?;
        write_artifact(
            cfg,
            &format!("records_subset_{name}.txt"),
            &records_to_text(&out.records),
        )?;
        println!("subset_{name}.csv: {} rows", out.rows.len());
        let _ = writeln!(meta, "subset_{name}_rows={}", out.rows.len());
        let _ = writeln!(meta, "subset_{name}_sha256={}", sha256_hex(csv.as_bytes()));
    }
    write_artifact(cfg, "metadata.txt", &meta)?;
    println!("l1_scale={scale}");
    println!("metadata.txt written to {}", cfg.out_dir.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// train

fn store_model(
    cfg: &RunConfig,
    stem: &str,
    model: &ModelFile,
    report: &str,
    curve: Option<&str>,
) -> Result<(), CliError> {
    let model_path = cfg.out_dir.join(format!("{stem}.model"));
    save_model(&model_path, model)
        .map_err(|e| CliError::User(format!("cannot write {}: {e}", model_path.display())))?;
    write_artifact(cfg, &format!("{stem}_report.txt"), report)?;
    if let Some(curve) = curve {
        let stamped = format!("# tool_version={TOOL_VERSION} seed={}\n{curve}", cfg.seed);
        write_artifact(cfg, &format!("{stem}_curve.csv"), &stamped)?;
    }
    println!("wrote {}", model_path.display());
    Ok(())
}

fn cmd_train(cfg: &RunConfig, which: TrainTask) -> Result<(), CliError> {
    match which {
        TrainTask::CongestionNn => {
            let rows = read_congestion_rows(cfg, "congestion.csv")?;
            let out = train_congestion_nn(&rows, &cfg.congestion).map_err(user)?;
            store_model(cfg, "congestion_nn", &out.model, &out.report, Some(&out.curve))?;
            print!("{}", out.report);
        }
        TrainTask::CongestionSvm => {
            let rows = read_congestion_rows(cfg, "congestion.csv")?;
            let out = train_congestion_svm(&rows, &cfg.congestion).map_err(user)?;
            store_model(cfg, "congestion_svm", &out.model, &out.report, None)?;
            print!("{}", out.report);
        }
        TrainTask::Subset => {
            let name = format!("subset_{}.csv", cfg.subset_level.as_str());
            let rows = read_subset_rows(cfg, &name)?;
            let out = train_penalty_regressor(&rows, &cfg.subset).map_err(user)?;
            store_model(cfg, "subset", &out.model, &out.report, Some(&out.curve))?;
            print!("{}", out.report);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// eval

fn eval_classifier(
    cfg: &RunConfig,
    stem: &str,
    dataset: &str,
    ccfg: &ClassifierConfig,
) -> Result<(), CliError> {
    let rows = read_congestion_rows(cfg, dataset)?;
    let model = read_model(cfg, &format!("{stem}.model"))?;
    let s = eval_congestion_model(&model, &rows, ccfg).map_err(user)?;
    println!("task=eval-{}", stem.replace('_', "-"));
    println!("rows={}", rows.len());
    println!("train_accuracy={}", s.train_accuracy);
    println!("test_accuracy={}", s.test_accuracy);
    println!("test_true_pos={}", s.confusion.true_pos);
    println!("test_false_pos={}", s.confusion.false_pos);
    println!("test_true_neg={}", s.confusion.true_neg);
    println!("test_false_neg={}", s.confusion.false_neg);
    Ok(())
}

fn cmd_eval(cfg: &RunConfig, which: EvalTask) -> Result<(), CliError> {
    match which {
        EvalTask::CongestionNn => eval_classifier(cfg, "congestion_nn", "congestion.csv", &cfg.congestion),
        EvalTask::CongestionSvm => {
            eval_classifier(cfg, "congestion_svm", "congestion.csv", &cfg.congestion)
        }
        EvalTask::Subset => {
            let name = format!("subset_{}.csv", cfg.subset_level.as_str());
            let rows = read_subset_rows(cfg, &name)?;
            let model = read_model(cfg, "subset.model")?;
            let ev = eval_penalty_regressor(&model, &rows, &cfg.subset).map_err(user)?;
            println!("task=eval-subset");
            println!("rows={}", rows.len());
            println!("train_mse={}", ev.train_mse);
            println!("test_mse={}", ev.test_mse);
            println!("baseline_mse={}", ev.baseline_mse);
            println!(
                "improvement_over_baseline_pct={}",
                100.0 * (1.0 - ev.test_mse / ev.baseline_mse)
            );
            Ok(())
        }
        EvalTask::PredictedNn => {
            let rows = read_congestion_rows(cfg, "congestion_predicted.csv")?;
            let out = train_congestion_nn(&rows, &cfg.predicted_config()).map_err(user)?;
            let report_path = cfg.out_dir.join("congestion_nn_report.txt");
            let text = read_artifact(
                &report_path,
                "run `gridsel train --which congestion-nn` first",
            )?;
            let actual = report_value(&text, "test_accuracy").ok_or_else(|| {
                CliError::User(format!("{}: no test_accuracy entry", report_path.display()))
            })?;
            println!("task=eval-predicted-nn");
            println!("rows={}", rows.len());
            println!("predicted_test_accuracy={}", out.test_accuracy);
            println!("actual_test_accuracy={actual}");
            println!("accuracy_drop={}", actual - out.test_accuracy);
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// select

/// The configured multiplier, or the one gen-data calibrated.
fn resolve_l1_scale(cfg: &RunConfig) -> Result<f64, CliError> {
    if let Some(scale) = cfg.l1_scale {
        return Ok(scale);
    }
    let path = cfg.out_dir.join("metadata.txt");
    let text = read_artifact(
        &path,
        "the multiplier is calibrated by `gridsel gen-data`; run it first or set \
         [penalty] l1_scale",
    )?;
    report_value(&text, "l1_scale")
        .ok_or_else(|| CliError::User(format!("{}: no l1_scale entry", path.display())))
}

struct SelectSetup {
    net: Network,
    buses: Vec<usize>,
    profiles: Vec<SolarProfile>,
    predicted: Vec<SolarProfile>,
    model: ModelFile,
    candidates: Vec<SubsetChoice>,
}

fn select_setup(cfg: &RunConfig, args: &SelectArgs) -> Result<SelectSetup, CliError> {
    let net = load_grid(cfg)?;
    let total_days = cfg.days + 1;
    let profiles = load_profiles(cfg, total_days)?;
    let predicted = predicted_profiles(&profiles, 1..total_days).map_err(internal)?;
    let model_path =
        args.model.clone().unwrap_or_else(|| cfg.out_dir.join("subset.model"));
    let model = read_model_path(&model_path)?;
    if model.kind != LossKind::SquaredError {
        return Err(CliError::User(format!(
            "{}: not a penalty regressor",
            model_path.display()
        )));
    }
    let want = net.buses.len() + SOLAR_UNITS;
    if model.mlp.input_dim() != want {
        return Err(CliError::User(format!(
            "{}: model takes {} inputs, this grid produces {want}",
            model_path.display(),
            model.mlp.input_dim()
        )));
    }
    if args.day == 0 || args.day >= total_days {
        return Err(CliError::User(format!("--day must be in 1..={}", cfg.days)));
    }
    let mut candidates = vec![SubsetChoice::ALL_ON];
    candidates.extend(subset_combinations());
    let buses = solar_buses(&net);
    Ok(SelectSetup { net, buses, profiles, predicted, model, candidates })
}

fn read_model_path(path: &Path) -> Result<ModelFile, CliError> {
    if !path.exists() {
        return Err(CliError::User(format!(
            "{} not found; run `gridsel train --which subset` first",
            path.display()
        )));
    }
    load_model(path).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

/// One scored instant: the candidate table, the pick, and the next-slot
/// solar outputs needed to price it.
struct InstantScores {
    scored: Vec<crate::subset::CandidateScore>,
    best: usize,
    actual_next: Vec<f64>,
    pred_next: Vec<f64>,
}

fn score_instant(
    s: &SelectSetup,
    day: usize,
    slot: usize,
    scale: f64,
) -> Result<InstantScores, CliError> {
    let actual_now: Vec<f64> = s.profiles.iter().map(|p| p.sample(day, slot)).collect();
    let actual_next: Vec<f64> =
        s.profiles.iter().map(|p| p.sample(day, slot + 1)).collect();
    let pred_next: Vec<f64> =
        s.predicted.iter().map(|p| p.sample(day, slot + 1)).collect();
    let base = base_solution(&s.net, &s.buses, &actual_now, scale)?;
    let scored = score_candidates(
        &s.model.mlp,
        &s.model.standardizer,
        &base.voltage_mag,
        &pred_next,
        &s.candidates,
    );
    let best = best_candidate(&scored);
    Ok(InstantScores { scored, best, actual_next, pred_next })
}

fn cmd_select(cfg: &RunConfig, args: &SelectArgs) -> Result<(), CliError> {
    let setup = select_setup(cfg, args)?;
    let level = cfg.level(args.level.into());
    if let Some(n) = args.sweep {
        return cmd_sweep(cfg, &setup, args.day, level.scale, n);
    }
    let slot = args.slot.expect("clap requires --slot without --sweep");
    if slot + 1 >= SAMPLES_PER_DAY {
        return Err(CliError::User(format!(
            "--slot must be at most {} so the followup instant stays in the day",
            SAMPLES_PER_DAY - 2
        )));
    }
    let InstantScores { scored, best, actual_next, pred_next } =
        score_instant(&setup, args.day, slot, level.scale)?;

    println!(
        "day={} slot={slot} time={} level={}",
        args.day,
        fmt_time(slot),
        level.name.as_str()
    );
    if args.oracle {
        let pen =
            PenaltyConfig { l2_penalty: cfg.l2_penalty, l1_scale: resolve_l1_scale(cfg)? };
        let evals = oracle_select(
            &setup.net,
            level.scale,
            &actual_next,
            &pred_next,
            &setup.candidates,
            &pen,
            cfg.threshold,
        );
        println!("{:<11} {:>10} {:>10} {:>10} {:>12}", "pattern", "predicted", "true_l1", "true_l2", "true_total");
        for sc in &scored {
            let ev = evals
                .iter()
                .find(|e| e.choice == sc.choice)
                .expect("oracle prices every candidate");
            println!(
                "{:<11} {:>10.4} {:>10.4} {:>10.4} {:>12.4}",
                sc.choice.label(),
                sc.predicted_total,
                ev.l1,
                ev.l2,
                ev.total()
            );
        }
        let chosen = evals
            .iter()
            .find(|e| e.choice == scored[best].choice)
            .expect("oracle prices every candidate");
        println!(
            "chosen={} predicted_total={:.4}",
            scored[best].choice.label(),
            scored[best].predicted_total
        );
        println!("oracle_best={} oracle_total={:.4}", evals[0].choice.label(), evals[0].total());
        println!("regret={:.4}", chosen.total() - evals[0].total());
    } else {
        println!("{:<11} {:>10}", "pattern", "predicted");
        for sc in &scored {
            println!("{:<11} {:>10.4}", sc.choice.label(), sc.predicted_total);
        }
        println!(
            "chosen={} predicted_total={:.4}",
            scored[best].choice.label(),
            scored[best].predicted_total
        );
    }
    Ok(())
}

fn cmd_sweep(
    cfg: &RunConfig,
    setup: &SelectSetup,
    start_day: usize,
    scale: f64,
    n: usize,
) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::User("--sweep needs at least one instant".into()));
    }
    let pen = PenaltyConfig { l2_penalty: cfg.l2_penalty, l1_scale: resolve_l1_scale(cfg)? };
    let slots = daylight_slots();
    let pairs = &slots[..slots.len() - 1];
    let total_days = cfg.days + 1;
    let (mut day, mut idx) = (start_day, 0usize);
    let (mut within, mut sum, mut max) = (0usize, 0.0f64, 0.0f64);
    for _ in 0..n {
        if day >= total_days {
            return Err(CliError::User(format!(
                "the run has only {} instants from day {start_day}; lower --sweep",
                (total_days - start_day) * pairs.len()
            )));
        }
        let slot = pairs[idx];
        let InstantScores { scored, best, actual_next, pred_next } =
            score_instant(setup, day, slot, scale)?;
        let evals = oracle_select(
            &setup.net,
            scale,
            &actual_next,
            &pred_next,
            &setup.candidates,
            &pen,
            cfg.threshold,
        );
        let chosen = evals
            .iter()
            .find(|e| e.choice == scored[best].choice)
            .expect("oracle prices every candidate");
        let regret = chosen.total() - evals[0].total();
        println!(
            "day={day} slot={slot} chosen={} regret={regret:.4}",
            scored[best].choice.label()
        );
        if regret <= cfg.l2_penalty {
            within += 1;
        }
        sum += regret;
        max = max.max(regret);
        idx += 1;
        if idx == pairs.len() {
            idx = 0;
            day += 1;
        }
    }
    println!("instants={n}");
    println!("tolerance={}", cfg.l2_penalty);
    println!("within_tolerance={within}");
    println!("mean_regret={:.4}", sum / n as f64);
    println!("max_regret={max:.4}");
    Ok(())
}

// ---------------------------------------------------------------------------
// plot

fn cmd_plot(curve: &Path, out: &Path) -> Result<(), CliError> {
    let text = read_artifact(curve, "point --curve at a training-curve CSV")?;
    let svg = render_curve_svg(&text)
        .map_err(|e| CliError::User(format!("{}: {e}", curve.display())))?;
    fs::write(out, svg)
        .map_err(|e| CliError::User(format!("cannot write {}: {e}", out.display())))?;
    println!("wrote {}", out.display());
    Ok(())
}
