//! Run configuration: one file, one seed, every knob.
//!
//! The format is line oriented: `[section]` headers, `key = value`
//! pairs, `#` comments. Unknown sections and keys are errors so a typo
//! surfaces instead of silently falling back to a default. The built-in
//! defaults equal the checked-in `configs/default.cfg`.
//!
//! A single seed drives everything downstream: the solar synthesis, the
//! dataset splits, the weight initializations, and the batch orders.
//! Overriding it (file or `--seed`) moves the whole run at once.

use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use crate::congestion::ClassifierConfig;
use crate::scenario::{LevelName, LoadLevel, SOLAR_UNITS};
use crate::subset::RegressorConfig;

/// Where the solar traces come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SolarSource {
    /// Synthesize daily bell curves from per-unit peaks with the run seed.
    Synthetic { peaks_mw: [f64; SOLAR_UNITS] },
    /// Load a 15-minute trace from a CSV file.
    Csv(PathBuf),
}

/// Everything a run needs, resolved from defaults, file, and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Seed for the solar synthesis and every training run.
    pub seed: u64,
    /// Directory all artifacts are written to and read from.
    pub out_dir: PathBuf,
    /// Dataset days; one burn-in day is prepended for the forecasts.
    pub days: usize,
    pub grid: PathBuf,
    /// Branch loading fraction that counts as congested.
    pub threshold: f64,
    pub solar: SolarSource,
    /// The three loading levels, low to high.
    pub levels: [LoadLevel; 3],
    /// Flat charge for a congested or unsolvable operating point.
    pub l2_penalty: f64,
    /// Fixed commitment-error multiplier; `None` calibrates it on the
    /// high-load subset dataset during generation.
    pub l1_scale: Option<f64>,
    pub congestion: ClassifierConfig,
    /// Step count for the forecast-feature classifier run.
    pub predicted_steps: usize,
    /// Held-out rows for the forecast-feature classifier run.
    pub predicted_test_rows: usize,
    pub subset: RegressorConfig,
    /// Which level's subset dataset the penalty regressor trains on.
    pub subset_level: LevelName,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut cfg = RunConfig {
            seed: 42,
            out_dir: PathBuf::from("out"),
            days: 14,
            grid: PathBuf::from("grids/reference20.grid"),
            threshold: 1.0,
            solar: SolarSource::Synthetic { peaks_mw: [45.0, 40.0, 35.0] },
            levels: [
                LoadLevel { name: LevelName::Low, scale: 0.7 },
                LoadLevel { name: LevelName::Medium, scale: 1.0 },
                LoadLevel { name: LevelName::High, scale: 1.3 },
            ],
            l2_penalty: 50.0,
            l1_scale: None,
            congestion: ClassifierConfig::default(),
            predicted_steps: 800,
            predicted_test_rows: 100,
            subset: RegressorConfig::default(),
            subset_level: LevelName::High,
        };
        cfg.sync_seeds();
        cfg
    }
}

impl RunConfig {
    /// Propagates the run seed into every nested training config.
    pub fn sync_seeds(&mut self) {
        self.congestion.seed = self.seed;
        self.congestion.svm.seed = self.seed;
        self.subset.seed = self.seed;
    }

    /// Settings for the forecast-feature classifier run: the congestion
    /// settings with its own step count and held-out size.
    pub fn predicted_config(&self) -> ClassifierConfig {
        ClassifierConfig {
            steps: self.predicted_steps,
            n_test: self.predicted_test_rows,
            seed: self.seed,
            ..self.congestion
        }
    }

    pub fn level(&self, name: LevelName) -> LoadLevel {
        *self.levels.iter().find(|l| l.name == name).expect("all three levels are present")
    }
}

fn num<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: Display,
{
    value.parse().map_err(|e| format!("bad value `{value}`: {e}"))
}

fn positive(value: &str) -> Result<f64, String> {
    let v: f64 = num(value)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("bad value `{value}`: must be positive"))
    }
}

/// Parses a configuration file. Errors carry the 1-based line number.
pub fn parse_config(text: &str) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    let mut peaks = match cfg.solar {
        SolarSource::Synthetic { peaks_mw } => peaks_mw,
        SolarSource::Csv(_) => unreachable!("default source is synthetic"),
    };
    let mut source = "synthetic".to_string();
    let mut csv_path: Option<PathBuf> = None;
    let mut section = String::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let n = idx + 1;
        if let Some(inner) = line.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .ok_or_else(|| format!("line {n}: unterminated section header"))?
                .trim();
            match name {
                "run" | "solar" | "levels" | "penalty" | "train.congestion"
                | "train.predicted" | "train.subset" => section = name.to_string(),
                other => return Err(format!("line {n}: unknown section [{other}]")),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {n}: expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        let res: Result<(), String> = (|| match (section.as_str(), key) {
            ("", _) => Err("key outside any section".into()),

            ("run", "seed") => num(value).map(|v| cfg.seed = v),
            ("run", "out_dir") => {
                cfg.out_dir = PathBuf::from(value);
                Ok(())
            }
            ("run", "days") => match num(value)? {
                0 => Err("bad value `0`: need at least one day".into()),
                v => {
                    cfg.days = v;
                    Ok(())
                }
            },
            ("run", "grid") => {
                cfg.grid = PathBuf::from(value);
                Ok(())
            }
            ("run", "threshold") => positive(value).map(|v| cfg.threshold = v),

            ("solar", "source") => match value {
                "synthetic" | "csv" => {
                    source = value.to_string();
                    Ok(())
                }
                other => Err(format!("bad value `{other}`: expected synthetic or csv")),
            },
            ("solar", "peaks") => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != SOLAR_UNITS {
                    Err(format!("expected {SOLAR_UNITS} comma-separated peaks"))
                } else {
                    for (slot, part) in peaks.iter_mut().zip(&parts) {
                        *slot = positive(part)?;
                    }
                    Ok(())
                }
            }
            ("solar", "csv") => {
                csv_path = Some(PathBuf::from(value));
                Ok(())
            }

            ("levels", "low") => positive(value).map(|v| cfg.levels[0].scale = v),
            ("levels", "medium") => positive(value).map(|v| cfg.levels[1].scale = v),
            ("levels", "high") => positive(value).map(|v| cfg.levels[2].scale = v),

            ("penalty", "l2") => positive(value).map(|v| cfg.l2_penalty = v),
            ("penalty", "l1_scale") => {
                cfg.l1_scale = if value == "auto" { None } else { Some(positive(value)?) };
                Ok(())
            }

            ("train.congestion", "hidden") => num(value).map(|v| cfg.congestion.hidden = v),
            ("train.congestion", "steps") => num(value).map(|v| cfg.congestion.steps = v),
            ("train.congestion", "batch_size") => {
                num(value).map(|v| cfg.congestion.batch_size = v)
            }
            ("train.congestion", "learning_rate") => {
                positive(value).map(|v| cfg.congestion.learning_rate = v)
            }
            ("train.congestion", "train_rows") => num(value).map(|v| cfg.congestion.n_train = v),
            ("train.congestion", "test_rows") => num(value).map(|v| cfg.congestion.n_test = v),
            ("train.congestion", "eval_every") => {
                num(value).map(|v| cfg.congestion.eval_every = v)
            }
            ("train.congestion", "svm_lambda") => {
                positive(value).map(|v| cfg.congestion.svm.lambda = v)
            }
            ("train.congestion", "svm_epochs") => {
                num(value).map(|v| cfg.congestion.svm.epochs = v)
            }

            ("train.predicted", "steps") => num(value).map(|v| cfg.predicted_steps = v),
            ("train.predicted", "test_rows") => num(value).map(|v| cfg.predicted_test_rows = v),

            ("train.subset", "hidden") => num(value).map(|v| cfg.subset.hidden = v),
            ("train.subset", "steps") => num(value).map(|v| cfg.subset.steps = v),
            ("train.subset", "batch_size") => num(value).map(|v| cfg.subset.batch_size = v),
            ("train.subset", "learning_rate") => {
                positive(value).map(|v| cfg.subset.learning_rate = v)
            }
            ("train.subset", "train_rows") => num(value).map(|v| cfg.subset.n_train = v),
            ("train.subset", "test_rows") => num(value).map(|v| cfg.subset.n_test = v),
            ("train.subset", "eval_every") => num(value).map(|v| cfg.subset.eval_every = v),
            ("train.subset", "level") => match value {
                "low" => {
                    cfg.subset_level = LevelName::Low;
                    Ok(())
                }
                "medium" => {
                    cfg.subset_level = LevelName::Medium;
                    Ok(())
                }
                "high" => {
                    cfg.subset_level = LevelName::High;
                    Ok(())
                }
                other => Err(format!("bad value `{other}`: expected low, medium, or high")),
            },

            (sec, key) => Err(format!("unknown key `{key}` in section [{sec}]")),
        })();
        res.map_err(|msg| format!("line {n}: {msg}"))?;
    }

    cfg.solar = match source.as_str() {
        "synthetic" => SolarSource::Synthetic { peaks_mw: peaks },
        "csv" => SolarSource::Csv(
            csv_path.ok_or("[solar] source = csv needs a `csv = <path>` entry")?,
        ),
        _ => unreachable!("source is validated on assignment"),
    };
    // The regressor splits the held-out error report at the congestion
    // charge; keep them in step.
    cfg.subset.l2_penalty = cfg.l2_penalty;
    cfg.sync_seeds();
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn the_checked_in_example_equals_the_builtin_defaults() {
        let text = include_str!("../../../../configs/default.cfg");
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn overrides_land_in_the_right_fields() {
        let cfg = parse_config(
            "[run]\nseed = 7\ndays = 3\n\n[penalty]\nl1_scale = 2.5\n\
             [train.subset]\nlevel = medium\nsteps = 10\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.congestion.seed, 7);
        assert_eq!(cfg.congestion.svm.seed, 7);
        assert_eq!(cfg.subset.seed, 7);
        assert_eq!(cfg.days, 3);
        assert_eq!(cfg.l1_scale, Some(2.5));
        assert_eq!(cfg.subset_level, LevelName::Medium);
        assert_eq!(cfg.subset.steps, 10);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_config("[run]\nseed = 1\nbogus = 2\n").unwrap_err();
        assert!(err.starts_with("line 3:"), "{err}");
        let err = parse_config("[nope]\n").unwrap_err();
        assert!(err.starts_with("line 1:"), "{err}");
        let err = parse_config("[run]\nseed == 1\n").unwrap_err();
        assert!(err.contains("line 2"), "{err}");
        let err = parse_config("seed = 1\n").unwrap_err();
        assert!(err.contains("outside any section"), "{err}");
    }

    #[test]
    fn csv_source_needs_a_path() {
        let err = parse_config("[solar]\nsource = csv\n").unwrap_err();
        assert!(err.contains("csv = <path>"), "{err}");
        let cfg = parse_config("[solar]\nsource = csv\ncsv = trace.csv\n").unwrap();
        assert_eq!(cfg.solar, SolarSource::Csv(PathBuf::from("trace.csv")));
    }

    #[test]
    fn the_default_predicted_config_matches_the_library_variant() {
        let got = RunConfig::default().predicted_config();
        let want = ClassifierConfig::predicted_variant(42);
        assert_eq!(
            (got.hidden, got.steps, got.n_train, got.n_test, got.seed),
            (want.hidden, want.steps, want.n_train, want.n_test, want.seed),
        );
    }

    #[test]
    fn the_l2_charge_reaches_the_regressor_report_split() {
        let cfg = parse_config("[penalty]\nl2 = 80\n").unwrap();
        assert_eq!(cfg.subset.l2_penalty, 80.0);
    }
}
