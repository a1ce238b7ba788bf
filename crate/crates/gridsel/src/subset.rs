//! Dispatch penalties and solar-subset selection.
//!
//! Switching a solar unit off avoids being charged for the gap between
//! its day-ahead committed (predicted) output and what it actually
//! delivers, at the risk of overloading the tie-lines that make up the
//! shortfall. The two effects are priced separately:
//!
//! * L1: commitment-mismatch cost, `l1_scale * sum_on |predicted - actual|`,
//!   summed over the units left online;
//! * L2: a flat congestion penalty (default 50) if the resulting operating
//!   point overloads any branch or cannot be solved at all.
//!
//! A regressor trained on `(base-state voltages, subset descriptor) ->
//! L1 + L2` scores every candidate pattern at decision time; the pattern
//! with the smallest predicted total wins.

use crate::grid::{EnergySource, Network};
use crate::ml::{
    split_indices, train, AdamConfig, LossKind, MlError, Mlp, ModelFile, Standardizer, Targets,
    TrainConfig,
};
use crate::powerflow::{detect_congestion, injections_at, solve_ac, CongestionReport};
use crate::scenario::{
    subset_to_csv, SubsetChoice, SubsetRow, SOLAR_UNITS, SOLVE_MAX_ITER, SOLVE_TOL,
};
use crate::sha256_hex;

/// Pricing knobs for the two penalty components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    /// Flat charge applied when the operating point is congested.
    pub l2_penalty: f64,
    /// Multiplier putting the commitment-mismatch cost on the same scale
    /// as the congestion charge. Calibrated per dataset; see
    /// [`crate::scenario::gen_subset_dataset`].
    pub l1_scale: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig { l2_penalty: 50.0, l1_scale: 1.0 }
    }
}

/// Unscaled commitment mismatch: `sum |predicted - actual|` over the solar
/// units left online. Off units have no commitment and contribute nothing.
pub fn raw_commitment_error(predicted: &[f64], actual: &[f64], choice: &SubsetChoice) -> f64 {
    let mut total = 0.0;
    for k in 0..SOLAR_UNITS {
        if !choice.off[k] {
            total += (predicted[k] - actual[k]).abs();
        }
    }
    total
}

/// Commitment-mismatch penalty for one candidate pattern.
pub fn compute_l1(
    predicted: &[f64],
    actual: &[f64],
    choice: &SubsetChoice,
    cfg: &PenaltyConfig,
) -> f64 {
    cfg.l1_scale * raw_commitment_error(predicted, actual, choice)
}

/// Congestion penalty: flat charge if anything is overloaded (or the
/// solve failed), zero otherwise.
pub fn compute_l2(report: &CongestionReport, cfg: &PenaltyConfig) -> f64 {
    if report.congested {
        cfg.l2_penalty
    } else {
        0.0
    }
}

/// A candidate pattern scored by the penalty model at decision time.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub choice: SubsetChoice,
    /// Model-predicted total penalty for this pattern.
    pub predicted_total: f64,
}

/// A candidate pattern evaluated by actually simulating it.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetEvaluation {
    pub choice: SubsetChoice,
    pub l1: f64,
    pub l2: f64,
}

impl SubsetEvaluation {
    /// Total penalty; exactly `l1 + l2` by construction.
    pub fn total(&self) -> f64 {
        self.l1 + self.l2
    }
}

/// Scores every candidate pattern with the trained penalty regressor.
///
/// `base_voltages` is the all-on operating state at decision time; the
/// descriptor for each candidate carries the predicted MW of the units it
/// keeps online and 0 for the ones it switches off.
pub fn score_candidates(
    model: &Mlp,
    stats: &Standardizer,
    base_voltages: &[f64],
    predicted_mw: &[f64],
    candidates: &[SubsetChoice],
) -> Vec<CandidateScore> {
    candidates
        .iter()
        .map(|choice| {
            let mut x = base_voltages.to_vec();
            for (&off, &mw) in choice.off.iter().zip(predicted_mw) {
                x.push(if off { 0.0 } else { mw });
            }
            let z = stats.transform(&x);
            let out = model.forward(&z);
            CandidateScore { choice: *choice, predicted_total: out[0] }
        })
        .collect()
}

/// Index of the smallest score under the selection tie-break: ties on the
/// predicted total go to the pattern switching off the fewest units, then
/// to the earliest candidate in the list.
pub fn best_candidate(scored: &[CandidateScore]) -> usize {
    assert!(!scored.is_empty(), "candidate list must be non-empty");
    let mut best = 0;
    for i in 1..scored.len() {
        let (a, b) = (&scored[i], &scored[best]);
        if a.predicted_total < b.predicted_total
            || (a.predicted_total == b.predicted_total
                && a.choice.off_count() < b.choice.off_count())
        {
            best = i;
        }
    }
    best
}

/// Picks the candidate with the smallest model-predicted total penalty;
/// ties break per [`best_candidate`]. The decision depends only on the
/// score ordering, so any strictly increasing transform of the model
/// output leaves it unchanged.
pub fn select_subset(
    model: &Mlp,
    stats: &Standardizer,
    base_voltages: &[f64],
    predicted_mw: &[f64],
    candidates: &[SubsetChoice],
) -> CandidateScore {
    let mut scored = score_candidates(model, stats, base_voltages, predicted_mw, candidates);
    let best = best_candidate(&scored);
    scored.swap_remove(best)
}

/// Ground-truth ranking: simulates every candidate at the actual t+1
/// solar output and prices it with the real penalty components.
///
/// Returns the evaluations sorted ascending by total penalty with the
/// same tie-break as [`select_subset`] (fewest off, then input order), so
/// the first element is the oracle optimum. Infeasible candidates are not
/// errors; they simply carry the congestion charge.
pub fn oracle_select(
    net: &Network,
    load_scale: f64,
    actual_mw: &[f64],
    predicted_mw: &[f64],
    candidates: &[SubsetChoice],
    cfg: &PenaltyConfig,
    threshold: f64,
) -> Vec<SubsetEvaluation> {
    let solar_buses: Vec<usize> = net
        .generators
        .iter()
        .filter(|g| g.source == EnergySource::Solar)
        .map(|g| g.bus)
        .collect();
    assert_eq!(solar_buses.len(), SOLAR_UNITS);
    let mut evals: Vec<SubsetEvaluation> = candidates
        .iter()
        .map(|choice| {
            let mut scen = net.clone();
            for (k, &bus) in solar_buses.iter().enumerate() {
                for g in scen.generators.iter_mut().filter(|g| g.bus == bus) {
                    if choice.off[k] {
                        g.online = false;
                    } else {
                        g.p_set_mw = actual_mw[k];
                    }
                }
            }
            let inj = injections_at(&scen, load_scale);
            let congested = match solve_ac(&scen, &inj, SOLVE_TOL, SOLVE_MAX_ITER) {
                Ok(sol) => detect_congestion(&scen, &sol, threshold).congested,
                Err(_) => true,
            };
            let report = CongestionReport { congested, overloaded_branches: vec![] };
            SubsetEvaluation {
                choice: *choice,
                l1: compute_l1(predicted_mw, actual_mw, choice, cfg),
                l2: compute_l2(&report, cfg),
            }
        })
        .collect();
    // Stable sort keeps input order as the last tie-break.
    evals.sort_by(|a, b| {
        a.total()
            .total_cmp(&b.total())
            .then(a.choice.off_count().cmp(&b.choice.off_count()))
    });
    evals
}

// ---------------------------------------------------------------------------
// Regressor training

/// Input layout for the penalty regressor: the base-state voltage
/// magnitudes followed by the three descriptor entries.
pub fn subset_features(row: &SubsetRow) -> Vec<f64> {
    let mut x = row.voltages.clone();
    x.extend_from_slice(&row.descriptor);
    x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressorConfig {
    pub hidden: usize,
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Cadence of the held-out evaluations written to the curve.
    pub eval_every: usize,
    pub seed: u64,
    /// Only used to split the held-out error report into the clean and
    /// congested regimes; must match the dataset's congestion charge.
    pub l2_penalty: f64,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        RegressorConfig {
            hidden: 200,
            steps: 2500,
            batch_size: 32,
            learning_rate: 1e-3,
            n_train: 4500,
            n_test: 400,
            eval_every: 50,
            seed: 0,
            l2_penalty: 50.0,
        }
    }
}

#[derive(Debug)]
pub struct RegressorOutcome {
    /// Trained network plus the standardizer fitted on the training split.
    pub model: ModelFile,
    /// `step,train_loss,test_l1_proxy,test_l2_proxy` CSV of the run.
    pub curve: String,
    /// Key=value summary of the run.
    pub report: String,
    pub train_mse: f64,
    pub test_mse: f64,
    /// Squared error of always predicting the training-target mean.
    pub baseline_mse: f64,
}

fn mean_squared_error(model: &Mlp, xs: &[Vec<f64>], ys: &[f64]) -> f64 {
    let total: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = model.forward(x)[0] - y;
            e * e
        })
        .sum();
    total / xs.len() as f64
}

/// Trains the total-penalty regressor on subset rows.
///
/// The rows are shuffled once with the seed and cut into disjoint train
/// and test splits; the standardizer is fitted on the training features
/// only. The curve tracks the mini-batch loss and, at every evaluation
/// step, the mean absolute held-out error separately over the clean rows
/// (`target < l2_penalty`, the commitment-error regime) and the congested
/// rows (`target >= l2_penalty`).
pub fn train_penalty_regressor(
    rows: &[SubsetRow],
    cfg: &RegressorConfig,
) -> Result<RegressorOutcome, MlError> {
    let (train_idx, test_idx) = split_indices(rows.len(), cfg.n_train, cfg.n_test, cfg.seed)?;
    let features: Vec<Vec<f64>> = rows.iter().map(subset_features).collect();
    let stats = Standardizer::fit(
        &train_idx.iter().map(|&i| features[i].clone()).collect::<Vec<_>>(),
    );
    let train_x: Vec<Vec<f64>> = train_idx.iter().map(|&i| stats.transform(&features[i])).collect();
    let train_y: Vec<f64> = train_idx.iter().map(|&i| rows[i].target).collect();
    let test_x: Vec<Vec<f64>> = test_idx.iter().map(|&i| stats.transform(&features[i])).collect();
    let test_y: Vec<f64> = test_idx.iter().map(|&i| rows[i].target).collect();

    let dims = [features[0].len(), cfg.hidden, 1];
    let mut mlp = Mlp::new(&dims, cfg.seed);
    let train_cfg = TrainConfig {
        steps: cfg.steps,
        batch_size: cfg.batch_size,
        adam: AdamConfig { learning_rate: cfg.learning_rate, ..AdamConfig::default() },
        seed: cfg.seed.wrapping_add(1),
    };

    let clean: Vec<usize> = (0..test_y.len()).filter(|&i| test_y[i] < cfg.l2_penalty).collect();
    let congested: Vec<usize> =
        (0..test_y.len()).filter(|&i| test_y[i] >= cfg.l2_penalty).collect();
    let mean_abs = |m: &Mlp, idxs: &[usize]| -> f64 {
        if idxs.is_empty() {
            return 0.0;
        }
        idxs.iter().map(|&i| (m.forward(&test_x[i])[0] - test_y[i]).abs()).sum::<f64>()
            / idxs.len() as f64
    };

    let mut curve = String::from("step,train_loss,test_l1_proxy,test_l2_proxy\n");
    train(&mut mlp, &train_x, &Targets::Values(train_y.clone()), &train_cfg, |m, info| {
        if info.step == 1 || info.step % cfg.eval_every == 0 || info.step == cfg.steps {
            curve.push_str(&format!(
                "{},{},{},{}\n",
                info.step,
                info.loss,
                mean_abs(m, &clean),
                mean_abs(m, &congested)
            ));
        }
    })?;

    let train_mse = mean_squared_error(&mlp, &train_x, &train_y);
    let test_mse = mean_squared_error(&mlp, &test_x, &test_y);
    let train_mean: f64 = train_y.iter().sum::<f64>() / train_y.len() as f64;
    let baseline_mse: f64 =
        test_y.iter().map(|y| (y - train_mean) * (y - train_mean)).sum::<f64>()
            / test_y.len() as f64;

    let report = format!(
        "task=penalty-regression\ntool_version={}\nrows={}\ntrain_rows={}\ntest_rows={}\n\
         features={}\nhidden={}\nsteps={}\nbatch_size={}\nlearning_rate={}\nseed={}\n\
         dataset_sha256={}\ntrain_mse={}\ntest_mse={}\nbaseline_mse={}\n\
         improvement_over_baseline_pct={}\n",
        crate::TOOL_VERSION,
        rows.len(),
        train_idx.len(),
        test_idx.len(),
        features[0].len(),
        cfg.hidden,
        cfg.steps,
        cfg.batch_size,
        cfg.learning_rate,
        cfg.seed,
        sha256_hex(subset_to_csv(rows).as_bytes()),
        train_mse,
        test_mse,
        baseline_mse,
        100.0 * (1.0 - test_mse / baseline_mse),
    );
    Ok(RegressorOutcome {
        model: ModelFile { kind: LossKind::SquaredError, mlp, standardizer: stats },
        curve,
        report,
        train_mse,
        test_mse,
        baseline_mse,
    })
}

/// Errors of a stored regressor on the split a config derives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressorEval {
    pub train_mse: f64,
    pub test_mse: f64,
    /// Squared error of always predicting the training-target mean.
    pub baseline_mse: f64,
}

/// Re-scores a stored penalty regressor on the dataset, re-deriving the
/// train/test split from the config seed and standardizing with the
/// statistics saved inside the model.
pub fn eval_penalty_regressor(
    model: &ModelFile,
    rows: &[SubsetRow],
    cfg: &RegressorConfig,
) -> Result<RegressorEval, MlError> {
    if model.kind != LossKind::SquaredError {
        return Err(MlError::Invalid("model is not a regressor".into()));
    }
    if rows.is_empty() || subset_features(&rows[0]).len() != model.mlp.input_dim() {
        return Err(MlError::Invalid("dataset does not match the model input width".into()));
    }
    let (train_idx, test_idx) = split_indices(rows.len(), cfg.n_train, cfg.n_test, cfg.seed)?;
    let gather = |idxs: &[usize]| -> (Vec<Vec<f64>>, Vec<f64>) {
        let xs = idxs
            .iter()
            .map(|&i| model.standardizer.transform(&subset_features(&rows[i])))
            .collect();
        let ys = idxs.iter().map(|&i| rows[i].target).collect();
        (xs, ys)
    };
    let (train_x, train_y) = gather(&train_idx);
    let (test_x, test_y) = gather(&test_idx);
    let train_mean: f64 = train_y.iter().sum::<f64>() / train_y.len() as f64;
    Ok(RegressorEval {
        train_mse: mean_squared_error(&model.mlp, &train_x, &train_y),
        test_mse: mean_squared_error(&model.mlp, &test_x, &test_y),
        baseline_mse: test_y.iter().map(|y| (y - train_mean) * (y - train_mean)).sum::<f64>()
            / test_y.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::reference_network;
    use crate::scenario::{
        gen_subset_dataset, predicted_profiles, subset_combinations, synth_solar, LevelName,
        LoadLevel,
    };

    fn identity_stats(n: usize) -> Standardizer {
        Standardizer { mean: vec![0.0; n], std: vec![1.0; n] }
    }

    /// Linear model reading only the descriptor slots, weight 1 each.
    fn descriptor_sum_model() -> Mlp {
        let mut params = vec![0.0; 23];
        params[20] = 1.0;
        params[21] = 1.0;
        params[22] = 1.0;
        params.push(0.0); // bias
        Mlp::from_params(&[23, 1], params).unwrap()
    }

    fn constant_model(value: f64) -> Mlp {
        let mut params = vec![0.0; 23];
        params.push(value);
        Mlp::from_params(&[23, 1], params).unwrap()
    }

    #[test]
    fn penalty_components_follow_the_masks() {
        let predicted = [30.0, 20.0, 10.0];
        let actual = [25.0, 26.0, 10.0];
        let cfg = PenaltyConfig { l2_penalty: 50.0, l1_scale: 2.0 };

        let all_on = SubsetChoice::ALL_ON;
        assert_eq!(raw_commitment_error(&predicted, &actual, &all_on), 5.0 + 6.0);
        assert_eq!(compute_l1(&predicted, &actual, &all_on, &cfg), 22.0);

        let off_first = SubsetChoice { off: [true, false, false] };
        assert_eq!(raw_commitment_error(&predicted, &actual, &off_first), 6.0);

        let all_off = SubsetChoice { off: [true, true, true] };
        assert_eq!(raw_commitment_error(&predicted, &actual, &all_off), 0.0);

        let clean = CongestionReport { congested: false, overloaded_branches: vec![] };
        let jammed = CongestionReport { congested: true, overloaded_branches: vec![] };
        assert_eq!(compute_l2(&clean, &cfg), 0.0);
        assert_eq!(compute_l2(&jammed, &cfg), 50.0);
    }

    #[test]
    fn scoring_masks_the_descriptor() {
        let model = descriptor_sum_model();
        let stats = identity_stats(23);
        let voltages = vec![0.0; 20];
        let predicted = [10.0, 20.0, 30.0];
        let mut candidates = vec![SubsetChoice::ALL_ON];
        candidates.extend(subset_combinations());
        let scores = score_candidates(&model, &stats, &voltages, &predicted, &candidates);
        assert_eq!(scores[0].predicted_total, 60.0); // all-on
        assert_eq!(scores[1].predicted_total, 50.0); // off:1
        assert_eq!(scores[4].predicted_total, 30.0); // off:1+2
        assert_eq!(scores[7].predicted_total, 0.0); // off:1+2+3
    }

    #[test]
    fn selection_prefers_fewest_off_on_ties() {
        let model = constant_model(7.5);
        let stats = identity_stats(23);
        let voltages = vec![1.0; 20];
        let predicted = [10.0, 20.0, 30.0];

        let mut candidates = vec![SubsetChoice::ALL_ON];
        candidates.extend(subset_combinations());
        let pick = select_subset(&model, &stats, &voltages, &predicted, &candidates);
        assert_eq!(pick.choice, SubsetChoice::ALL_ON, "all scores tie, keep everything on");

        // Without all-on the singles tie; the earliest wins.
        let singles = subset_combinations();
        let pick = select_subset(&model, &stats, &voltages, &predicted, &singles);
        assert_eq!(pick.choice.label(), "off:1");
    }

    #[test]
    fn selection_tracks_the_smallest_prediction() {
        let model = descriptor_sum_model();
        let stats = identity_stats(23);
        let voltages = vec![0.0; 20];
        let predicted = [10.0, 20.0, 30.0];
        let pick = select_subset(&model, &stats, &voltages, &predicted, &subset_combinations());
        assert_eq!(pick.choice.label(), "off:1+2+3");
        assert_eq!(pick.predicted_total, 0.0);
    }

    #[test]
    fn oracle_prices_candidates_on_the_reference_grid() {
        let net = reference_network();
        let profiles = synth_solar(2, &[45.0, 40.0, 35.0], 21);
        let actual: Vec<f64> = profiles.iter().map(|p| p.sample(1, 48)).collect();
        let predicted: Vec<f64> = profiles.iter().map(|p| p.sample(0, 48)).collect();
        let cfg = PenaltyConfig::default();
        let mut candidates = vec![SubsetChoice::ALL_ON];
        candidates.extend(subset_combinations());
        let evals = oracle_select(&net, 1.3, &actual, &predicted, &candidates, &cfg, 1.0);
        assert_eq!(evals.len(), 8);

        let by_label = |label: &str| {
            evals.iter().find(|e| e.choice.label() == label).unwrap()
        };
        // All-off carries no commitment and always jams the tie-lines at
        // high loading.
        let all_off = by_label("off:1+2+3");
        assert_eq!(all_off.l1, 0.0);
        assert_eq!(all_off.l2, 50.0);

        // All-on at full noon sun is feasible; its cost is pure mismatch.
        let all_on = by_label("all-on");
        assert_eq!(all_on.l2, 0.0);
        assert!(all_on.l1 > 0.0);

        // Component contract: l2 is the flat charge or nothing, and the
        // list comes back sorted ascending by total.
        for e in &evals {
            assert!(e.l2 == 0.0 || e.l2 == cfg.l2_penalty);
            assert_eq!(e.total(), e.l1 + e.l2);
        }
        for pair in evals.windows(2) {
            assert!(pair[0].total() <= pair[1].total());
        }
    }

    #[test]
    fn selection_ignores_uniform_score_transforms() {
        // Scores from a real candidate scoring pass.
        let model = descriptor_sum_model();
        let stats = identity_stats(23);
        let voltages = vec![0.5; 20];
        let predicted = [12.0, 0.0, 7.0];
        let mut candidates = vec![SubsetChoice::ALL_ON];
        candidates.extend(subset_combinations());
        let scored = score_candidates(&model, &stats, &voltages, &predicted, &candidates);
        let base = best_candidate(&scored);

        // Adding a constant or applying any strictly increasing map to
        // every score leaves the argmin (and its tie-breaks) unchanged.
        for shift in [-3.25, 0.0, 7.5, 1e6] {
            let shifted: Vec<CandidateScore> = scored
                .iter()
                .map(|s| CandidateScore {
                    choice: s.choice,
                    predicted_total: s.predicted_total + shift,
                })
                .collect();
            assert_eq!(best_candidate(&shifted), base);
        }
        let warped: Vec<CandidateScore> = scored
            .iter()
            .map(|s| CandidateScore {
                choice: s.choice,
                predicted_total: s.predicted_total.powi(3) + 2.0 * s.predicted_total,
            })
            .collect();
        assert_eq!(best_candidate(&warped), base);
    }

    #[test]
    fn dataset_targets_match_the_oracle_bit_for_bit() {
        let net = reference_network();
        let profiles = synth_solar(2, &[45.0, 40.0, 35.0], 42);
        let predicted = predicted_profiles(&profiles, 1..2).unwrap();
        let level = LoadLevel { name: LevelName::High, scale: 1.3 };
        let out =
            gen_subset_dataset(&net, &profiles, &predicted, level, 1..2, None, 50.0, 1.0)
                .unwrap();
        let cfg = PenaltyConfig { l2_penalty: 50.0, l1_scale: out.l1_scale };
        let candidates = subset_combinations();
        let slots = crate::scenario::daylight_slots();
        for (j, chunk) in out.rows.chunks(7).enumerate() {
            let slot = slots[j % 50];
            let actual: Vec<f64> = profiles.iter().map(|p| p.sample(1, slot + 1)).collect();
            let pred: Vec<f64> = predicted.iter().map(|p| p.sample(1, slot + 1)).collect();
            let evals = oracle_select(&net, 1.3, &actual, &pred, &candidates, &cfg, 1.0);
            for (row, &choice) in chunk.iter().zip(&candidates) {
                let eval = evals.iter().find(|e| e.choice == choice).unwrap();
                assert_eq!(
                    row.target,
                    eval.total(),
                    "slot {slot} pattern {}: dataset and oracle disagree",
                    choice.label()
                );
            }
        }
    }

    #[test]
    fn regressor_beats_the_mean_baseline_on_a_small_run() {
        let net = reference_network();
        let profiles = synth_solar(3, &[45.0, 40.0, 35.0], 42);
        let predicted = predicted_profiles(&profiles, 1..3).unwrap();
        let level = LoadLevel { name: LevelName::High, scale: 1.3 };
        let out =
            gen_subset_dataset(&net, &profiles, &predicted, level, 1..3, None, 50.0, 1.0)
                .unwrap();
        let cfg = RegressorConfig {
            n_train: 600,
            n_test: 100,
            seed: 3,
            ..RegressorConfig::default()
        };
        let r1 = train_penalty_regressor(&out.rows, &cfg).unwrap();
        assert!(
            r1.test_mse < r1.baseline_mse,
            "test mse {} should beat baseline {}",
            r1.test_mse,
            r1.baseline_mse
        );
        assert!(r1.curve.lines().count() > 2);
        assert!(r1.report.contains("task=penalty-regression"));

        let r2 = train_penalty_regressor(&out.rows, &cfg).unwrap();
        assert_eq!(r1.model, r2.model, "training must be deterministic");
        assert_eq!(r1.curve, r2.curve);
        assert_eq!(r1.report, r2.report);

        assert!(train_penalty_regressor(&out.rows[..100], &cfg).is_err());
    }
}
