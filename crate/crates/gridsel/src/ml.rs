//! Small neural-network and linear-classifier machinery.
//!
//! Everything numeric here is written out explicitly so it can be checked
//! against finite differences and hand-computed update steps: a
//! fully-connected network with ReLU hidden layers stored as one flat
//! parameter vector, softmax cross-entropy and squared-error losses,
//! bias-corrected Adam, a Pegasos-style linear SVM, and a feature
//! standardizer. Training is deterministic for a given seed.
//!
//! Trained models are saved in a single little-endian binary container
//! holding the loss kind, layer sizes, the standardizer fitted on the
//! training split, and the parameters.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("{0}")]
    Invalid(String),
    #[error("non-finite loss at step {step}")]
    Diverged { step: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad model file: {0}")]
    Format(String),
}

// ---------------------------------------------------------------------------
// Network

/// Fully-connected network: ReLU after every layer except the last, which
/// is left linear (losses apply softmax themselves where needed).
///
/// Parameters live in one flat vector, per layer the weight matrix in
/// row-major `[out x in]` order followed by the biases. The flat layout
/// keeps the optimizer and serialization trivial and lets a finite
/// difference probe perturb single entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    dims: Vec<usize>,
    params: Vec<f64>,
}

fn param_count(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
}

impl Mlp {
    /// Xavier-uniform initialization: weights in
    /// `[-sqrt(6/(in+out)), sqrt(6/(in+out))]`, biases zero.
    pub fn new(dims: &[usize], seed: u64) -> Mlp {
        assert!(dims.len() >= 2, "need at least input and output layer");
        assert!(dims.iter().all(|&d| d > 0), "zero-width layer");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(param_count(dims));
        for w in dims.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let limit = (6.0 / (n_in + n_out) as f64).sqrt();
            for _ in 0..n_out * n_in {
                params.push(rng.gen_range(-limit..=limit));
            }
            params.extend(std::iter::repeat_n(0.0, n_out));
        }
        Mlp { dims: dims.to_vec(), params }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn from_params(dims: &[usize], params: Vec<f64>) -> Result<Mlp, MlError> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(MlError::Invalid(format!("bad layer sizes {dims:?}")));
        }
        if params.len() != param_count(dims) {
            return Err(MlError::Invalid(format!(
                "{} parameters for layer sizes {dims:?} (need {})",
                params.len(),
                param_count(dims)
            )));
        }
        Ok(Mlp { dims: dims.to_vec(), params })
    }

    /// (weights offset, biases offset, in, out) for each layer.
    fn layout(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut off = 0;
        self.dims
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let entry = (off, off + n_out * n_in, n_in, n_out);
                off += n_out * n_in + n_out;
                entry
            })
            .collect()
    }

    /// Network output (last layer left linear).
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.input_dim(), "input width mismatch");
        let layers = self.layout();
        let last = layers.len() - 1;
        let mut a = x.to_vec();
        for (l, &(woff, boff, n_in, n_out)) in layers.iter().enumerate() {
            let mut z = vec![0.0; n_out];
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &self.params[woff + o * n_in..woff + (o + 1) * n_in];
                let mut acc = self.params[boff + o];
                for (wi, ai) in row.iter().zip(&a) {
                    acc += wi * ai;
                }
                *zo = acc;
            }
            if l < last {
                for zo in &mut z {
                    *zo = zo.max(0.0);
                }
            }
            a = z;
        }
        a
    }

    /// All activations, input first, hidden layers after ReLU, final layer
    /// linear. Used by backpropagation.
    fn forward_trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let layers = self.layout();
        let last = layers.len() - 1;
        let mut acts = Vec::with_capacity(layers.len() + 1);
        acts.push(x.to_vec());
        for (l, &(woff, boff, n_in, n_out)) in layers.iter().enumerate() {
            let a = acts.last().unwrap();
            let mut z = vec![0.0; n_out];
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &self.params[woff + o * n_in..woff + (o + 1) * n_in];
                let mut acc = self.params[boff + o];
                for (wi, ai) in row.iter().zip(a) {
                    acc += wi * ai;
                }
                *zo = acc;
            }
            if l < last {
                for zo in &mut z {
                    *zo = zo.max(0.0);
                }
            }
            acts.push(z);
        }
        acts
    }
}

/// Index of the largest entry; ties go to the earlier index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Numerically safe softmax: the row maximum is subtracted before
/// exponentiation so large logits cannot overflow.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

// ---------------------------------------------------------------------------
// Losses

/// Training targets; the variant fixes the loss. Class targets pair with
/// softmax cross-entropy, scalar value targets with squared error.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Classes(Vec<usize>),
    Values(Vec<f64>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Classes(c) => c.len(),
            Targets::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> LossKind {
        match self {
            Targets::Classes(_) => LossKind::SoftmaxCrossEntropy,
            Targets::Values(_) => LossKind::SquaredError,
        }
    }

    fn gather(&self, idxs: &[usize]) -> Targets {
        match self {
            Targets::Classes(c) => Targets::Classes(idxs.iter().map(|&i| c[i]).collect()),
            Targets::Values(v) => Targets::Values(idxs.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Loss attached to a stored model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// Multi-class output trained with softmax cross-entropy.
    SoftmaxCrossEntropy,
    /// Scalar output trained with squared error.
    SquaredError,
    /// Linear decision function trained with the hinge loss.
    Hinge,
}

impl LossKind {
    fn to_byte(self) -> u8 {
        match self {
            LossKind::SoftmaxCrossEntropy => 0,
            LossKind::SquaredError => 1,
            LossKind::Hinge => 2,
        }
    }

    fn from_byte(b: u8) -> Result<LossKind, MlError> {
        match b {
            0 => Ok(LossKind::SoftmaxCrossEntropy),
            1 => Ok(LossKind::SquaredError),
            2 => Ok(LossKind::Hinge),
            other => Err(MlError::Format(format!("unknown loss kind {other}"))),
        }
    }
}

fn check_batch(mlp: &Mlp, xs: &[Vec<f64>], targets: &Targets) -> Result<(), MlError> {
    if xs.is_empty() {
        return Err(MlError::Invalid("empty batch".into()));
    }
    if xs.len() != targets.len() {
        return Err(MlError::Invalid(format!(
            "{} inputs but {} targets",
            xs.len(),
            targets.len()
        )));
    }
    if xs.iter().any(|x| x.len() != mlp.input_dim()) {
        return Err(MlError::Invalid("input width mismatch".into()));
    }
    match targets {
        Targets::Classes(c) => {
            if c.iter().any(|&c| c >= mlp.output_dim()) {
                return Err(MlError::Invalid("class index out of range".into()));
            }
        }
        Targets::Values(_) => {
            if mlp.output_dim() != 1 {
                return Err(MlError::Invalid(
                    "value targets need a single-output network".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Mean loss over the batch; no gradient. The reference path for
/// finite-difference probes.
pub fn batch_loss(mlp: &Mlp, xs: &[Vec<f64>], targets: &Targets) -> Result<f64, MlError> {
    check_batch(mlp, xs, targets)?;
    let n = xs.len() as f64;
    let mut total = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let y = mlp.forward(x);
        total += match targets {
            Targets::Classes(c) => {
                let p = softmax(&y);
                -(p[c[i]].max(f64::MIN_POSITIVE)).ln()
            }
            Targets::Values(v) => (y[0] - v[i]).powi(2),
        };
    }
    Ok(total / n)
}

/// Mean loss and its gradient with respect to every parameter, by
/// backpropagation through the ReLU stack.
pub fn batch_loss_grad(
    mlp: &Mlp,
    xs: &[Vec<f64>],
    targets: &Targets,
) -> Result<(f64, Vec<f64>), MlError> {
    check_batch(mlp, xs, targets)?;
    let layers = mlp.layout();
    let n = xs.len() as f64;
    let mut grad = vec![0.0; mlp.params.len()];
    let mut total = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let acts = mlp.forward_trace(x);
        let y = acts.last().unwrap();
        // Output delta is dLoss/dz for the linear final layer.
        let mut delta: Vec<f64> = match targets {
            Targets::Classes(c) => {
                let p = softmax(y);
                total += -(p[c[i]].max(f64::MIN_POSITIVE)).ln();
                let mut d = p;
                d[c[i]] -= 1.0;
                for dv in &mut d {
                    *dv /= n;
                }
                d
            }
            Targets::Values(v) => {
                let e = y[0] - v[i];
                total += e * e;
                vec![2.0 * e / n]
            }
        };
        for (l, &(woff, boff, n_in, n_out)) in layers.iter().enumerate().rev() {
            let a_in = &acts[l];
            for o in 0..n_out {
                let d = delta[o];
                grad[boff + o] += d;
                let grow = &mut grad[woff + o * n_in..woff + (o + 1) * n_in];
                for (g, ai) in grow.iter_mut().zip(a_in) {
                    *g += d * ai;
                }
            }
            if l == 0 {
                break;
            }
            // Push the delta through W and the ReLU mask of the layer below.
            let mut prev = vec![0.0; n_in];
            for (o, &d) in delta.iter().enumerate() {
                let row = &mlp.params[woff + o * n_in..woff + (o + 1) * n_in];
                for (p, wi) in prev.iter_mut().zip(row) {
                    *p += d * wi;
                }
            }
            for (p, &a) in prev.iter_mut().zip(a_in) {
                if a <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }
    Ok((total / n, grad))
}

// ---------------------------------------------------------------------------
// Adam

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> AdamConfig {
        AdamConfig { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First and second moment accumulators plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(n_params: usize) -> AdamState {
        AdamState { m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 }
    }
}

/// One bias-corrected Adam update:
/// `p -= lr * m_hat / (sqrt(v_hat) + eps)`, epsilon added after the root.
pub fn adam_step(params: &mut [f64], grad: &[f64], state: &mut AdamState, cfg: &AdamConfig) {
    assert_eq!(params.len(), grad.len());
    assert_eq!(params.len(), state.m.len());
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    for i in 0..params.len() {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

// ---------------------------------------------------------------------------
// Training loop

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Seeds the epoch shuffles; training is a pure function of
    /// (initial network, data, config).
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig { steps: 500, batch_size: 32, adam: AdamConfig::default(), seed: 0 }
    }
}

/// Completed-step report passed to the observer.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    /// 1-based completed step count.
    pub step: usize,
    /// Mini-batch loss at the parameters the step started from.
    pub loss: f64,
}

/// Mini-batch gradient descent with Adam. Samples are visited in epoch
/// order, reshuffled with the config seed whenever the pass ends; the
/// observer runs after every parameter update.
pub fn train(
    mlp: &mut Mlp,
    xs: &[Vec<f64>],
    targets: &Targets,
    cfg: &TrainConfig,
    mut observer: impl FnMut(&Mlp, &StepInfo),
) -> Result<(), MlError> {
    check_batch(mlp, xs, targets)?;
    if cfg.batch_size == 0 || cfg.steps == 0 {
        return Err(MlError::Invalid("steps and batch size must be positive".into()));
    }
    let batch = cfg.batch_size.min(xs.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut cursor = order.len(); // force an initial shuffle
    let mut state = AdamState::new(mlp.params.len());
    for step in 1..=cfg.steps {
        if cursor + batch > order.len() {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        let idxs = &order[cursor..cursor + batch];
        cursor += batch;
        let bx: Vec<Vec<f64>> = idxs.iter().map(|&i| xs[i].clone()).collect();
        let bt = targets.gather(idxs);
        let (loss, grad) = batch_loss_grad(mlp, &bx, &bt)?;
        if !loss.is_finite() {
            return Err(MlError::Diverged { step });
        }
        adam_step(&mut mlp.params, &grad, &mut state, &cfg.adam);
        observer(mlp, &StepInfo { step, loss });
    }
    Ok(())
}

/// One seeded shuffle of `0..n`, cut into disjoint train and test index
/// sets of the requested sizes.
pub fn split_indices(
    n: usize,
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), MlError> {
    if n_train == 0 || n_test == 0 || n_train + n_test > n {
        return Err(MlError::Invalid(format!(
            "cannot cut {n} rows into {n_train} train + {n_test} test"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = order[n_train..n_train + n_test].to_vec();
    order.truncate(n_train);
    Ok((order, test))
}

// ---------------------------------------------------------------------------
// Feature standardizer

/// Per-column shift and scale fitted on the training split only, stored
/// alongside the model so inference applies the exact same transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Column means and population standard deviations. A (near-)constant
    /// column gets scale 1 so transforming never divides by zero.
    pub fn fit(xs: &[Vec<f64>]) -> Standardizer {
        assert!(!xs.is_empty(), "cannot fit on an empty set");
        let d = xs[0].len();
        let n = xs.len() as f64;
        let mut mean = vec![0.0; d];
        for x in xs {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for x in xs {
            for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd < 1e-12 {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.mean.len(), "feature width mismatch");
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn transform_all(&self, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        xs.iter().map(|x| self.transform(x)).collect()
    }
}

// ---------------------------------------------------------------------------
// Linear SVM (Pegasos)

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    /// Regularization strength on the weights (the bias is left free).
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> SvmConfig {
        SvmConfig { lambda: 1e-4, epochs: 30, seed: 0 }
    }
}

impl LinearSvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.weights.len(), "feature width mismatch");
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) > 0.0
    }
}

/// Stochastic sub-gradient training of the hinge loss with step size
/// `1/(1 + lambda * t)`, the offset form of the `1/(lambda * t)` schedule
/// whose first step would otherwise be an unbounded `1/lambda`. Margin
/// violations pull the weights toward the sample; every update shrinks the
/// regularized weights; the bias is left unregularized. Needs both classes
/// present.
pub fn svm_train(xs: &[Vec<f64>], labels: &[bool], cfg: &SvmConfig) -> Result<LinearSvm, MlError> {
    if xs.is_empty() || xs.len() != labels.len() {
        return Err(MlError::Invalid("empty or mismatched training set".into()));
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(MlError::Invalid(
            "training set contains a single class; the margin is unbounded".into(),
        ));
    }
    let d = xs[0].len();
    if xs.iter().any(|x| x.len() != d) {
        return Err(MlError::Invalid("input width mismatch".into()));
    }
    let mut svm = LinearSvm { weights: vec![0.0; d], bias: 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut t = 0u64;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (1.0 + cfg.lambda * t as f64);
            let y = if labels[i] { 1.0 } else { -1.0 };
            let margin = y * svm.decision(&xs[i]);
            let shrink = 1.0 - eta * cfg.lambda;
            for w in &mut svm.weights {
                *w *= shrink;
            }
            if margin < 1.0 {
                for (w, v) in svm.weights.iter_mut().zip(&xs[i]) {
                    *w += eta * y * v;
                }
                svm.bias += eta * y;
            }
        }
    }
    Ok(svm)
}

// ---------------------------------------------------------------------------
// Model container

/// A trained model plus everything needed to run it on raw features.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub kind: LossKind,
    pub mlp: Mlp,
    pub standardizer: Standardizer,
}

impl ModelFile {
    /// A linear SVM stored as a single-layer network; the decision value
    /// is the lone output.
    pub fn from_svm(svm: &LinearSvm, standardizer: Standardizer) -> ModelFile {
        let dims = [svm.weights.len(), 1];
        let mut params = svm.weights.clone();
        params.push(svm.bias);
        ModelFile {
            kind: LossKind::Hinge,
            mlp: Mlp::from_params(&dims, params).expect("consistent by construction"),
            standardizer,
        }
    }

    pub fn to_svm(&self) -> Result<LinearSvm, MlError> {
        if self.kind != LossKind::Hinge || self.mlp.dims.len() != 2 || self.mlp.output_dim() != 1 {
            return Err(MlError::Invalid("model is not a linear decision function".into()));
        }
        let n = self.mlp.input_dim();
        Ok(LinearSvm {
            weights: self.mlp.params[..n].to_vec(),
            bias: self.mlp.params[n],
        })
    }
}

const MODEL_MAGIC: &[u8; 8] = b"GSELNET1";

pub fn model_to_bytes(model: &ModelFile) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.push(model.kind.to_byte());
    let dims = &model.mlp.dims;
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    let stats = &model.standardizer;
    out.extend_from_slice(&(stats.mean.len() as u32).to_le_bytes());
    for &m in &stats.mean {
        out.extend_from_slice(&m.to_le_bytes());
    }
    for &s in &stats.std {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out.extend_from_slice(&(model.mlp.params.len() as u64).to_le_bytes());
    for &p in &model.mlp.params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<ModelFile, MlError> {
    let mut cur = bytes;
    let mut take = |n: usize| -> Result<&[u8], MlError> {
        if cur.len() < n {
            return Err(MlError::Format("truncated".into()));
        }
        let (head, tail) = cur.split_at(n);
        cur = tail;
        Ok(head)
    };
    let magic = take(8)?;
    if magic != MODEL_MAGIC {
        return Err(MlError::Format("not a model file".into()));
    }
    let kind = LossKind::from_byte(take(1)?[0])?;
    let u32_at = |b: &[u8]| u32::from_le_bytes(b.try_into().unwrap()) as usize;
    let n_dims = u32_at(take(4)?);
    if !(2..=64).contains(&n_dims) {
        return Err(MlError::Format(format!("implausible layer count {n_dims}")));
    }
    let mut dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        dims.push(u32_at(take(4)?));
    }
    let n_feat = u32_at(take(4)?);
    let mut mean = Vec::with_capacity(n_feat);
    for _ in 0..n_feat {
        mean.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    let mut std = Vec::with_capacity(n_feat);
    for _ in 0..n_feat {
        std.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    let n_params = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    if n_params != param_count(&dims) {
        return Err(MlError::Format("parameter count disagrees with layer sizes".into()));
    }
    let mut params = Vec::with_capacity(n_params);
    for _ in 0..n_params {
        params.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    if !cur.is_empty() {
        return Err(MlError::Format("trailing bytes".into()));
    }
    if n_feat != dims[0] {
        return Err(MlError::Format("standardizer width disagrees with input layer".into()));
    }
    Ok(ModelFile {
        kind,
        mlp: Mlp::from_params(&dims, params)?,
        standardizer: Standardizer { mean, std },
    })
}

pub fn save_model(path: &Path, model: &ModelFile) -> Result<(), MlError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&model_to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelFile, MlError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    model_from_bytes(&bytes)
}

#[cfg(test)]
pub mod tests {
    use super::*;

    /// Central finite difference over every parameter.
    pub fn fd_gradient(mlp: &Mlp, xs: &[Vec<f64>], targets: &Targets, h: f64) -> Vec<f64> {
        let mut probe = mlp.clone();
        let mut grad = vec![0.0; mlp.params().len()];
        for (i, g) in grad.iter_mut().enumerate() {
            let orig = probe.params()[i];
            probe.params_mut()[i] = orig + h;
            let up = batch_loss(&probe, xs, targets).unwrap();
            probe.params_mut()[i] = orig - h;
            let down = batch_loss(&probe, xs, targets).unwrap();
            probe.params_mut()[i] = orig;
            *g = (up - down) / (2.0 * h);
        }
        grad
    }

    /// `||a-b|| / max(||a|| + ||b||, tiny)`.
    pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        diff / (na + nb).max(1e-12)
    }

    fn toy_batch(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect())
            .collect()
    }

    #[test]
    fn xavier_init_is_bounded_and_seeded() {
        let a = Mlp::new(&[23, 100, 2], 9);
        let b = Mlp::new(&[23, 100, 2], 9);
        assert_eq!(a, b);
        let c = Mlp::new(&[23, 100, 2], 10);
        assert_ne!(a, c);
        let layers = a.layout();
        for &(woff, boff, n_in, n_out) in &layers {
            let limit = (6.0 / (n_in + n_out) as f64).sqrt();
            for i in 0..n_out * n_in {
                assert!(a.params()[woff + i].abs() <= limit);
            }
            for i in 0..n_out {
                assert_eq!(a.params()[boff + i], 0.0, "biases start at zero");
            }
        }
    }

    #[test]
    fn backprop_matches_finite_differences_classifier() {
        let mlp = Mlp::new(&[4, 5, 3], 1);
        let xs = toy_batch(6, 4, 2);
        let targets = Targets::Classes(vec![0, 1, 2, 0, 1, 2]);
        let (_, g) = batch_loss_grad(&mlp, &xs, &targets).unwrap();
        let fd = fd_gradient(&mlp, &xs, &targets, 1e-5);
        assert!(rel_err(&g, &fd) < 1e-7, "rel err {}", rel_err(&g, &fd));
    }

    #[test]
    fn backprop_matches_finite_differences_regressor() {
        let mlp = Mlp::new(&[4, 6, 1], 3);
        let xs = toy_batch(6, 4, 4);
        let targets = Targets::Values(vec![0.3, -0.8, 1.2, 0.0, 2.0, -1.1]);
        let (_, g) = batch_loss_grad(&mlp, &xs, &targets).unwrap();
        let fd = fd_gradient(&mlp, &xs, &targets, 1e-5);
        assert!(rel_err(&g, &fd) < 1e-7, "rel err {}", rel_err(&g, &fd));
    }

    #[test]
    fn softmax_handles_huge_logits() {
        let p = softmax(&[1000.0, 999.0, -1000.0]);
        assert!(p.iter().all(|x| x.is_finite()));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[0] > p[1] && p[1] > p[2]);
    }

    #[test]
    fn adam_first_step_matches_hand_computation() {
        // From zero state with unit gradient the bias-corrected moments are
        // both exactly 1, so the step is lr / (1 + eps).
        let mut params = vec![0.0];
        let mut state = AdamState::new(1);
        let cfg = AdamConfig::default();
        adam_step(&mut params, &[1.0], &mut state, &cfg);
        let want = -cfg.learning_rate / (1.0 + cfg.epsilon);
        assert!((params[0] - want).abs() < 1e-15);
        assert!((params[0] + 0.001).abs() < 1e-9);
    }

    #[test]
    fn adam_second_step_matches_hand_computation() {
        let cfg = AdamConfig::default();
        let mut params = vec![0.0];
        let mut state = AdamState::new(1);
        adam_step(&mut params, &[1.0], &mut state, &cfg);
        adam_step(&mut params, &[0.5], &mut state, &cfg);
        // Unrolled by hand.
        let m2 = 0.9 * 0.1 + 0.1 * 0.5;
        let v2 = 0.999 * 0.001 + 0.001 * 0.25;
        let m_hat = m2 / (1.0 - 0.9f64.powi(2));
        let v_hat = v2 / (1.0 - 0.999f64.powi(2));
        let first = -cfg.learning_rate / (1.0 + cfg.epsilon);
        let want = first - cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        assert!((params[0] - want).abs() < 1e-15);
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        // Two Gaussian-ish blobs, linearly separable.
        let mut xs = toy_batch(60, 3, 5);
        let mut classes = Vec::new();
        for (i, x) in xs.iter_mut().enumerate() {
            let c = i % 2;
            for v in x.iter_mut() {
                *v += if c == 0 { 2.0 } else { -2.0 };
            }
            classes.push(c);
        }
        let targets = Targets::Classes(classes);
        let cfg = TrainConfig { steps: 300, seed: 7, ..TrainConfig::default() };

        let mut m1 = Mlp::new(&[3, 8, 2], 11);
        let before = batch_loss(&m1, &xs, &targets).unwrap();
        train(&mut m1, &xs, &targets, &cfg, |_, _| {}).unwrap();
        let after = batch_loss(&m1, &xs, &targets).unwrap();
        assert!(after < before * 0.5, "loss should fall: {before} -> {after}");
        let correct = xs
            .iter()
            .zip(match &targets {
                Targets::Classes(c) => c,
                _ => unreachable!(),
            })
            .filter(|(x, &c)| argmax(&m1.forward(x)) == c)
            .count();
        assert!(correct as f64 / xs.len() as f64 > 0.95);

        let mut m2 = Mlp::new(&[3, 8, 2], 11);
        let mut calls = 0;
        train(&mut m2, &xs, &targets, &cfg, |_, _| calls += 1).unwrap();
        assert_eq!(calls, 300);
        assert_eq!(m1, m2, "same seeds must give identical parameters");
    }

    #[test]
    fn standardizer_centers_and_guards_constant_columns() {
        let xs = vec![
            vec![1.0, 5.0, 3.0],
            vec![2.0, 5.0, 1.0],
            vec![3.0, 5.0, 2.0],
        ];
        let st = Standardizer::fit(&xs);
        assert_eq!(st.std[1], 1.0, "constant column gets unit scale");
        let t = st.transform_all(&xs);
        for col in 0..3 {
            let mean: f64 = t.iter().map(|r| r[col]).sum::<f64>() / 3.0;
            assert!(mean.abs() < 1e-12);
        }
        assert!(t.iter().all(|r| r[1] == 0.0));
    }

    #[test]
    fn svm_separates_blobs_and_rejects_single_class() {
        let mut xs = toy_batch(80, 2, 6);
        let mut labels = Vec::new();
        for (i, x) in xs.iter_mut().enumerate() {
            let pos = i % 2 == 0;
            x[0] += if pos { 3.0 } else { -3.0 };
            labels.push(pos);
        }
        let svm = svm_train(&xs, &labels, &SvmConfig::default()).unwrap();
        let correct = xs
            .iter()
            .zip(&labels)
            .filter(|(x, &l)| svm.predict(x) == l)
            .count();
        assert!(correct as f64 / xs.len() as f64 > 0.95);

        let one_class = vec![true; xs.len()];
        assert!(svm_train(&xs, &one_class, &SvmConfig::default()).is_err());
    }

    #[test]
    fn model_container_round_trips() {
        let mlp = Mlp::new(&[23, 100, 2], 3);
        let stats = Standardizer { mean: vec![0.5; 23], std: vec![2.0; 23] };
        let model = ModelFile {
            kind: LossKind::SoftmaxCrossEntropy,
            mlp,
            standardizer: stats,
        };
        let bytes = model_to_bytes(&model);
        let back = model_from_bytes(&bytes).unwrap();
        assert_eq!(model, back);

        let svm = LinearSvm { weights: vec![0.1, -0.2, 0.3], bias: 0.7 };
        let st = Standardizer { mean: vec![0.0; 3], std: vec![1.0; 3] };
        let wrapped = ModelFile::from_svm(&svm, st);
        let bytes = model_to_bytes(&wrapped);
        let back = model_from_bytes(&bytes).unwrap().to_svm().unwrap();
        assert_eq!(svm, back);

        assert!(model_from_bytes(b"not a model").is_err());
        let mut corrupt = model_to_bytes(&model);
        corrupt[0] = b'X';
        assert!(model_from_bytes(&corrupt).is_err());
        corrupt = model_to_bytes(&model);
        corrupt.truncate(40);
        assert!(model_from_bytes(&corrupt).is_err());
    }

    #[test]
    fn forward_on_known_weights() {
        // One hidden unit each, hand-checkable: y = w2*relu(w1*x + b1) + b2.
        let mlp = Mlp::from_params(&[1, 1, 1], vec![2.0, -1.0, 3.0, 0.5]).unwrap();
        assert_eq!(mlp.forward(&[1.0])[0], 3.0 * (2.0 - 1.0) + 0.5);
        // Negative pre-activation is clipped by the ReLU.
        assert_eq!(mlp.forward(&[0.0])[0], 0.5);
    }
}
