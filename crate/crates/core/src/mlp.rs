//! Small fully connected regressors for the optimal-gain manifold.
//!
//! Hidden layers use `tanh`, the output layer is affine. Inputs and outputs
//! are standardised with statistics of the training split. Training is
//! full-batch Adam on the mean squared error.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::guidance::{gain_bounds, requires_two_phase, FINAL_GAIN_MAX, FINAL_GAIN_MIN};
use crate::sweep::{DatasetRecord, Problem};

pub const FORMAT_NAME: &str = "ppn-gain-mlp";
pub const FORMAT_VERSION: u32 = 1;
const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation value.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
}

impl MlpSpec {
    pub fn new(layer_sizes: Vec<usize>) -> Self {
        Self { layer_sizes, hidden_activation: Activation::Tanh, output_activation: Activation::Identity }
    }

    /// `(heading0, desired, N_f) -> N_ori*`
    pub fn model_a() -> Self {
        Self::new(vec![3, 32, 16, 1])
    }

    /// `(heading0, desired) -> (N_f*, N_ori*)`
    pub fn model_b() -> Self {
        Self::new(vec![2, 32, 64, 16, 2])
    }

    pub fn for_problem(problem: Problem) -> Self {
        match problem {
            Problem::A => Self::model_a(),
            Problem::B => Self::model_b(),
        }
    }

    pub fn inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn outputs(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.layer_sizes.len() < 2 || self.layer_sizes.contains(&0) {
            return Err(ModelError::Invalid(format!("bad layer sizes {:?}", self.layer_sizes)));
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!("{:?}", self.layer_sizes)
    }
}

/// Affine layer `y = W x + b` with `W` row-major `[outputs][inputs]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], biases: vec![0.0; outputs] }
    }

    fn affine(&self, x: &[f64], out: &mut [f64]) {
        for (o, z) in out.iter_mut().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            *z = self.biases[o] + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
        }
    }
}

/// Per-feature standardisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    pub fn identity(dim: usize) -> Self {
        Self { mean: vec![0.0; dim], std: vec![1.0; dim] }
    }

    /// Fit mean and (population) standard deviation, floored at 1e-8.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let first = rows.first().ok_or(ModelError::EmptyBatch)?;
        let dim = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            check_dim(dim, r.len())?;
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var.into_iter().map(|v| (v / n).sqrt().max(STD_FLOOR)).collect();
        Ok(Self { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mean).zip(&self.std).map(|((x, m), s)| (x - m) / s).collect()
    }

    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.mean).zip(&self.std).map(|((z, m), s)| z * s + m).collect()
    }
}

fn check_dim(expected: usize, found: usize) -> Result<(), ModelError> {
    if expected != found {
        return Err(ModelError::Dimension { expected, found });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs: usize,
    pub train_fraction: f64,
    pub final_loss: f64,
    pub train_rows: usize,
    pub test_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub problem: Option<Problem>,
    pub spec: MlpSpec,
    pub layers: Vec<Dense>,
    pub input_normalizer: Normalizer,
    pub output_normalizer: Normalizer,
    pub meta: Option<TrainingMeta>,
}

/// Build a model with uniform `±sqrt(6 / (fan_in + fan_out))` weights and zero biases.
pub fn init_model(spec: &MlpSpec, seed: u64) -> MlpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = spec
        .layer_sizes
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let mut layer = Dense::zeros(fan_in, fan_out);
            for x in layer.weights.iter_mut() {
                *x = rng.gen_range(-limit..=limit);
            }
            layer
        })
        .collect();
    MlpModel {
        problem: None,
        spec: spec.clone(),
        layers,
        input_normalizer: Normalizer::identity(spec.inputs()),
        output_normalizer: Normalizer::identity(spec.outputs()),
        meta: None,
    }
}

/// Per-layer activations of one input (input first) plus backprop scratch,
/// reused across samples.
struct Tape {
    activations: Vec<Vec<f64>>,
    delta: Vec<f64>,
    prev: Vec<f64>,
    offsets: Vec<(usize, usize)>,
}

impl Tape {
    fn new(model: &MlpModel) -> Self {
        let widest = *model.spec.layer_sizes.iter().max().unwrap();
        Self {
            activations: model.spec.layer_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            delta: Vec::with_capacity(widest),
            prev: Vec::with_capacity(widest),
            offsets: model.offsets(),
        }
    }
}

impl MlpModel {
    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.spec.output_activation
        } else {
            self.spec.hidden_activation
        }
    }

    /// Forward pass in normalised units.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        check_dim(self.spec.inputs(), x.len())?;
        let mut a = x.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.outputs];
            layer.affine(&a, &mut z);
            let act = self.activation(l);
            z.iter_mut().for_each(|v| *v = act.apply(*v));
            a = z;
        }
        Ok(a)
    }

    fn record(&self, x: &[f64], tape: &mut Tape) {
        tape.activations[0].copy_from_slice(x);
        for (l, layer) in self.layers.iter().enumerate() {
            let (done, rest) = tape.activations.split_at_mut(l + 1);
            let z = &mut rest[0];
            layer.affine(&done[l], z);
            let act = self.activation(l);
            z.iter_mut().for_each(|v| *v = act.apply(*v));
        }
    }

    /// Accumulate `d(upstream . output) / d(params)` into `grad` (flat layout of
    /// [`MlpModel::parameters`]) for the input last passed to `record`.
    fn backward(&self, tape: &mut Tape, upstream: &[f64], grad: &mut [f64]) {
        tape.delta.clear();
        tape.delta.extend_from_slice(upstream);
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let act = self.activation(l);
            for (d, a) in tape.delta.iter_mut().zip(&tape.activations[l + 1]) {
                *d *= act.derivative_from_output(*a);
            }
            let input = &tape.activations[l];
            let (w_off, b_off) = tape.offsets[l];
            for (o, &d) in tape.delta.iter().enumerate() {
                let g = &mut grad[w_off + o * layer.inputs..w_off + (o + 1) * layer.inputs];
                for (g, x) in g.iter_mut().zip(input) {
                    *g += d * x;
                }
                grad[b_off + o] += d;
            }
            if l > 0 {
                tape.prev.clear();
                tape.prev.resize(layer.inputs, 0.0);
                for (o, &d) in tape.delta.iter().enumerate() {
                    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (p, w) in tape.prev.iter_mut().zip(row) {
                        *p += d * w;
                    }
                }
                std::mem::swap(&mut tape.delta, &mut tape.prev);
            }
        }
    }

    /// `(weights offset, biases offset)` of each layer in the flat parameter vector.
    fn offsets(&self) -> Vec<(usize, usize)> {
        let mut off = 0;
        self.layers
            .iter()
            .map(|l| {
                let w = off;
                let b = w + l.weights.len();
                off = b + l.biases.len();
                (w, b)
            })
            .collect()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn parameters(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases).copied()).collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<(), ModelError> {
        check_dim(self.spec.parameter_count(), params.len())?;
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.biases.iter_mut()).for_each(|p| *p = it.next().unwrap());
        }
        Ok(())
    }

    /// Gradient of one output w.r.t. every parameter at `x` (normalised units).
    pub fn output_gradient(&self, x: &[f64], output: usize) -> Result<Vec<f64>, ModelError> {
        check_dim(self.spec.inputs(), x.len())?;
        if output >= self.spec.outputs() {
            return Err(ModelError::Dimension { expected: self.spec.outputs(), found: output });
        }
        let mut upstream = vec![0.0; self.spec.outputs()];
        upstream[output] = 1.0;
        let mut grad = vec![0.0; self.spec.parameter_count()];
        let mut tape = Tape::new(self);
        self.record(x, &mut tape);
        self.backward(&mut tape, &upstream, &mut grad);
        Ok(grad)
    }

    /// MSE loss over a batch (normalised units) and its parameter gradient.
    pub fn loss_and_gradient(&self, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<(f64, Vec<f64>), ModelError> {
        if xs.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        check_dim(xs.len(), ys.len())?;
        let n = xs.len() as f64;
        let mut grad = vec![0.0; self.spec.parameter_count()];
        let mut loss = 0.0;
        let mut upstream = vec![0.0; self.spec.outputs()];
        let mut tape = Tape::new(self);
        for (x, y) in xs.iter().zip(ys) {
            check_dim(self.spec.inputs(), x.len())?;
            check_dim(self.spec.outputs(), y.len())?;
            self.record(x, &mut tape);
            let pred = tape.activations.last().unwrap();
            for ((u, p), t) in upstream.iter_mut().zip(pred).zip(y) {
                let e = p - t;
                loss += e * e;
                *u = 2.0 * e / n;
            }
            self.backward(&mut tape, &upstream, &mut grad);
        }
        Ok((loss / n, grad))
    }

    /// Prediction in original units.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        check_dim(self.spec.inputs(), x.len())?;
        let z = self.forward(&self.input_normalizer.normalize(x))?;
        Ok(self.output_normalizer.denormalize(&z))
    }

    pub fn expect_problem(&self, problem: Problem) -> Result<(), ModelError> {
        let expected = MlpSpec::for_problem(problem);
        if self.problem != Some(problem) || self.spec.inputs() != expected.inputs() || self.spec.outputs() != expected.outputs() {
            return Err(ModelError::SpecMismatch {
                expected: format!("model {problem} {}", expected.describe()),
                found: format!(
                    "model {} {}",
                    self.problem.map(|p| p.to_string()).unwrap_or_else(|| "?".into()),
                    self.spec.describe()
                ),
            });
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ModelError> {
        self.spec.validate()?;
        if self.layers.len() + 1 != self.spec.layer_sizes.len() {
            return Err(ModelError::Invalid(format!("{} layers for spec {}", self.layers.len(), self.spec.describe())));
        }
        for (i, (l, w)) in self.layers.iter().zip(self.spec.layer_sizes.windows(2)).enumerate() {
            if l.inputs != w[0] || l.outputs != w[1] || l.weights.len() != w[0] * w[1] || l.biases.len() != w[1] {
                return Err(ModelError::Invalid(format!("layers[{i}]: shape does not match spec {}", self.spec.describe())));
            }
            if !l.weights.iter().chain(&l.biases).all(|p| p.is_finite()) {
                return Err(ModelError::Invalid(format!("layers[{i}]: non-finite parameter")));
            }
        }
        for (name, n, dim) in [
            ("input_normalizer", &self.input_normalizer, self.spec.inputs()),
            ("output_normalizer", &self.output_normalizer, self.spec.outputs()),
        ] {
            if n.mean.len() != dim || n.std.len() != dim {
                return Err(ModelError::Invalid(format!("{name}: expected dimension {dim}")));
            }
            if !n.std.iter().all(|s| s.is_finite() && *s > 0.0) || !n.mean.iter().all(|m| m.is_finite()) {
                return Err(ModelError::Invalid(format!("{name}: invalid statistics")));
            }
        }
        Ok(())
    }
}

/// Mean over samples of the squared Euclidean error.
pub fn mse_loss(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<f64, ModelError> {
    if predictions.is_empty() {
        return Err(ModelError::EmptyBatch);
    }
    check_dim(predictions.len(), targets.len())?;
    let mut total = 0.0;
    for (p, t) in predictions.iter().zip(targets) {
        check_dim(p.len(), t.len())?;
        total += p.iter().zip(t).map(|(p, t)| (p - t) * (p - t)).sum::<f64>();
    }
    Ok(total / predictions.len() as f64)
}

/// Coefficient of determination per output dimension.
pub fn r_squared(predictions: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
    if targets.len() < 2 {
        return Err(ModelError::TooFewRows { needed: 2, found: targets.len() });
    }
    check_dim(targets.len(), predictions.len())?;
    let dim = targets[0].len();
    let n = targets.len() as f64;
    (0..dim)
        .map(|k| {
            let mean = targets.iter().map(|t| t[k]).sum::<f64>() / n;
            let ss_tot: f64 = targets.iter().map(|t| (t[k] - mean).powi(2)).sum();
            let ss_res: f64 = predictions.iter().zip(targets).map(|(p, t)| (t[k] - p[k]).powi(2)).sum();
            if ss_tot == 0.0 {
                return Err(ModelError::ZeroVariance(k));
            }
            Ok(1.0 - ss_res / ss_tot)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Fraction of rows used for training; the rest is held out.
    pub train_fraction: f64,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl TrainConfig {
    pub fn for_problem(problem: Problem) -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: match problem {
                Problem::A => 20_000,
                Problem::B => 40_000,
            },
            train_fraction: 0.8,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Input and target vectors of a record for a problem.
pub fn features(record: &DatasetRecord, problem: Problem) -> (Vec<f64>, Vec<f64>) {
    match problem {
        Problem::A => (vec![record.heading0_deg, record.desired_deg, record.n_f], vec![record.n_ori_opt]),
        Problem::B => (vec![record.heading0_deg, record.desired_deg], vec![record.n_f, record.n_ori_opt]),
    }
}

/// Seeded shuffle split into (train, test) row indices.
pub fn split_indices(rows: usize, train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..rows).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((rows as f64) * train_fraction).round() as usize;
    let test = idx.split_off(n_train.min(rows));
    (idx, test)
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: MlpModel,
    /// Training loss (normalised units) at the start of each epoch, then the final loss.
    pub loss_history: Vec<f64>,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * grad[i];
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }
}

/// Train on raw `(input, target)` rows.
pub fn train_rows(inputs: &[Vec<f64>], targets: &[Vec<f64>], spec: &MlpSpec, cfg: &TrainConfig) -> Result<Trained, ModelError> {
    spec.validate()?;
    check_dim(inputs.len(), targets.len())?;
    if inputs.len() < 2 {
        return Err(ModelError::TooFewRows { needed: 2, found: inputs.len() });
    }
    let (train_idx, test_idx) = split_indices(inputs.len(), cfg.train_fraction, cfg.seed);
    if train_idx.is_empty() {
        return Err(ModelError::TooFewRows { needed: 1, found: 0 });
    }
    let train_x: Vec<Vec<f64>> = train_idx.iter().map(|&i| inputs[i].clone()).collect();
    let train_y: Vec<Vec<f64>> = train_idx.iter().map(|&i| targets[i].clone()).collect();
    let input_normalizer = Normalizer::fit(&train_x)?;
    let output_normalizer = Normalizer::fit(&train_y)?;
    let xs: Vec<Vec<f64>> = train_x.iter().map(|x| input_normalizer.normalize(x)).collect();
    let ys: Vec<Vec<f64>> = train_y.iter().map(|y| output_normalizer.normalize(y)).collect();

    let mut model = init_model(spec, cfg.seed);
    model.input_normalizer = input_normalizer;
    model.output_normalizer = output_normalizer;
    let mut params = model.parameters();
    let mut adam = Adam::new(params.len());
    let mut history = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..cfg.epochs {
        let (loss, grad) = model.loss_and_gradient(&xs, &ys)?;
        if !loss.is_finite() {
            return Err(ModelError::Diverged { epoch, loss });
        }
        history.push(loss);
        adam.step(&mut params, &grad, cfg);
        model.set_parameters(&params)?;
    }
    let preds: Vec<Vec<f64>> = xs.iter().map(|x| model.forward(x)).collect::<Result<_, _>>()?;
    let final_loss = mse_loss(&preds, &ys)?;
    if !final_loss.is_finite() {
        return Err(ModelError::Diverged { epoch: cfg.epochs, loss: final_loss });
    }
    history.push(final_loss);
    model.meta = Some(TrainingMeta {
        seed: cfg.seed,
        epochs: cfg.epochs,
        train_fraction: cfg.train_fraction,
        final_loss,
        train_rows: train_idx.len(),
        test_rows: test_idx.len(),
    });
    Ok(Trained { model, loss_history: history, train_rows: train_idx, test_rows: test_idx })
}

/// Train a surrogate for `problem` on dataset records.
pub fn train(records: &[DatasetRecord], problem: Problem, spec: &MlpSpec, cfg: &TrainConfig) -> Result<Trained, ModelError> {
    if records.len() < 10 {
        return Err(ModelError::TooFewRows { needed: 10, found: records.len() });
    }
    let expected = MlpSpec::for_problem(problem);
    if spec.inputs() != expected.inputs() || spec.outputs() != expected.outputs() {
        return Err(ModelError::SpecMismatch { expected: expected.describe(), found: spec.describe() });
    }
    let (xs, ys): (Vec<_>, Vec<_>) = records.iter().map(|r| features(r, problem)).unzip();
    let mut trained = train_rows(&xs, &ys, spec, cfg)?;
    trained.model.problem = Some(problem);
    Ok(trained)
}

/// Rows of a dataset of `rows` records that were held out when `model` was
/// trained, if the model records its split and the row count matches.
pub fn held_out_rows(model: &MlpModel, rows: usize) -> Option<Vec<usize>> {
    let meta = model.meta.as_ref()?;
    if meta.train_rows + meta.test_rows != rows {
        return None;
    }
    Some(split_indices(rows, meta.train_fraction, meta.seed).1)
}

/// R^2 per output of `model` on the given records (original units).
pub fn evaluate(model: &MlpModel, records: &[DatasetRecord], problem: Problem) -> Result<Vec<f64>, ModelError> {
    model.expect_problem(problem)?;
    let mut preds = Vec::with_capacity(records.len());
    let mut targets = Vec::with_capacity(records.len());
    for r in records {
        let (x, y) = features(r, problem);
        preds.push(model.predict(&x)?);
        targets.push(y);
    }
    r_squared(&preds, &targets)
}

/// Surrogate gain query result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainPrediction {
    /// Network output for `N_ori*`.
    pub n_ori_raw: f64,
    /// Network output for `N_f*` (model B only).
    pub n_f_raw: Option<f64>,
    /// `N_ori` clamped into the orientation-gain bounds of the query.
    pub n_ori: f64,
    /// Final gain used for the bounds: the query's for model A, the clamped prediction for model B.
    pub n_f: f64,
    pub warnings: Vec<String>,
}

pub const TRAINED_HEADING0_DEG: (f64, f64) = (10.0, 170.0);
pub const TRAINED_DESIRED_DEG: (f64, f64) = (-170.0, -10.0);

/// Single-shot near-optimal gains for an engagement with zero initial LOS
/// angle. Model A needs `n_f`; model B must be called without it.
pub fn predict_gains(model: &MlpModel, heading0_deg: f64, desired_deg: f64, n_f: Option<f64>) -> Result<GainPrediction, ModelError> {
    let problem = if n_f.is_some() { Problem::A } else { Problem::B };
    model.expect_problem(problem)?;
    let mut warnings = Vec::new();
    let (lo, hi) = TRAINED_HEADING0_DEG;
    if !(lo..=hi).contains(&heading0_deg) {
        warnings.push(format!("alpha_p0 {heading0_deg} deg outside trained range [{lo}, {hi}]"));
    }
    let (lo, hi) = TRAINED_DESIRED_DEG;
    if !(lo..=hi).contains(&desired_deg) {
        warnings.push(format!("alpha_pf_des {desired_deg} deg outside trained range [{lo}, {hi}]"));
    }
    let (h, d) = (heading0_deg.to_radians(), desired_deg.to_radians());
    if !requires_two_phase(0.0, h, d) {
        warnings.push("engagement does not require a two-phase schedule".into());
    }
    let (n_ori_raw, n_f_raw, n_f_used) = match n_f {
        Some(nf) => {
            if !(FINAL_GAIN_MIN..=FINAL_GAIN_MAX).contains(&nf) {
                warnings.push(format!("N_f {nf} outside [{FINAL_GAIN_MIN}, {FINAL_GAIN_MAX}]"));
            }
            let y = model.predict(&[heading0_deg, desired_deg, nf])?;
            (y[0], None, nf)
        }
        None => {
            let y = model.predict(&[heading0_deg, desired_deg])?;
            (y[1], Some(y[0]), y[0].clamp(FINAL_GAIN_MIN, FINAL_GAIN_MAX))
        }
    };
    let n_ori = match gain_bounds(0.0, h, d, n_f_used.clamp(FINAL_GAIN_MIN, FINAL_GAIN_MAX)) {
        Ok(b) => n_ori_raw.clamp(b.n_min, b.n_max),
        Err(e) => {
            warnings.push(format!("no orientation-gain bounds: {e}"));
            n_ori_raw
        }
    };
    Ok(GainPrediction { n_ori_raw, n_f_raw, n_ori, n_f: n_f_used, warnings })
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    model: MlpModel,
}

#[derive(Deserialize)]
struct Envelope {
    format: String,
    version: u32,
}

impl MlpModel {
    pub fn to_json(&self) -> Result<String, ModelError> {
        let file = ModelFile { format: FORMAT_NAME.into(), version: FORMAT_VERSION, model: self.clone() };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let env: Envelope = serde_json::from_str(text)?;
        if env.format != FORMAT_NAME {
            return Err(ModelError::Invalid(format!("format {:?}, expected {FORMAT_NAME:?}", env.format)));
        }
        if env.version != FORMAT_VERSION {
            return Err(ModelError::Version { found: env.version, expected: FORMAT_VERSION });
        }
        let file: ModelFile = serde_json::from_str(text)?;
        file.model.validate()?;
        Ok(file.model)
    }
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<(), ModelError> {
    let text = model.to_json()?;
    fs::write(path, text).map_err(|source| ModelError::Io { path: path.to_path_buf(), source })
}

pub fn load_model(path: &Path) -> Result<MlpModel, ModelError> {
    let text = fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.to_path_buf(), source })?;
    MlpModel::from_json(&text)
}
