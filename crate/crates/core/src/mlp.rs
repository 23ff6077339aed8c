//! Feed-forward correctness classifier: F → 32 → 16 → 1, ReLU hidden layers,
//! logistic output, class-weighted binary cross-entropy, Adam.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::keyed_rng;

pub const HIDDEN: [usize; 2] = [32, 16];
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// `(incorrect, correct)`; `None` derives balanced weights from the labels.
    pub class_weights: Option<(f64, f64)>,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            epochs: 100,
            batch_size: 32,
            class_weights: None,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.learning_rate, self.adam_beta1, self.adam_beta2, self.adam_epsilon];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("optimizer hyperparameters must be positive and finite"));
        }
        if self.adam_beta1 >= 1.0 || self.adam_beta2 >= 1.0 {
            return Err(Error::invalid("Adam betas must be below 1"));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("epochs and batch_size must be positive"));
        }
        if let Some((a, b)) = self.class_weights {
            if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
                return Err(Error::invalid("class weights must be positive and finite"));
            }
        }
        Ok(())
    }
}

/// Dense layer; `weights` is row-major `input × output`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub input: usize,
    pub output: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn zeros(input: usize, output: usize) -> Self {
        Dense {
            input,
            output,
            weights: vec![0.0; input * output],
            bias: vec![0.0; output],
        }
    }

    #[inline]
    pub fn w(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.output + j]
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut z = self.bias.clone();
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.weights[i * self.output..(i + 1) * self.output];
            for (zj, wij) in z.iter_mut().zip(row) {
                *zj += xi * wij;
            }
        }
        z
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.bias)
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.bias.iter_mut())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub format_version: u32,
    pub layer_dims: Vec<usize>,
    pub layers: Vec<Dense>,
    pub train_config: TrainConfig,
    pub seed: u64,
}

/// Parameter-shaped gradient.
pub type Gradients = Vec<Dense>;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-log σ(z)` for label 1 and `-log(1-σ(z))` for label 0, computed stably.
fn bce_with_logit(z: f64, y: bool) -> f64 {
    let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
    softplus - if y { z } else { 0.0 }
}

/// Balanced inverse-frequency weights `N / (2 N_c)`, as `(incorrect, correct)`.
pub fn class_weights(labels: &[bool]) -> Result<(f64, f64)> {
    let n = labels.len() as f64;
    let pos = labels.iter().filter(|&&y| y).count() as f64;
    let neg = n - pos;
    if pos == 0.0 || neg == 0.0 {
        return Err(Error::invalid("class weights need both classes present"));
    }
    Ok((n / (2.0 * neg), n / (2.0 * pos)))
}

/// He-uniform initialization: `U(-√(6/fan_in), √(6/fan_in))`, zero biases.
pub fn init_model(feature_dim: usize, seed: u64) -> Result<MlpModel> {
    if feature_dim == 0 {
        return Err(Error::invalid("feature_dim must be at least 1"));
    }
    let dims = vec![feature_dim, HIDDEN[0], HIDDEN[1], 1];
    let mut rng = keyed_rng(seed, "mlp/init");
    let layers = dims
        .windows(2)
        .map(|d| {
            let bound = init_bound(d[0]);
            let mut layer = Dense::zeros(d[0], d[1]);
            for w in &mut layer.weights {
                *w = rng.random_range(-bound..bound);
            }
            layer
        })
        .collect();
    Ok(MlpModel {
        format_version: FORMAT_VERSION,
        layer_dims: dims,
        layers,
        train_config: TrainConfig::default(),
        seed,
    })
}

pub fn init_bound(fan_in: usize) -> f64 {
    (6.0 / fan_in as f64).sqrt()
}

struct Activations {
    /// Inputs to each layer (x, h1, h2).
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of each layer.
    pre: Vec<Vec<f64>>,
}

impl MlpModel {
    pub fn feature_dim(&self) -> usize {
        self.layer_dims[0]
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_dim() {
            return Err(Error::Dimension {
                expected: self.feature_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn activations(&self, x: &[f64]) -> Activations {
        let mut inputs = vec![x.to_vec()];
        let mut pre = Vec::with_capacity(self.layers.len());
        for (k, layer) in self.layers.iter().enumerate() {
            let z = layer.apply(inputs.last().unwrap());
            if k + 1 < self.layers.len() {
                inputs.push(z.iter().map(|v| v.max(0.0)).collect());
            }
            pre.push(z);
        }
        Activations { inputs, pre }
    }

    pub fn logit(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.activations(x).pre.last().unwrap()[0])
    }

    /// Probability that the answer is correct.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.logit(x)?))
    }

    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|x| self.forward(x)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_dims.len() != self.layers.len() + 1 || self.layer_dims.len() < 2 {
            return Err(Error::invalid("layer_dims does not match layer count"));
        }
        for (k, layer) in self.layers.iter().enumerate() {
            let (i, o) = (self.layer_dims[k], self.layer_dims[k + 1]);
            if layer.input != i || layer.output != o || layer.weights.len() != i * o || layer.bias.len() != o {
                return Err(Error::Dimension {
                    expected: i * o,
                    got: layer.weights.len(),
                });
            }
            if layer.params().any(|p| !p.is_finite()) {
                return Err(Error::invalid(format!("layer {k} has non-finite parameters")));
            }
        }
        if *self.layer_dims.last().unwrap() != 1 {
            return Err(Error::invalid("output layer must have one unit"));
        }
        self.train_config.validate()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: MlpModel = serde_json::from_str(text)?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::invalid(format!("unsupported model format version {}", m.format_version)));
        }
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// `true` (correct) iff the probability is at least `threshold`.
pub fn predict_label(model: &MlpModel, x: &[f64], threshold: f64) -> Result<bool> {
    Ok(model.forward(x)? >= threshold)
}

/// Class-weighted BCE over a batch and its gradient. With `mean` the loss is
/// divided by the batch size; otherwise it is the plain weighted sum.
pub fn loss_and_gradients(
    model: &MlpModel,
    xs: &[Vec<f64>],
    ys: &[bool],
    weights: (f64, f64),
    mean: bool,
) -> Result<(f64, Gradients)> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let scale = if mean { 1.0 / xs.len() as f64 } else { 1.0 };
    let mut grads: Gradients = model.layers.iter().map(|l| Dense::zeros(l.input, l.output)).collect();
    let mut loss = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        model.check_dim(x)?;
        let act = model.activations(x);
        let w = if y { weights.1 } else { weights.0 };
        let z = act.pre.last().unwrap()[0];
        loss += scale * w * bce_with_logit(z, y);

        let mut delta = vec![scale * w * (sigmoid(z) - f64::from(u8::from(y)))];
        for k in (0..model.layers.len()).rev() {
            let layer = &model.layers[k];
            let input = &act.inputs[k];
            let g = &mut grads[k];
            for (i, &a) in input.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (j, &d) in delta.iter().enumerate() {
                    g.weights[i * layer.output + j] += a * d;
                }
            }
            for (gb, &d) in g.bias.iter_mut().zip(&delta) {
                *gb += d;
            }
            if k > 0 {
                let prev_pre = &act.pre[k - 1];
                delta = (0..layer.input)
                    .map(|i| {
                        if prev_pre[i] <= 0.0 {
                            0.0
                        } else {
                            delta.iter().enumerate().map(|(j, &d)| layer.w(i, j) * d).sum()
                        }
                    })
                    .collect();
            }
        }
    }
    Ok((loss, grads))
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, model: &mut MlpModel, grads: &Gradients, cfg: &TrainConfig) {
        self.t += 1;
        let bc1 = 1.0 - cfg.adam_beta1.powi(self.t);
        let bc2 = 1.0 - cfg.adam_beta2.powi(self.t);
        let params = model.layers.iter_mut().flat_map(Dense::params_mut);
        let g = grads.iter().flat_map(Dense::params);
        for (((p, &g), m), v) in params.zip(g).zip(&mut self.m).zip(&mut self.v) {
            *m = cfg.adam_beta1 * *m + (1.0 - cfg.adam_beta1) * g;
            *v = cfg.adam_beta2 * *v + (1.0 - cfg.adam_beta2) * g * g;
            *p -= cfg.learning_rate * (*m / bc1) / ((*v / bc2).sqrt() + cfg.adam_epsilon);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub model: MlpModel,
    /// Mean weighted loss over each epoch's mini-batches.
    pub epoch_losses: Vec<f64>,
}

/// Trains from the seeded initialization with shuffled mini-batches.
pub fn train(features: &[Vec<f64>], labels: &[bool], config: &TrainConfig, seed: u64) -> Result<MlpModel> {
    train_with_history(features, labels, config, seed).map(|o| o.model)
}

pub fn train_with_history(features: &[Vec<f64>], labels: &[bool], config: &TrainConfig, seed: u64) -> Result<TrainOutcome> {
    config.validate()?;
    if features.len() != labels.len() {
        return Err(Error::Dimension {
            expected: features.len(),
            got: labels.len(),
        });
    }
    let dim = features.first().map(Vec::len).ok_or_else(|| Error::invalid("no training rows"))?;
    if features.iter().any(|r| r.len() != dim) {
        return Err(Error::invalid("feature rows have differing lengths"));
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("features contain non-finite values"));
    }
    let weights = match config.class_weights {
        Some(w) => w,
        None => class_weights(labels)?,
    };
    if !labels.iter().any(|&y| y) || labels.iter().all(|&y| y) {
        return Err(Error::invalid("training needs both classes present"));
    }

    let mut model = init_model(dim, seed)?;
    model.train_config = TrainConfig {
        class_weights: Some(weights),
        ..config.clone()
    };
    let n_params = model.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum();
    let mut adam = Adam::new(n_params);
    let mut rng = keyed_rng(seed, &format!("mlp/shuffle/{}", config.shuffle_seed));
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut bx: Vec<Vec<f64>> = Vec::with_capacity(config.batch_size);
    let mut by: Vec<bool> = Vec::with_capacity(config.batch_size);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            bx.clear();
            by.clear();
            bx.extend(chunk.iter().map(|&i| features[i].clone()));
            by.extend(chunk.iter().map(|&i| labels[i]));
            let (loss, grads) = loss_and_gradients(&model, &bx, &by, weights, true)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, loss });
            }
            adam.step(&mut model, &grads, config);
            total += loss;
            batches += 1;
        }
        epoch_losses.push(total / batches as f64);
    }
    model.validate()?;
    Ok(TrainOutcome { model, epoch_losses })
}

/// Per-column mean and standard deviation fitted on training rows; constant
/// columns are left unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or_else(|| Error::invalid("no rows to fit"))?;
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            if r.len() != dim {
                return Err(Error::Dimension { expected: dim, got: r.len() });
            }
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        let mut std = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in std.iter_mut().zip(r).zip(&mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        let std = std.into_iter().map(|v| if v > 0.0 { v.sqrt() } else { 1.0 }).collect();
        Ok(Standardizer { mean, std })
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter()
            .map(|r| {
                if r.len() != self.mean.len() {
                    return Err(Error::Dimension {
                        expected: self.mean.len(),
                        got: r.len(),
                    });
                }
                Ok(r.iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| (v - m) / s).collect())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::seeded_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_rows(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = seeded_rng(seed);
        (0..n).map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()
    }

    #[test]
    fn class_weight_examples() {
        assert_eq!(class_weights(&[true, false]).unwrap(), (1.0, 1.0));
        let labels: Vec<bool> = (0..100).map(|i| i < 10).collect();
        let (w0, w1) = class_weights(&labels).unwrap();
        assert!((w0 - 100.0 / 180.0).abs() < 1e-12);
        assert!((w0 - 0.556).abs() < 5e-4);
        assert_eq!(w1, 5.0);
        let labels: Vec<bool> = (0..1000).map(|i| i < 89).collect();
        assert!((class_weights(&labels).unwrap().1 - 5.62).abs() < 0.01);
        assert!(class_weights(&[true, true]).is_err());
        assert!(class_weights(&[]).is_err());
    }

    #[test]
    fn init_shapes_bounds_and_determinism() {
        let a = init_model(28, 0).unwrap();
        let b = init_model(28, 0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, init_model(28, 1).unwrap());
        let shapes: Vec<(usize, usize)> = a.layers.iter().map(|l| (l.input, l.output)).collect();
        assert_eq!(shapes, vec![(28, 32), (32, 16), (16, 1)]);
        for l in &a.layers {
            let bound = init_bound(l.input);
            assert!(l.weights.iter().all(|w| w.abs() <= bound));
            assert!(l.bias.iter().all(|&b| b == 0.0));
        }
        assert!(init_model(0, 0).is_err());
    }

    #[test]
    fn zero_model_outputs_half() {
        let mut m = init_model(3, 0).unwrap();
        for l in &mut m.layers {
            l.params_mut().for_each(|p| *p = 0.0);
        }
        assert_eq!(m.forward(&[1.0, -5.0, 100.0]).unwrap(), 0.5);
        assert!(predict_label(&m, &[0.0, 0.0, 0.0], 0.5).unwrap());
        assert!(predict_label(&m, &[0.0, 0.0, 0.0], 0.0).unwrap());
        assert!(!predict_label(&m, &[0.0, 0.0, 0.0], 1.0 + 1e-9).unwrap());
        assert!(m.forward(&[1.0]).is_err());
    }

    /// Straight-line re-implementation of the three layer maps.
    fn reference_forward(m: &MlpModel, x: &[f64]) -> f64 {
        let (l1, l2, l3) = (&m.layers[0], &m.layers[1], &m.layers[2]);
        let mut h1 = [0.0; 32];
        for j in 0..32 {
            let mut s = l1.bias[j];
            for i in 0..x.len() {
                s += x[i] * l1.weights[i * 32 + j];
            }
            h1[j] = if s > 0.0 { s } else { 0.0 };
        }
        let mut h2 = [0.0; 16];
        for j in 0..16 {
            let mut s = l2.bias[j];
            for i in 0..32 {
                s += h1[i] * l2.weights[i * 16 + j];
            }
            h2[j] = if s > 0.0 { s } else { 0.0 };
        }
        let mut z = l3.bias[0];
        for i in 0..16 {
            z += h2[i] * l3.weights[i];
        }
        1.0 / (1.0 + (-z).exp())
    }

    #[test]
    fn forward_matches_reference() {
        let mut m = init_model(7, 11).unwrap();
        let mut rng = seeded_rng(5);
        for l in &mut m.layers {
            l.bias.iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
        }
        for x in random_rows(50, 7, 9) {
            let got = m.forward(&x).unwrap();
            assert!((got - reference_forward(&m, &x)).abs() < 1e-12);
            assert!(got > 0.0 && got < 1.0);
        }
    }

    fn flat(g: &Gradients) -> Vec<f64> {
        g.iter().flat_map(|l| l.params().copied().collect::<Vec<_>>()).collect()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = init_model(6, 3).unwrap();
        let xs = random_rows(10, 6, 4);
        let ys: Vec<bool> = (0..10).map(|i| i % 3 == 0).collect();
        let w = class_weights(&ys).unwrap();
        let (_, grads) = loss_and_gradients(&m, &xs, &ys, w, true).unwrap();
        let analytic = flat(&grads);
        let h = 1e-6;
        let mut numeric = Vec::with_capacity(analytic.len());
        let n_params = analytic.len();
        for idx in 0..n_params {
            let perturb = |delta: f64| {
                let mut p = m.clone();
                *p.layers.iter_mut().flat_map(Dense::params_mut).nth(idx).unwrap() += delta;
                loss_and_gradients(&p, &xs, &ys, w, true).unwrap().0
            };
            numeric.push((perturb(h) - perturb(-h)) / (2.0 * h));
        }
        let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(numeric.iter().map(|a| a * a).sum::<f64>().sqrt());
        assert!(diff / norm <= 1e-4, "relative error {}", diff / norm);
    }

    #[test]
    fn oversampling_equals_weighting() {
        // 12 incorrect, 4 correct: duplicating each minority row 3× with unit
        // weights gives the same summed gradient as weighting the minority by 3.
        let m = init_model(4, 8).unwrap();
        let xs = random_rows(16, 4, 21);
        let ys: Vec<bool> = (0..16).map(|i| i < 4).collect();
        let (_, weighted) = loss_and_gradients(&m, &xs, &ys, (1.0, 3.0), false).unwrap();

        let mut ox = xs.clone();
        let mut oy = ys.clone();
        for i in 0..4 {
            for _ in 0..2 {
                ox.push(xs[i].clone());
                oy.push(true);
            }
        }
        let (_, over) = loss_and_gradients(&m, &ox, &oy, (1.0, 1.0), false).unwrap();
        for (a, b) in flat(&weighted).iter().zip(flat(&over)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_weights_scales_gradient() {
        let m = init_model(4, 2).unwrap();
        let xs = random_rows(12, 4, 1);
        let ys: Vec<bool> = (0..12).map(|i| i % 4 == 0).collect();
        let (l1, g1) = loss_and_gradients(&m, &xs, &ys, (0.7, 2.1), true).unwrap();
        let (l2, g2) = loss_and_gradients(&m, &xs, &ys, (1.75, 5.25), true).unwrap();
        assert!((l2 - 2.5 * l1).abs() < 1e-12);
        for (a, b) in flat(&g1).iter().zip(flat(&g2)) {
            assert!((b - 2.5 * a).abs() < 1e-12);
        }
    }

    fn separable(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = seeded_rng(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        while xs.len() < n {
            let x: Vec<f64> = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let s = x[0] + x[1];
            if s.abs() < 0.1 {
                continue;
            }
            ys.push(s > 0.0);
            xs.push(x);
        }
        (xs, ys)
    }

    #[test]
    fn learns_separable_data() {
        let (xs, ys) = separable(400, 7);
        let out = train_with_history(&xs, &ys, &TrainConfig::default(), 0).unwrap();
        let acc = xs
            .iter()
            .zip(&ys)
            .filter(|(x, &y)| predict_label(&out.model, x, 0.5).unwrap() == y)
            .count() as f64
            / xs.len() as f64;
        assert!(acc >= 0.99, "training accuracy {acc}");
        let l = &out.epoch_losses;
        let head: f64 = l[..10].iter().sum::<f64>() / 10.0;
        let tail: f64 = l[l.len() - 10..].iter().sum::<f64>() / 10.0;
        assert!(tail < head);
        // smoothed (10-epoch window) loss never rises
        let smooth: Vec<f64> = l.windows(10).map(|w| w.iter().sum::<f64>() / 10.0).collect();
        assert!(smooth.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    #[test]
    fn null_labels_give_chance_accuracy() {
        let xs = random_rows(600, 5, 30);
        let mut rng = seeded_rng(31);
        let ys: Vec<bool> = (0..600).map(|_| rng.random_bool(0.5)).collect();
        let m = train(&xs[..400], &ys[..400], &TrainConfig { epochs: 30, ..Default::default() }, 0).unwrap();
        let acc = xs[400..]
            .iter()
            .zip(&ys[400..])
            .filter(|(x, &y)| predict_label(&m, x, 0.5).unwrap() == y)
            .count() as f64
            / 200.0;
        assert!((acc - 0.5).abs() <= 0.1, "held-out accuracy {acc}");
    }

    #[test]
    fn training_is_deterministic_and_roundtrips() {
        let (xs, ys) = separable(80, 3);
        let cfg = TrainConfig { epochs: 5, ..Default::default() };
        let a = train(&xs, &ys, &cfg, 4).unwrap();
        assert_eq!(a, train(&xs, &ys, &cfg, 4).unwrap());
        assert_ne!(a, train(&xs, &ys, &cfg, 5).unwrap());
        let back = MlpModel::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(a, back);
        let bits = |m: &MlpModel| m.layers.iter().flat_map(|l| l.params().map(|p| p.to_bits()).collect::<Vec<_>>()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&back));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        a.save(&path).unwrap();
        assert_eq!(MlpModel::load(&path).unwrap(), a);
    }

    #[test]
    fn training_errors() {
        let cfg = TrainConfig::default();
        assert!(train(&[vec![1.0], vec![2.0]], &[true, true], &cfg, 0).is_err());
        assert!(train(&[vec![1.0], vec![f64::NAN]], &[true, false], &cfg, 0).is_err());
        assert!(train(&[vec![1.0]], &[true, false], &cfg, 0).is_err());
        assert!(train(&[], &[], &cfg, 0).is_err());
        let bad = TrainConfig { batch_size: 0, ..Default::default() };
        assert!(train(&[vec![1.0], vec![2.0]], &[true, false], &bad, 0).is_err());
        // exploding learning rate trips the finite-loss check or yields a finite model
        let wild = TrainConfig { learning_rate: 1e300, epochs: 3, ..Default::default() };
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 * 1e10]).collect();
        let ys: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        if let Ok(m) = train(&xs, &ys, &wild, 0) {
            assert!(m.validate().is_ok());
        }
    }

    #[test]
    fn corrupt_model_rejected() {
        let mut m = init_model(2, 0).unwrap();
        m.layers[1].weights.pop();
        assert!(MlpModel::from_json(&serde_json::to_string(&m).unwrap()).is_err());
        let mut m = init_model(2, 0).unwrap();
        m.format_version = 99;
        assert!(MlpModel::from_json(&serde_json::to_string(&m).unwrap()).is_err());
    }

    #[test]
    fn standardizer() {
        let rows = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        let s = Standardizer::fit(&rows).unwrap();
        assert_eq!(s.transform(&rows).unwrap(), vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
        assert!(s.transform(&[vec![1.0]]).is_err());
    }

    proptest! {
        #[test]
        fn output_in_unit_interval(x in prop::collection::vec(-1e3f64..1e3, 4), seed in 0u64..50) {
            let p = init_model(4, seed).unwrap().forward(&x).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!(p.is_finite());
        }
    }
}
