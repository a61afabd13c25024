//! Fully connected classifiers: Xavier-uniform weights, zero biases, one
//! activation scalar per hidden layer, inverted dropout on hidden outputs,
//! softmax cross-entropy head, and plain SGD.

use serde::{Deserialize, Serialize};

use crate::activations::{ActivationSpec, ActivationState};
use crate::data::{batches, Dataset};
use crate::error::{Error, Result};
use crate::numerics::{Axis, Matrix, RandomStream, ReduceOp};

/// Layer widths of the eight benchmark networks. The final width is the
/// class count.
pub const PRESETS: [(&str, &[usize]); 8] = [
    ("DNN-3A", &[1024, 1024, 10]),
    ("DNN-3B", &[1024, 512, 10]),
    ("DNN-4", &[400, 300, 100, 10]),
    ("DNN-5A", &[256, 128, 64, 32, 10]),
    ("DNN-5B", &[512, 512, 512, 512, 10]),
    ("DNN-5C", &[1024, 1024, 512, 256, 10]),
    ("DNN-6", &[512, 256, 128, 64, 32, 10]),
    ("DNN-7", &[784, 512, 256, 128, 64, 32, 10]),
];

pub fn preset_widths(name: &str) -> Option<&'static [usize]> {
    PRESETS
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, w)| *w)
}

fn default_dropout() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub name: String,
    pub input_dim: usize,
    /// Widths of every layer after the input, ending with the class count.
    pub layers: Vec<usize>,
    pub activation: ActivationSpec,
    #[serde(default = "default_dropout")]
    pub dropout: f64,
}

impl NetworkConfig {
    pub fn new(
        name: impl Into<String>,
        input_dim: usize,
        layers: Vec<usize>,
        activation: impl Into<ActivationSpec>,
        dropout: f64,
    ) -> Result<Self> {
        let cfg = NetworkConfig {
            name: name.into(),
            input_dim,
            layers,
            activation: activation.into(),
            dropout,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// One of the named benchmark topologies.
    pub fn preset(
        name: &str,
        input_dim: usize,
        activation: impl Into<ActivationSpec>,
        dropout: f64,
    ) -> Result<Self> {
        let widths = preset_widths(name).ok_or_else(|| {
            Error::Domain(format!(
                "unknown network preset '{name}' (known: {})",
                PRESETS.map(|(n, _)| n).join(", ")
            ))
        })?;
        let canonical = PRESETS.iter().find(|(n, _)| n.eq_ignore_ascii_case(name)).unwrap().0;
        NetworkConfig::new(canonical, input_dim, widths.to_vec(), activation, dropout)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.layers.is_empty() || self.layers.contains(&0) {
            return Err(Error::Domain(format!(
                "network '{}' needs a positive input width and at least one positive layer width",
                self.name
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Domain(format!(
                "dropout rate {} is outside [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }

    pub fn num_classes(&self) -> usize {
        *self.layers.last().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// `fan_in x fan_out`.
    pub weights: Matrix,
    /// `1 x fan_out`.
    pub bias: Matrix,
    /// Present on hidden layers only.
    pub activation: Option<ActivationState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    config: NetworkConfig,
    layers: Vec<DenseLayer>,
    /// Bumped by every parameter update; caches from older generations are stale.
    generation: u64,
}

/// Everything `backward` needs from a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    generation: u64,
    /// Input to each layer (the batch itself for layer 0).
    inputs: Vec<Matrix>,
    /// Pre-activations of each hidden layer.
    pre: Vec<Matrix>,
    /// Dropout masks of each hidden layer, already divided by keep_prob.
    masks: Vec<Option<Matrix>>,
    pub logits: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Matrix>,
    /// dL/dθ per hidden layer; `None` for fixed activations and the output layer.
    pub activation: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Xavier-uniform network with zero biases.
pub fn init_network(config: &NetworkConfig, rng: &mut RandomStream) -> Result<Network> {
    config.validate()?;
    let mut fan_in = config.input_dim;
    let n = config.layers.len();
    let mut layers = Vec::with_capacity(n);
    for (i, &fan_out) in config.layers.iter().enumerate() {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        layers.push(DenseLayer {
            weights: rng.uniform(-limit, limit, fan_in, fan_out)?,
            bias: Matrix::zeros(1, fan_out),
            activation: (i + 1 < n).then(|| config.activation.init_state()),
        });
        fan_in = fan_out;
    }
    Ok(Network {
        config: config.clone(),
        layers,
        generation: 0,
    })
}

impl Network {
    /// Builds a network from explicit layers. Every layer except the last
    /// must carry an activation state.
    pub fn from_layers(config: NetworkConfig, layers: Vec<DenseLayer>) -> Result<Self> {
        config.validate()?;
        if layers.len() != config.layers.len() {
            return Err(Error::Shape(format!(
                "config lists {} layers, got {}",
                config.layers.len(),
                layers.len()
            )));
        }
        let mut fan_in = config.input_dim;
        for (i, (l, &w)) in layers.iter().zip(&config.layers).enumerate() {
            let hidden = i + 1 < layers.len();
            if l.weights.shape() != (fan_in, w) || l.bias.shape() != (1, w) || l.activation.is_some() != hidden {
                return Err(Error::Shape(format!(
                    "layer {i} expected weights {fan_in}x{w}, bias 1x{w}{}",
                    if hidden { " and an activation state" } else { " and no activation" }
                )));
            }
            fan_in = w;
        }
        Ok(Network {
            config,
            layers,
            generation: 0,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Direct parameter access; invalidates outstanding caches.
    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        self.generation += 1;
        &mut self.layers
    }

    pub fn activation_params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .filter_map(|l| l.activation.map(|s| s.value))
            .collect()
    }

    /// Runs the network. Training mode applies dropout and returns a cache
    /// for [`Network::backward`]; evaluation mode returns no cache and never
    /// touches `rng`.
    pub fn forward(
        &self,
        x: &Matrix,
        mode: Mode,
        rng: &mut RandomStream,
    ) -> Result<(Matrix, Option<ForwardCache>)> {
        match mode {
            Mode::Eval => Ok((self.predict(x)?, None)),
            Mode::Train => {
                let (logits, cache) = self.forward_train(x, rng)?;
                Ok((logits, Some(cache)))
            }
        }
    }

    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        self.run(x, None).map(|(logits, _)| logits)
    }

    pub fn forward_train(&self, x: &Matrix, rng: &mut RandomStream) -> Result<(Matrix, ForwardCache)> {
        let (logits, cache) = self.run(x, Some(rng))?;
        Ok((logits, cache.expect("training pass always records a cache")))
    }

    fn run(&self, x: &Matrix, mut rng: Option<&mut RandomStream>) -> Result<(Matrix, Option<ForwardCache>)> {
        if x.cols() != self.config.input_dim {
            return Err(Error::Shape(format!(
                "network '{}' expects {} input features, batch has {}",
                self.config.name,
                self.config.input_dim,
                x.cols()
            )));
        }
        let train = rng.is_some();
        let keep = 1.0 - self.config.dropout;
        let spec = &self.config.activation;
        let mut inputs = Vec::new();
        let mut pre = Vec::new();
        let mut masks = Vec::new();
        let mut a = x.clone();
        for layer in &self.layers {
            let z = a.matmul(&layer.weights)?.add_row_vector(&layer.bias)?;
            if train {
                inputs.push(a);
            }
            match layer.activation {
                None => a = z,
                Some(state) => {
                    let mut h = z.map(|v| spec.forward(v, state.value))?;
                    let mask = match rng.as_deref_mut() {
                        Some(r) if self.config.dropout > 0.0 => {
                            let mut m = r.bernoulli_mask(keep, h.rows(), h.cols())?;
                            m.scale_in_place(1.0 / keep);
                            h = h.zip_map(&m, |v, k| v * k)?;
                            Some(m)
                        }
                        _ => None,
                    };
                    if train {
                        pre.push(z);
                        masks.push(mask);
                    }
                    a = h;
                }
            }
        }
        let cache = train.then(|| ForwardCache {
            generation: self.generation,
            inputs,
            pre,
            masks,
            logits: a.clone(),
        });
        Ok((a, cache))
    }

    /// Gradients of the mean softmax cross-entropy loss.
    pub fn backward(&self, cache: &ForwardCache, probs: &Matrix, labels: &[usize]) -> Result<Gradients> {
        if probs.shape() != cache.logits.shape() || labels.len() != probs.rows() {
            return Err(Error::Shape(format!(
                "probabilities {}x{} with {} labels do not match cached logits {}x{}",
                probs.rows(),
                probs.cols(),
                labels.len(),
                cache.logits.rows(),
                cache.logits.cols()
            )));
        }
        let batch = probs.rows() as f64;
        let mut delta = probs.clone();
        for (r, &l) in labels.iter().enumerate() {
            if l >= probs.cols() {
                return Err(Error::Domain(format!("label {l} out of range for {} classes", probs.cols())));
            }
            delta.set(r, l, delta.get(r, l) - 1.0);
        }
        delta.scale_in_place(1.0 / batch);
        self.backward_from_output(cache, &delta)
    }

    /// Backpropagates an arbitrary gradient with respect to the network output.
    pub fn backward_from_output(&self, cache: &ForwardCache, d_output: &Matrix) -> Result<Gradients> {
        if cache.generation != self.generation || cache.inputs.len() != self.layers.len() {
            return Err(Error::State(
                "forward cache is stale: parameters changed since the training pass".into(),
            ));
        }
        if d_output.shape() != cache.logits.shape() {
            return Err(Error::Shape(format!(
                "output gradient {}x{} does not match logits {}x{}",
                d_output.rows(),
                d_output.cols(),
                cache.logits.rows(),
                cache.logits.cols()
            )));
        }
        let spec = &self.config.activation;
        let n = self.layers.len();
        let mut weights = vec![Matrix::zeros(0, 0); n];
        let mut biases = vec![Matrix::zeros(0, 0); n];
        let mut activation = vec![None; n];
        let mut delta = d_output.clone();
        for i in (0..n).rev() {
            let layer = &self.layers[i];
            weights[i] = cache.inputs[i].t_matmul(&delta)?;
            biases[i] = delta.reduce(Axis::Col, ReduceOp::Sum)?;
            if i == 0 {
                break;
            }
            // Gradient w.r.t. the (post-dropout) output of layer i-1.
            let mut upstream = delta.matmul_t(&layer.weights)?;
            let below = &self.layers[i - 1];
            let state = below.activation.expect("hidden layers carry activation state");
            if let Some(mask) = &cache.masks[i - 1] {
                upstream = upstream.zip_map(mask, |g, m| g * m)?;
            }
            let z = &cache.pre[i - 1];
            if spec.is_trainable() {
                let g: f64 = upstream
                    .as_slice()
                    .iter()
                    .zip(z.as_slice())
                    .map(|(&g, &z)| g * spec.dparam(z, state.value))
                    .sum();
                activation[i - 1] = Some(g);
            }
            delta = upstream.zip_map(z, |g, z| g * spec.dinput(z, state.value))?;
        }
        Ok(Gradients {
            weights,
            biases,
            activation,
        })
    }

    /// `p -= lr * g` for weights, biases and trainable activation scalars.
    pub fn sgd_step(&mut self, grads: &Gradients, learning_rate: f64) -> Result<()> {
        let n = self.layers.len();
        if grads.weights.len() != n || grads.biases.len() != n || grads.activation.len() != n {
            return Err(Error::Shape(format!(
                "gradients cover {} layers, network has {n}",
                grads.weights.len()
            )));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if grads.weights[i].shape() != layer.weights.shape() || grads.biases[i].shape() != layer.bias.shape() {
                return Err(Error::Shape(format!("gradient shapes do not match layer {i}")));
            }
        }
        let trainable = self.config.activation.is_trainable();
        for (i, layer) in self.layers.iter_mut().enumerate() {
            layer.weights.axpy_in_place(-learning_rate, &grads.weights[i])?;
            layer.bias.axpy_in_place(-learning_rate, &grads.biases[i])?;
            if let (Some(state), Some(g), true) = (layer.activation.as_mut(), grads.activation[i], trainable) {
                state.grad = g;
                state.value -= learning_rate * g;
            }
        }
        if self.layers.iter().any(|l| !l.weights.is_finite() || !l.bias.is_finite()) {
            return Err(Error::Domain("parameters diverged to non-finite values".into()));
        }
        self.generation += 1;
        Ok(())
    }
}

/// Mean cross-entropy over the batch and the softmax probabilities.
pub fn softmax_cross_entropy(logits: &Matrix, labels: &[usize]) -> Result<(f64, Matrix)> {
    let (rows, cols) = logits.shape();
    if labels.len() != rows {
        return Err(Error::Shape(format!("{rows} logit rows but {} labels", labels.len())));
    }
    let mut probs = Vec::with_capacity(rows * cols);
    let mut total = 0.0;
    for (r, &label) in labels.iter().enumerate() {
        if label >= cols {
            return Err(Error::Domain(format!("label {label} out of range for {cols} classes")));
        }
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|&z| (z - max).exp()).sum();
        let log_sum = sum.ln();
        total += log_sum - (row[label] - max);
        probs.extend(row.iter().map(|&z| (z - max).exp() / sum));
    }
    Ok((total / rows.max(1) as f64, Matrix::from_vec(rows, cols, probs)?))
}

/// Mean squared error and its gradient `(pred - target) / batch`, which is
/// the gradient of half the MSE.
pub fn mse_loss(pred: &Matrix, target: &Matrix) -> Result<(f64, Matrix)> {
    let diff = pred.zip_map(target, |p, t| p - t)?;
    let n = pred.rows().max(1) as f64;
    let mse = diff.as_slice().iter().map(|d| d * d).sum::<f64>() / (n * pred.cols().max(1) as f64);
    let grad = diff.map(|d| d / n)?;
    Ok((mse, grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(rename = "lr", default = "TrainConfig::default_lr")]
    pub learning_rate: f64,
    #[serde(rename = "dropout", default = "default_dropout")]
    pub dropout_rate: f64,
    #[serde(rename = "batch", default = "TrainConfig::default_batch")]
    pub batch_size: usize,
    #[serde(default = "TrainConfig::default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
}

impl TrainConfig {
    fn default_lr() -> f64 {
        0.01
    }
    fn default_batch() -> usize {
        64
    }
    fn default_epochs() -> usize {
        50
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            dropout_rate: 0.5,
            batch_size: 64,
            epochs: 50,
            seed: 0,
        }
    }
}

fn check_dataset(net: &Network, dataset: &Dataset) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::Domain("cannot train on an empty dataset".into()));
    }
    let cfg = net.config();
    if dataset.dim() != cfg.input_dim || dataset.num_classes() != cfg.num_classes() {
        return Err(Error::Shape(format!(
            "network '{}' is {} -> {} but the dataset has {} features and {} classes",
            cfg.name,
            cfg.input_dim,
            cfg.num_classes(),
            dataset.dim(),
            dataset.num_classes()
        )));
    }
    Ok(())
}

/// One pass over the shuffled dataset. Returns the sample-weighted mean loss.
/// Dropout comes from the network's own config.
pub fn train_epoch(net: &mut Network, dataset: &Dataset, cfg: &TrainConfig, rng: &mut RandomStream) -> Result<f64> {
    check_dataset(net, dataset)?;
    let mut weighted = 0.0;
    for batch in batches(dataset, cfg.batch_size, rng)? {
        let (logits, cache) = net.forward_train(&batch.features, rng)?;
        let (loss, probs) = softmax_cross_entropy(&logits, &batch.labels)?;
        let grads = net.backward(&cache, &probs, &batch.labels)?;
        net.sgd_step(&grads, cfg.learning_rate)?;
        weighted += loss * batch.labels.len() as f64;
    }
    Ok(weighted / dataset.len() as f64)
}

/// Fraction of samples whose highest logit (lowest index on ties) matches
/// the label, without dropout. Empty datasets score 0.
pub fn evaluate(net: &Network, dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Ok(0.0);
    }
    const CHUNK: usize = 1024;
    let mut correct = 0usize;
    let idx: Vec<usize> = (0..dataset.len()).collect();
    for chunk in idx.chunks(CHUNK) {
        let x = dataset.features().select_rows(chunk);
        let pred = net.predict(&x)?.argmax_rows();
        correct += pred
            .iter()
            .zip(chunk)
            .filter(|(&p, &i)| p == dataset.labels()[i])
            .count();
    }
    Ok(correct as f64 / dataset.len() as f64)
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub network: Network,
    /// Mean training loss of each epoch.
    pub epoch_losses: Vec<f64>,
}

/// Initializes and trains a network. Initialization draws from child stream
/// 0 of `cfg.seed` and training from child stream 1. The network's dropout
/// rate is replaced by `cfg.dropout_rate`.
pub fn fit(
    config: &NetworkConfig,
    dataset: &Dataset,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<TrainedModel> {
    let mut config = config.clone();
    config.dropout = cfg.dropout_rate;
    let root = RandomStream::new(cfg.seed);
    let mut network = init_network(&config, &mut root.child(0))?;
    let mut rng = root.child(1);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let loss = train_epoch(&mut network, dataset, cfg, &mut rng)?;
        on_epoch(epoch + 1, loss);
        epoch_losses.push(loss);
    }
    Ok(TrainedModel {
        network,
        epoch_losses,
    })
}
