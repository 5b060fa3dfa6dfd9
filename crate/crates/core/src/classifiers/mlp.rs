use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{sigmoid, sigmoid_derivative, ClassificationProblem, Classifier, Instance, POSITIVE};
use crate::error::{check_len, Error, Result};

use super::{log_loss, require_binary, LogisticRegressionModel, TrainConfig, TrainSummary};

const BATCH_SIZE: usize = 32;
const MOMENTUM: f64 = 0.9;
/// Epochs without loss improvement before training stops early.
const PATIENCE: usize = 10;

/// Hidden-layer nonlinearity. The output unit is always a logistic sigmoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Logistic,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Logistic => "logistic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "logistic" | "sigmoid" => Ok(Activation::Logistic),
            other => Err(Error::config(format!("unknown activation '{other}'"))),
        }
    }

    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Logistic => sigmoid(z),
        }
    }

    /// Derivative expressed through pre-activation `z` and output `a`.
    /// Relu uses 0 at the kink.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Logistic => a * (1.0 - a),
        }
    }
}

/// Fully connected layer, `weights` is `outputs x inputs` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl DenseLayer {
    pub fn new(inputs: usize, outputs: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::config("layer dimensions must be positive"));
        }
        check_len(inputs * outputs, weights.len())?;
        check_len(outputs, bias.len())?;
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("layer parameters must be finite".into()));
        }
        Ok(Self {
            inputs,
            outputs,
            weights,
            bias,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.outputs {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            out.push(row.iter().zip(input).map(|(w, v)| w * v).sum::<f64>() + self.bias[o]);
        }
    }

    /// `W^T delta`.
    fn backward_input(&self, delta: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.inputs];
        for (o, d) in delta.iter().enumerate() {
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            for (gi, w) in g.iter_mut().zip(row) {
                *gi += d * w;
            }
        }
        g
    }
}

/// Multilayer perceptron with a single logistic output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<DenseLayer>,
    activation: Activation,
    labels: [String; 2],
}

struct Trace {
    /// Pre-activations per layer.
    pre: Vec<Vec<f64>>,
    /// Layer inputs; `inputs[0]` is `x`, the last entry feeds the output layer.
    inputs: Vec<Vec<f64>>,
}

impl MlpModel {
    pub fn new(layers: Vec<DenseLayer>, activation: Activation, labels: [String; 2]) -> Result<Self> {
        let last = layers
            .last()
            .ok_or_else(|| Error::config("an MLP needs at least an output layer"))?;
        if last.outputs != 1 {
            return Err(Error::config("the output layer must have a single unit"));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::config(format!(
                    "layer with {} outputs cannot feed a layer with {} inputs",
                    pair[0].outputs, pair[1].inputs
                )));
            }
        }
        Ok(Self {
            layers,
            activation,
            labels,
        })
    }

    /// Zero-hidden-layer network computing the same function as `lr`.
    pub fn from_logistic(lr: &LogisticRegressionModel) -> Self {
        let k = lr.weights().len();
        let layer = DenseLayer::new(k, 1, lr.weights().to_vec(), vec![lr.bias()])
            .expect("logistic parameters are valid");
        Self {
            layers: vec![layer],
            activation: Activation::Relu,
            labels: lr.labels().clone(),
        }
    }

    /// Randomly initialized network with the given hidden widths.
    pub fn random(inputs: usize, hidden: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = init_layers(inputs, hidden, activation, &mut rng)?;
        Self::new(layers, activation, ["0".into(), "1".into()])
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn labels(&self) -> &[String; 2] {
        &self.labels
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.outputs)
            .collect()
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut current = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(layer.outputs);
            layer.forward(&current, &mut z);
            let next = if i < last {
                z.iter().map(|&v| self.activation.apply(v)).collect()
            } else {
                Vec::new()
            };
            inputs.push(std::mem::replace(&mut current, next));
            pre.push(z);
        }
        Trace { pre, inputs }
    }

    /// Backpropagates `d loss / d z_out = seed` and returns per-layer
    /// pre-activation deltas (first layer first).
    fn deltas(&self, trace: &Trace, seed: f64) -> Vec<Vec<f64>> {
        let n = self.layers.len();
        let mut deltas = vec![Vec::new(); n];
        deltas[n - 1] = vec![seed];
        for i in (0..n - 1).rev() {
            let upstream = self.layers[i + 1].backward_input(&deltas[i + 1]);
            let activated = &trace.inputs[i + 1];
            deltas[i] = upstream
                .iter()
                .zip(&trace.pre[i])
                .zip(activated)
                .map(|((g, &z), &a)| g * self.activation.derivative(z, a))
                .collect();
        }
        deltas
    }

    fn input_gradient(&self, x: &[f64], label: usize) -> Vec<f64> {
        let trace = self.trace(x);
        let z = trace.pre.last().expect("output layer")[0];
        let sign = if label == POSITIVE { 1.0 } else { -1.0 };
        let deltas = self.deltas(&trace, sign * sigmoid_derivative(z));
        self.layers[0].backward_input(&deltas[0])
    }
}

impl Classifier for MlpModel {
    fn num_features(&self) -> usize {
        self.layers[0].inputs
    }

    fn log_odds(&self, x: &[f64]) -> f64 {
        let mut current = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.forward(&current, &mut next);
            if i < last {
                for v in next.iter_mut() {
                    *v = self.activation.apply(*v);
                }
            }
            std::mem::swap(&mut current, &mut next);
        }
        current[0]
    }

    fn gradient(&self, x: &[f64], label: usize) -> Option<Vec<f64>> {
        Some(self.input_gradient(x, label))
    }
}

/// Reverse-mode gradient of `C_l` with respect to the input.
pub fn mlp_gradient(model: &MlpModel, x: &Instance, label: usize) -> Result<Vec<f64>> {
    crate::domain::check_label(label)?;
    check_len(model.num_features(), x.len())?;
    Ok(model.input_gradient(x.values(), label))
}

fn init_layers(
    inputs: usize,
    hidden: &[usize],
    activation: Activation,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<DenseLayer>> {
    if inputs == 0 {
        return Err(Error::config("an MLP needs at least one input"));
    }
    if let Some(pos) = hidden.iter().position(|&h| h == 0) {
        return Err(Error::config(format!("hidden layer {pos} has zero units")));
    }
    let factor = if activation == Activation::Logistic { 2.0 } else { 6.0 };
    let mut sizes = vec![inputs];
    sizes.extend_from_slice(hidden);
    sizes.push(1);
    sizes
        .windows(2)
        .map(|pair| {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (factor / (fan_in + fan_out) as f64).sqrt();
            let weights = (0..fan_in * fan_out)
                .map(|_| rng.random_range(-bound..bound))
                .collect();
            let bias = (0..fan_out).map(|_| rng.random_range(-bound..bound)).collect();
            DenseLayer::new(fan_in, fan_out, weights, bias)
        })
        .collect()
}

/// Mini-batch SGD with momentum on the mean log-loss plus an L2 penalty on
/// the weight matrices. Stops after `max_iterations` epochs or once the
/// epoch loss fails to improve by `tolerance` for ten consecutive epochs.
pub fn train_mlp(
    problem: &ClassificationProblem,
    hidden: &[usize],
    activation: Activation,
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainSummary)> {
    cfg.validate()?;
    require_binary(problem)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let layers = init_layers(problem.num_features(), hidden, activation, &mut rng)?;
    let labels = [problem.labels()[0].clone(), problem.labels()[1].clone()];
    let mut model = MlpModel::new(layers, activation, labels)?;

    let n = problem.len();
    let xs = problem.features();
    let ys = problem.targets();
    let mut order: Vec<usize> = (0..n).collect();
    let mut velocity: Vec<(Vec<f64>, Vec<f64>)> = model
        .layers
        .iter()
        .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
        .collect();
    let mut grads = velocity.clone();

    let mut best_loss = f64::INFINITY;
    let mut stale = 0;
    let mut epoch_loss = f64::NAN;
    let mut epochs = 0;
    let mut converged = false;

    for _ in 0..cfg.max_iterations {
        epochs += 1;
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(BATCH_SIZE) {
            for (gw, gb) in grads.iter_mut() {
                gw.iter_mut().for_each(|v| *v = 0.0);
                gb.iter_mut().for_each(|v| *v = 0.0);
            }
            let m = batch.len() as f64;
            let mut batch_loss = 0.0;
            for &j in batch {
                let trace = model.trace(&xs[j]);
                let z = trace.pre.last().expect("output layer")[0];
                let y = ys[j] as f64;
                batch_loss += log_loss(z, y);
                let deltas = model.deltas(&trace, sigmoid(z) - y);
                for (l, delta) in deltas.iter().enumerate() {
                    let input = &trace.inputs[l];
                    let (gw, gb) = &mut grads[l];
                    let width = input.len();
                    for (o, d) in delta.iter().enumerate() {
                        gb[o] += d;
                        for (g, v) in gw[o * width..(o + 1) * width].iter_mut().zip(input) {
                            *g += d * v;
                        }
                    }
                }
            }
            let mut penalty = 0.0;
            for (layer, ((gw, gb), (vw, vb))) in
                model.layers.iter_mut().zip(grads.iter().zip(velocity.iter_mut()))
            {
                penalty += layer.weights.iter().map(|w| w * w).sum::<f64>();
                for ((w, g), v) in layer.weights.iter_mut().zip(gw).zip(vw.iter_mut()) {
                    let grad = g / m + cfg.l2_strength * *w / m;
                    *v = MOMENTUM * *v - cfg.learning_rate * grad;
                    *w += *v;
                }
                for ((b, g), v) in layer.bias.iter_mut().zip(gb).zip(vb.iter_mut()) {
                    *v = MOMENTUM * *v - cfg.learning_rate * g / m;
                    *b += *v;
                }
            }
            total += batch_loss + 0.5 * cfg.l2_strength * penalty;
        }
        epoch_loss = total / n as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::Numerical("MLP training loss diverged".into()));
        }
        if epoch_loss > best_loss - cfg.tolerance {
            stale += 1;
        } else {
            stale = 0;
        }
        best_loss = best_loss.min(epoch_loss);
        if stale > PATIENCE {
            converged = true;
            break;
        }
    }

    Ok((
        model,
        TrainSummary {
            iterations: epochs,
            final_loss: epoch_loss,
            converged,
        },
    ))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::classifiers::{lr_gradient, symmetric_difference};
    use crate::domain::FeatureSchema;

    #[test]
    fn zero_hidden_layers_match_logistic_regression() {
        let lr = LogisticRegressionModel::from_parameters(vec![0.7, -1.3, 0.2], 0.4).unwrap();
        let mlp = MlpModel::from_logistic(&lr);
        let x = Instance::from_values(vec![0.3, -0.8, 1.9]).unwrap();
        let a = lr_gradient(&lr, &x).unwrap();
        let b = mlp_gradient(&mlp, &x, POSITIVE).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
        assert_eq!(lr.log_odds(x.values()), mlp.log_odds(x.values()));
    }

    #[test]
    fn all_zero_weights_give_zero_gradient() {
        let layers = vec![
            DenseLayer::new(2, 3, vec![0.0; 6], vec![0.0; 3]).unwrap(),
            DenseLayer::new(3, 1, vec![0.0; 3], vec![0.0]).unwrap(),
        ];
        let m = MlpModel::new(layers, Activation::Tanh, ["0".into(), "1".into()]).unwrap();
        assert_eq!(m.gradient(&[0.4, -2.0], POSITIVE).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn backprop_matches_symmetric_difference() {
        for activation in [Activation::Tanh, Activation::Logistic] {
            for seed in 0..10 {
                let m = MlpModel::random(4, &[6, 5], activation, seed).unwrap();
                let x = [0.3, -1.1, 0.8, 0.05 * seed as f64];
                let analytic = m.gradient(&x, POSITIVE).unwrap();
                let numeric = symmetric_difference(|z| m.probability(z, POSITIVE), &x, 1e-5).unwrap();
                for (a, b) in analytic.iter().zip(&numeric) {
                    assert!((a - b).abs() < 1e-8, "{activation:?} seed {seed}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn incompatible_architecture_rejected() {
        let layers = vec![
            DenseLayer::new(2, 3, vec![0.0; 6], vec![0.0; 3]).unwrap(),
            DenseLayer::new(4, 1, vec![0.0; 4], vec![0.0]).unwrap(),
        ];
        assert!(MlpModel::new(layers, Activation::Relu, ["0".into(), "1".into()]).is_err());
        assert!(MlpModel::random(3, &[4, 0], Activation::Relu, 1).is_err());
    }

    #[test]
    fn relu_kink_has_zero_derivative() {
        assert_eq!(Activation::Relu.derivative(0.0, 0.0), 0.0);
        assert_eq!(Activation::Relu.derivative(1e-300, 1e-300), 1.0);
    }

    #[test]
    fn learns_xor() {
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for i in 0..200 {
            let a = ((i * 37) % 101) as f64 / 50.0 - 1.0;
            let b = ((i * 61) % 97) as f64 / 48.0 - 1.0;
            if a.abs() < 0.1 || b.abs() < 0.1 {
                continue;
            }
            features.push(vec![a, b]);
            targets.push(usize::from((a > 0.0) != (b > 0.0)));
        }
        let problem = ClassificationProblem::new(
            Arc::new(FeatureSchema::anonymous(2).unwrap()),
            vec!["same".into(), "diff".into()],
            features.clone(),
            targets.clone(),
        )
        .unwrap();
        let cfg = TrainConfig {
            max_iterations: 2000,
            learning_rate: 0.05,
            l2_strength: 1e-4,
            ..TrainConfig::mlp_default()
        };
        let (m, summary) = train_mlp(&problem, &[8, 8], Activation::Tanh, &cfg).unwrap();
        let correct = features
            .iter()
            .zip(&targets)
            .filter(|(x, &t)| usize::from(m.log_odds(x) > 0.0) == t)
            .count();
        let acc = correct as f64 / features.len() as f64;
        assert!(acc >= 0.95, "accuracy {acc}, summary {summary:?}");
    }

    #[test]
    fn training_is_bit_deterministic() {
        let features: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()])
            .collect();
        let targets = (0..50).map(|i| (i % 3 == 0) as usize).collect();
        let problem = ClassificationProblem::new(
            Arc::new(FeatureSchema::anonymous(2).unwrap()),
            vec!["a".into(), "b".into()],
            features,
            targets,
        )
        .unwrap();
        let cfg = TrainConfig {
            max_iterations: 20,
            ..TrainConfig::mlp_default()
        };
        let (a, _) = train_mlp(&problem, &[4], Activation::Relu, &cfg).unwrap();
        let (b, _) = train_mlp(&problem, &[4], Activation::Relu, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
