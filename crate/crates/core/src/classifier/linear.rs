//! Multiclass linear models over sparse features, trained full-batch.
//!
//! * logistic: softmax cross-entropy + L2, fixed-step gradient descent;
//! * linear SVM: multiclass hinge + L2, subgradient descent with step
//!   `lr / sqrt(t + 1)`, keeping the best iterate seen.
//!
//! Biases are not regularized. The loss is averaged over instances.

use serde::{Deserialize, Serialize};

use super::features::SparseVec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// `[class][feature]`
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl Params {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        Params {
            weights: vec![vec![0.0; dim]; classes],
            bias: vec![0.0; classes],
        }
    }

    pub fn scores(&self, x: &SparseVec) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| b + x.iter().map(|&(i, v)| w[i as usize] * v).sum::<f64>())
            .collect()
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().flatten().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// All parameters in a flat vector: weights row-major, then biases.
    pub fn flatten(&self) -> Vec<f64> {
        self.weights.iter().flatten().chain(&self.bias).copied().collect()
    }

    pub fn from_flat(flat: &[f64], classes: usize, dim: usize) -> Self {
        let weights = flat[..classes * dim].chunks(dim).map(<[f64]>::to_vec).collect();
        Params {
            weights,
            bias: flat[classes * dim..].to_vec(),
        }
    }

    fn axpy(&mut self, a: f64, other: &Params) {
        for (w, g) in self.weights.iter_mut().zip(&other.weights) {
            w.iter_mut().zip(g).for_each(|(w, g)| *w += a * g);
        }
        self.bias.iter_mut().zip(&other.bias).for_each(|(b, g)| *b += a * g);
    }
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

fn add_l2(params: &Params, l2: f64, loss: &mut f64, grad: &mut Params) {
    let mut sq = 0.0;
    for (w, g) in params.weights.iter().zip(grad.weights.iter_mut()) {
        for (w, g) in w.iter().zip(g.iter_mut()) {
            sq += w * w;
            *g += l2 * w;
        }
    }
    *loss += 0.5 * l2 * sq;
}

/// Mean softmax cross-entropy plus `l2 / 2 * |W|^2`, with its gradient.
pub fn logistic_objective(params: &Params, xs: &[SparseVec], ys: &[usize], l2: f64) -> (f64, Params) {
    let n = xs.len() as f64;
    let mut grad = Params::zeros(params.bias.len(), params.weights.first().map_or(0, Vec::len));
    let mut loss = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let p = softmax(&params.scores(x));
        loss -= p[y].ln();
        for (c, &pc) in p.iter().enumerate() {
            let d = (pc - if c == y { 1.0 } else { 0.0 }) / n;
            if d == 0.0 {
                continue;
            }
            grad.bias[c] += d;
            let gw = &mut grad.weights[c];
            for &(i, v) in x {
                gw[i as usize] += d * v;
            }
        }
    }
    loss /= n;
    add_l2(params, l2, &mut loss, &mut grad);
    (loss, grad)
}

/// Mean multiclass hinge `max(0, 1 + max_{r != y} s_r - s_y)` plus
/// `l2 / 2 * |W|^2`, with a subgradient. The competing class is the first
/// maximizer in class order.
pub fn hinge_objective(params: &Params, xs: &[SparseVec], ys: &[usize], l2: f64) -> (f64, Params) {
    let n = xs.len() as f64;
    let mut grad = Params::zeros(params.bias.len(), params.weights.first().map_or(0, Vec::len));
    let mut loss = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let s = params.scores(x);
        let mut rival = None;
        for (c, &sc) in s.iter().enumerate() {
            if c != y && rival.is_none_or(|r: usize| sc > s[r]) {
                rival = Some(c);
            }
        }
        let Some(r) = rival else { continue };
        let margin = 1.0 + s[r] - s[y];
        if margin <= 0.0 {
            continue;
        }
        loss += margin;
        grad.bias[r] += 1.0 / n;
        grad.bias[y] -= 1.0 / n;
        for &(i, v) in x {
            grad.weights[r][i as usize] += v / n;
            grad.weights[y][i as usize] -= v / n;
        }
    }
    loss /= n;
    add_l2(params, l2, &mut loss, &mut grad);
    (loss, grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

fn non_finite(epoch: usize, last_loss: f64, params: &Params) -> Error {
    Error::NonFinite {
        epoch,
        last_loss,
        weight_norm: params.weight_norm(),
    }
}

fn check_config(cfg: &OptimConfig) -> Result<()> {
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::config(format!(
            "learning rate must be positive, got {}",
            cfg.learning_rate
        )));
    }
    if !(cfg.l2 >= 0.0 && cfg.l2.is_finite()) {
        return Err(Error::config(format!("l2 must be non-negative, got {}", cfg.l2)));
    }
    if cfg.epochs == 0 {
        return Err(Error::config("epochs must be at least 1"));
    }
    Ok(())
}

/// Returns the fitted parameters and the objective per epoch.
pub fn fit_logistic(
    xs: &[SparseVec],
    ys: &[usize],
    classes: usize,
    dim: usize,
    cfg: &OptimConfig,
) -> Result<(Params, Vec<f64>)> {
    check_config(cfg)?;
    let mut params = Params::zeros(classes, dim);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut last = f64::NAN;
    for epoch in 0..cfg.epochs {
        let (loss, grad) = logistic_objective(&params, xs, ys, cfg.l2);
        if !loss.is_finite() {
            return Err(non_finite(epoch, last, &params));
        }
        history.push(loss);
        last = loss;
        params.axpy(-cfg.learning_rate, &grad);
    }
    Ok((params, history))
}

pub fn fit_svm(
    xs: &[SparseVec],
    ys: &[usize],
    classes: usize,
    dim: usize,
    cfg: &OptimConfig,
) -> Result<(Params, Vec<f64>)> {
    check_config(cfg)?;
    let mut params = Params::zeros(classes, dim);
    let mut best = (f64::INFINITY, params.clone());
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut last = f64::NAN;
    for epoch in 0..cfg.epochs {
        let (loss, grad) = hinge_objective(&params, xs, ys, cfg.l2);
        if !loss.is_finite() {
            return Err(non_finite(epoch, last, &params));
        }
        history.push(loss);
        last = loss;
        if loss < best.0 {
            best = (loss, params.clone());
        }
        params.axpy(-cfg.learning_rate / ((epoch + 1) as f64).sqrt(), &grad);
    }
    let (loss, _) = hinge_objective(&params, xs, ys, cfg.l2);
    if loss < best.0 {
        best = (loss, params);
    }
    Ok((best.1, history))
}
