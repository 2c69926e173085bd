//! Class-weighted, L2-regularized logistic regression.
//!
//! The objective is
//!
//! ```text
//! 1/2 * sum_r |W_r|^2 + C * sum_i cw[y_i] * -log softmax(W x_i + b)[y_i]
//! ```
//!
//! with the intercept left unpenalized. Two-class problems use a single
//! weight row against a fixed zero row, which is the usual binary
//! logistic loss; more classes use a full softmax. The optimizer is
//! L-BFGS with a backtracking Armijo line search, so the objective never
//! increases between iterations.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::features::{FeatureConfig, SparseMatrix, SparseVec};
use super::vocab::Vocabulary;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyDataset,
    #[error("training set has a single class ({0})")]
    SingleClassDataset(usize),
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("loss became non-finite")]
    NonFiniteLoss,
    #[error("feature dimension mismatch: model has {expected}, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} rows but {1} labels")]
    RowCountMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Inverse regularization strength C.
    pub reg_inverse: f64,
    /// Weight classes by n / (k * n_c).
    pub balanced: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub history: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            reg_inverse: 1.0,
            balanced: true,
            tol: 1e-6,
            max_iter: 1000,
            history: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub n_classes: usize,
    pub n_features: usize,
    /// Row-major `n_classes x n_features`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub reg_inverse: f64,
    pub class_weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
    /// Objective value after each accepted step, starting from the initial point.
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: usize,
    pub probs: Vec<f64>,
}

/// Balanced weights over the classes that occur; absent classes get 0.
pub fn balanced_weights(labels: &[usize], n_classes: usize) -> Vec<f64> {
    let mut counts = vec![0usize; n_classes];
    for &y in labels {
        counts[y] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count() as f64;
    let n = labels.len() as f64;
    counts
        .iter()
        .map(|&c| {
            if c == 0 {
                0.0
            } else {
                n / (present * c as f64)
            }
        })
        .collect()
}

/// Loss and gradient with respect to the free parameters: the weight rows
/// of every class except class 0 in the two-class case, then the matching
/// intercepts.
pub struct Objective<'a> {
    x: &'a SparseMatrix,
    y: &'a [usize],
    sample_w: Vec<f64>,
    c: f64,
    n_classes: usize,
    free_rows: usize,
}

impl<'a> Objective<'a> {
    pub fn new(
        x: &'a SparseMatrix,
        y: &'a [usize],
        n_classes: usize,
        class_weights: &[f64],
        c: f64,
    ) -> Self {
        let free_rows = if n_classes == 2 { 1 } else { n_classes };
        Objective {
            x,
            y,
            sample_w: y.iter().map(|&l| class_weights[l]).collect(),
            c,
            n_classes,
            free_rows,
        }
    }

    pub fn n_params(&self) -> usize {
        self.free_rows * (self.x.n_cols() + 1)
    }

    // parameter layout: free_rows weight rows, then free_rows biases
    fn scores(&self, theta: &[f64], i: usize, out: &mut [f64]) {
        let f = self.x.n_cols();
        let offset = self.n_classes - self.free_rows;
        out.iter_mut().for_each(|s| *s = 0.0);
        for r in 0..self.free_rows {
            let w = &theta[r * f..(r + 1) * f];
            let mut s = theta[self.free_rows * f + r];
            for (col, v) in self.x.row(i) {
                s += w[col] * v;
            }
            out[offset + r] = s;
        }
    }

    pub fn eval(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let f = self.x.n_cols();
        let k = self.n_classes;
        let offset = k - self.free_rows;
        let wlen = self.free_rows * f;
        let mut loss = 0.5 * theta[..wlen].iter().map(|w| w * w).sum::<f64>();
        grad[..wlen].copy_from_slice(&theta[..wlen]);
        grad[wlen..].iter_mut().for_each(|g| *g = 0.0);

        let mut s = vec![0.0; k];
        for i in 0..self.x.n_rows() {
            let sw = self.sample_w[i];
            if sw == 0.0 {
                continue;
            }
            self.scores(theta, i, &mut s);
            let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + s.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            loss += self.c * sw * (lse - s[self.y[i]]);
            for r in 0..self.free_rows {
                let cls = offset + r;
                let p = (s[cls] - lse).exp();
                let d = self.c * sw * (p - f64::from(u8::from(self.y[i] == cls)));
                if d == 0.0 {
                    continue;
                }
                let g = &mut grad[r * f..(r + 1) * f];
                for (col, v) in self.x.row(i) {
                    g[col] += d * v;
                }
                grad[wlen + r] += d;
            }
        }
        loss
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn train_logreg(
    x: &SparseMatrix,
    y: &[usize],
    n_classes: usize,
    cfg: &TrainConfig,
) -> Result<(LogRegModel, TrainReport), TrainError> {
    if x.n_rows() != y.len() {
        return Err(TrainError::RowCountMismatch(x.n_rows(), y.len()));
    }
    if y.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    if let Some(&label) = y.iter().find(|&&l| l >= n_classes) {
        return Err(TrainError::LabelOutOfRange { label, n_classes });
    }
    let first = y[0];
    if n_classes < 2 || y.iter().all(|&l| l == first) {
        return Err(TrainError::SingleClassDataset(first));
    }
    let class_weights = if cfg.balanced {
        balanced_weights(y, n_classes)
    } else {
        vec![1.0; n_classes]
    };
    let obj = Objective::new(x, y, n_classes, &class_weights, cfg.reg_inverse);
    let (theta, report) = minimize(&obj, cfg)?;

    let f = x.n_cols();
    let free = obj.free_rows;
    let offset = n_classes - free;
    let mut weights = vec![0.0; n_classes * f];
    let mut bias = vec![0.0; n_classes];
    for r in 0..free {
        weights[(offset + r) * f..(offset + r + 1) * f].copy_from_slice(&theta[r * f..(r + 1) * f]);
        bias[offset + r] = theta[free * f + r];
    }
    Ok((
        LogRegModel {
            n_classes,
            n_features: f,
            weights,
            bias,
            reg_inverse: cfg.reg_inverse,
            class_weights,
        },
        report,
    ))
}

fn minimize(obj: &Objective<'_>, cfg: &TrainConfig) -> Result<(Vec<f64>, TrainReport), TrainError> {
    let n = obj.n_params();
    let mut theta = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut loss = obj.eval(&theta, &mut grad);
    if !loss.is_finite() {
        return Err(TrainError::NonFiniteLoss);
    }
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut loss_history = vec![loss];
    let mut iterations = 0;
    let mut gnorm = norm(&grad);
    let mut trial = vec![0.0; n];
    let mut trial_grad = vec![0.0; n];

    while gnorm >= cfg.tol && iterations < cfg.max_iter {
        // two-loop recursion
        let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, yv, rho) in history.iter().rev() {
            let a = rho * dot(s, &dir);
            dir.iter_mut().zip(yv).for_each(|(d, y)| *d -= a * y);
            alphas.push(a);
        }
        if let Some((s, yv, _)) = history.back() {
            let gamma = dot(s, yv) / dot(yv, yv);
            dir.iter_mut().for_each(|d| *d *= gamma);
        } else {
            let scale = 1.0 / gnorm.max(1.0);
            dir.iter_mut().for_each(|d| *d *= scale);
        }
        for ((s, yv, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(yv, &dir);
            dir.iter_mut().zip(s).for_each(|(d, sv)| *d += (a - b) * sv);
        }
        let mut slope = dot(&grad, &dir);
        // also catches a NaN slope
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(slope < 0.0) {
            history.clear();
            dir = grad.iter().map(|g| -g / gnorm.max(1.0)).collect();
            slope = dot(&grad, &dir);
        }

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for ((t, th), d) in trial.iter_mut().zip(&theta).zip(&dir) {
                *t = th + step * d;
            }
            let new_loss = obj.eval(&trial, &mut trial_grad);
            if new_loss.is_finite() && new_loss <= loss + 1e-4 * step * slope && new_loss < loss {
                let s: Vec<f64> = trial.iter().zip(&theta).map(|(a, b)| a - b).collect();
                let yv: Vec<f64> = trial_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &yv);
                if sy > 1e-12 {
                    history.push_back((s, yv, 1.0 / sy));
                    if history.len() > cfg.history {
                        history.pop_front();
                    }
                }
                std::mem::swap(&mut theta, &mut trial);
                std::mem::swap(&mut grad, &mut trial_grad);
                loss = new_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if !accepted {
            // no decrease representable at this precision
            break;
        }
        loss_history.push(loss);
        gnorm = norm(&grad);
    }
    if !loss.is_finite() {
        return Err(TrainError::NonFiniteLoss);
    }
    Ok((
        theta,
        TrainReport {
            iterations,
            converged: gnorm < cfg.tol,
            grad_norm: gnorm,
            loss_history,
        },
    ))
}

impl LogRegModel {
    /// The model's free parameters in [`Objective`] layout.
    pub fn params(&self) -> Vec<f64> {
        let f = self.n_features;
        let free = if self.n_classes == 2 {
            1
        } else {
            self.n_classes
        };
        let offset = self.n_classes - free;
        let mut theta = self.weights[offset * f..].to_vec();
        theta.extend_from_slice(&self.bias[offset..]);
        theta
    }

    pub fn scores(&self, x: &SparseVec) -> Result<Vec<f64>, TrainError> {
        if let Some(&(col, _)) = x.0.last() {
            if col >= self.n_features {
                return Err(TrainError::DimensionMismatch {
                    expected: self.n_features,
                    found: col + 1,
                });
            }
        }
        let f = self.n_features;
        Ok((0..self.n_classes)
            .map(|r| {
                let w = &self.weights[r * f..(r + 1) * f];
                self.bias[r] + x.0.iter().map(|&(c, v)| w[c] * v).sum::<f64>()
            })
            .collect())
    }
}

/// Softmax probabilities and the most probable class; ties go to the
/// lowest class index.
pub fn predict(model: &LogRegModel, x: &SparseVec) -> Result<Prediction, TrainError> {
    let s = model.scores(x)?;
    Ok(prediction_from_scores(&s))
}

pub(crate) fn prediction_from_scores(s: &[f64]) -> Prediction {
    let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = s.iter().map(|v| (v - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    let probs: Vec<f64> = exps.iter().map(|e| e / z).collect();
    let mut label = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[label] {
            label = i;
        }
    }
    Prediction { label, probs }
}

/// Saved model: weights plus everything needed to rebuild the features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub task: String,
    pub vocab_hash: String,
    pub vocab: Vocabulary,
    pub features: FeatureConfig,
    pub model: LogRegModel,
}

impl ModelFile {
    pub fn new(
        task: impl Into<String>,
        vocab: Vocabulary,
        features: FeatureConfig,
        model: LogRegModel,
    ) -> Self {
        ModelFile {
            version: MODEL_FORMAT_VERSION,
            task: task.into(),
            vocab_hash: vocab.hash(),
            vocab,
            features,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialize")
    }

    pub fn from_json(src: &str) -> Result<Self, String> {
        let m: ModelFile = serde_json::from_str(src).map_err(|e| e.to_string())?;
        if m.version != MODEL_FORMAT_VERSION {
            return Err(format!("unsupported model version {}", m.version));
        }
        if m.vocab.hash() != m.vocab_hash {
            return Err("vocabulary hash does not match the stored vocabulary".to_owned());
        }
        Ok(m)
    }
}
