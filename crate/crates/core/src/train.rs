//! Online error backpropagation with momentum.
//!
//! Weights change after every pattern by
//! `ΔW(n) = η·δ_j·x_i + α·ΔW(n−1)` and `W(n+1) = W(n) + ΔW(n)`, where the
//! output deltas are `O(1−O)(D−O)` and the hidden deltas back-propagate the
//! output deltas through the output weights as they stood before the update.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::mlp::{Matrix, Mlp};
use crate::pipeline::network_input;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    /// Learning rate η.
    pub eta: f64,
    /// Momentum α.
    pub alpha: f64,
    pub max_epochs: usize,
    /// Training stops once the mean pattern error drops below this.
    pub mse_threshold: f64,
    /// Seeds the one-off shuffle of the presentation order.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            eta: 0.2,
            alpha: 0.1,
            max_epochs: 200,
            mse_threshold: 0.05,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!("learning rate {} must be finite and >= 0", self.eta)));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::invalid(format!("momentum {} outside [0, 1)", self.alpha)));
        }
        if self.max_epochs == 0 {
            return Err(Error::invalid("max_epochs must be at least 1"));
        }
        if self.mse_threshold.is_nan() || self.mse_threshold <= 0.0 {
            return Err(Error::invalid(format!(
                "mse threshold {} must be positive",
                self.mse_threshold
            )));
        }
        Ok(())
    }
}

/// A network together with the previous step's weight changes.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainState {
    pub net: Mlp,
    pub prev_delta_hidden: Matrix,
    pub prev_delta_out: Matrix,
    /// Number of pattern presentations applied so far.
    pub iteration: u64,
}

impl TrainState {
    /// Fresh state; the first step sees a zero previous change.
    pub fn new(net: Mlp) -> Self {
        let (hr, hc) = net.w_hidden().shape();
        let (or, oc) = net.w_out().shape();
        TrainState {
            net,
            prev_delta_hidden: Matrix::zeros(hr, hc),
            prev_delta_out: Matrix::zeros(or, oc),
            iteration: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxEpochs,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxEpochs => "max_epochs",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Mean pattern error over the training set after each epoch.
    pub mse_per_epoch: Vec<f64>,
    pub stop_reason: StopReason,
    pub final_train_accuracy: f64,
    pub wall_time: Duration,
}

impl TrainReport {
    /// `epoch,E` CSV with a trailing `#` summary line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,E\n");
        for (i, e) in self.mse_per_epoch.iter().enumerate() {
            writeln!(out, "{},{e:.17e}", i + 1).unwrap();
        }
        writeln!(
            out,
            "# epochs_run={},stop_reason={},final_train_accuracy={:.6},seconds={:.3}",
            self.epochs_run,
            self.stop_reason.as_str(),
            self.final_train_accuracy,
            self.wall_time.as_secs_f64()
        )
        .unwrap();
        out
    }

    /// Pull `epochs_run` back out of a CSV written by [`to_csv`](Self::to_csv).
    pub fn epochs_from_csv(csv: &str) -> Option<usize> {
        let summary = csv.lines().rev().find(|l| l.starts_with('#'))?;
        summary
            .trim_start_matches('#')
            .split(',')
            .find_map(|kv| kv.trim().strip_prefix("epochs_run="))
            .and_then(|v| v.parse().ok())
    }
}

/// Half the summed squared residual over the output units.
pub fn pattern_error(desired: &[f64], actual: &[f64]) -> Result<f64> {
    if desired.len() != actual.len() {
        return Err(Error::invalid(format!(
            "desired has {} values, actual {}",
            desired.len(),
            actual.len()
        )));
    }
    Ok(0.5 * desired.iter().zip(actual).map(|(d, o)| (d - o) * (d - o)).sum::<f64>())
}

/// Present one pattern and apply the momentum update to both layers.
pub fn backprop_pattern(state: &mut TrainState, x: &[f64], desired: &[f64], cfg: &TrainConfig) -> Result<()> {
    let net = &state.net;
    if desired.len() != net.n_out() {
        return Err(Error::invalid(format!(
            "target has {} values, network has {} outputs",
            desired.len(),
            net.n_out()
        )));
    }
    let act = net.forward(x)?;
    let bias_input = net.bias_input();

    let delta_out: Vec<f64> = act
        .output
        .iter()
        .zip(desired)
        .map(|(&o, &d)| o * (1.0 - o) * (d - o))
        .collect();
    let delta_hidden: Vec<f64> = act
        .hidden
        .iter()
        .enumerate()
        .map(|(j, &h)| {
            let back: f64 = delta_out
                .iter()
                .enumerate()
                .map(|(k, dk)| dk * net.w_out().get(k, j))
                .sum();
            h * (1.0 - h) * back
        })
        .collect();
    if delta_out.iter().chain(&delta_hidden).any(|d| !d.is_finite()) {
        return Err(Error::Diverged(format!(
            "non-finite delta at iteration {}",
            state.iteration
        )));
    }

    let net = &mut state.net;
    apply_update(
        &mut net.w_out,
        &mut state.prev_delta_out,
        &delta_out,
        &act.hidden,
        bias_input,
        cfg,
    );
    apply_update(
        &mut net.w_hidden,
        &mut state.prev_delta_hidden,
        &delta_hidden,
        x,
        bias_input,
        cfg,
    );
    state.iteration += 1;
    Ok(())
}

fn apply_update(
    weights: &mut Matrix,
    prev: &mut Matrix,
    deltas: &[f64],
    inputs: &[f64],
    bias_input: f64,
    cfg: &TrainConfig,
) {
    let n = inputs.len();
    for (j, &dj) in deltas.iter().enumerate() {
        let w_row = weights.row_mut(j);
        let p_row = prev.row_mut(j);
        for i in 0..=n {
            let xi = if i < n { inputs[i] } else { bias_input };
            let change = cfg.eta * dj * xi + cfg.alpha * p_row[i];
            w_row[i] += change;
            p_row[i] = change;
        }
    }
}

/// Mean pattern error of `net` over `patterns`.
pub fn mean_error(net: &Mlp, patterns: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let mut total = 0.0;
    for (x, d) in patterns {
        total += pattern_error(d, &net.forward(x)?.output)?;
    }
    Ok(total / patterns.len() as f64)
}

/// Train on raw `(input, target)` pairs.
///
/// The presentation order is shuffled once from `cfg.seed` and then kept for
/// every epoch. After each epoch the mean pattern error of the updated network
/// is recorded; training stops as soon as it falls below `cfg.mse_threshold`
/// or after `cfg.max_epochs` epochs. The reported accuracy counts patterns
/// whose every output lies within 0.5 of its target.
pub fn train_patterns(
    net: Mlp,
    patterns: &[(Vec<f64>, Vec<f64>)],
    cfg: &TrainConfig,
) -> Result<(Mlp, TrainReport)> {
    cfg.validate()?;
    if patterns.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    let started = Instant::now();
    let mut order: Vec<usize> = (0..patterns.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));

    let mut state = TrainState::new(net);
    let mut mse_per_epoch = Vec::new();
    let mut stop_reason = StopReason::MaxEpochs;
    for _ in 0..cfg.max_epochs {
        for &i in &order {
            let (x, d) = &patterns[i];
            backprop_pattern(&mut state, x, d, cfg)?;
        }
        let e = mean_error(&state.net, patterns)?;
        if !e.is_finite() {
            return Err(Error::Diverged(format!(
                "mean error is {e} after epoch {}",
                mse_per_epoch.len() + 1
            )));
        }
        mse_per_epoch.push(e);
        if e < cfg.mse_threshold {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    let mut hits = 0usize;
    for (x, d) in patterns {
        let out = state.net.forward(x)?.output;
        if out.iter().zip(d).all(|(o, d)| (o - d).abs() < 0.5) {
            hits += 1;
        }
    }
    let report = TrainReport {
        epochs_run: mse_per_epoch.len(),
        mse_per_epoch,
        stop_reason,
        final_train_accuracy: hits as f64 / patterns.len() as f64,
        wall_time: started.elapsed(),
    };
    Ok((state.net, report))
}

/// Where the training report for a model file lives: `model.mlp` → `model.csv`.
pub fn report_path(model: &Path) -> PathBuf {
    model.with_extension("csv")
}

/// Input/target pairs for a labeled set, pooling the glyphs when the network takes 100 inputs.
pub fn patterns_for(net: &Mlp, set: &Dataset) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    set.samples()
        .iter()
        .map(|s| Ok((network_input(&s.glyph, net.n_in())?, dataset::encode_label(s.label).to_vec())))
        .collect()
}

/// Train on a labeled glyph set; the reported accuracy uses nearest-code decoding.
pub fn train(net: Mlp, train_set: &Dataset, cfg: &TrainConfig) -> Result<(Mlp, TrainReport)> {
    if train_set.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if net.n_out() != dataset::CODE_BITS {
        return Err(Error::invalid(format!(
            "network has {} outputs, the label code has {}",
            net.n_out(),
            dataset::CODE_BITS
        )));
    }
    let patterns = patterns_for(&net, train_set)?;
    let (net, mut report) = train_patterns(net, &patterns, cfg)?;
    report.final_train_accuracy = evaluate(&net, train_set)?;
    Ok((net, report))
}

/// Fraction of samples whose decoded prediction matches the label.
pub fn evaluate(net: &Mlp, set: &Dataset) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::invalid("evaluation set is empty"));
    }
    let mut correct = 0usize;
    for s in set.samples() {
        let out = net.forward(&network_input(&s.glyph, net.n_in())?)?.output;
        if dataset::decode_output(&out)? == s.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / set.len() as f64)
}
