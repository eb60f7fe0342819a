//! Mini-batch training loop: shuffled batches, averaged gradients, Adam
//! updates, and early stopping on validation loss.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamHyper, AdamState};
use super::lstm::{lstm_backward, lstm_forward, mse_loss, LstmGrads, LstmParams};
use crate::channel::stream_rng;
use crate::error::{Error, Result};
use crate::trajectory::{Dataset, NormStats, WindowSample};

/// Training hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Hidden units per layer.
    pub hidden: usize,
    /// Window samples per optimizer step.
    pub batch_size: usize,
    /// Maximum epochs (early stopping may end sooner).
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: 64,
            batch_size: 64,
            epochs: 100,
            learning_rate: 1e-3,
            seed: 1,
            patience: 10,
        }
    }
}

/// One row of the loss curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// Trained weights plus the loss curve; `params` are the best-validation
/// weights, not necessarily the final ones.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: LstmParams,
    pub stats: NormStats,
    pub curve: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

fn normalize_samples(samples: &[WindowSample], stats: &NormStats) -> Vec<(Vec<[f64; 2]>, [f64; 2])> {
    samples
        .iter()
        .map(|w| {
            (
                w.input.iter().map(|p| stats.normalize(*p)).collect(),
                stats.normalize(w.target),
            )
        })
        .collect()
}

fn mean_loss(params: &LstmParams, samples: &[(Vec<[f64; 2]>, [f64; 2])]) -> f64 {
    let total: f64 = samples
        .par_iter()
        .map(|(w, t)| {
            let (pred, _) = lstm_forward(params, w).expect("forward");
            mse_loss(pred, *t).0
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    total / samples.len() as f64
}

/// Train on the dataset's train split, validating on its val split.
///
/// Batches are shuffled per epoch from the seed; per-sample gradients are
/// averaged with a fixed-order reduction, so the result is identical for any
/// worker count. Returns the parameters of the best validation epoch.
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<TrainOutcome> {
    if dataset.train.is_empty() {
        return Err(Error::Predictor("training split is empty".into()));
    }
    if dataset.val.is_empty() {
        return Err(Error::Predictor("validation split is empty".into()));
    }
    if config.batch_size == 0 || config.epochs == 0 {
        return Err(Error::Predictor("batch_size and epochs must be positive".into()));
    }

    let stats = dataset.manifest.stats;
    let train_set = normalize_samples(&dataset.train, &stats);
    let val_set = normalize_samples(&dataset.val, &stats);

    let mut params = LstmParams::init(config.hidden, config.seed);
    let mut opt = AdamState::new(&params, AdamHyper::with_lr(config.learning_rate));

    let mut curve = Vec::with_capacity(config.epochs);
    let mut best_params = params.clone();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut since_best = 0usize;

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 0..config.epochs {
        let mut rng = stream_rng(config.seed, &[u64::from_le_bytes(*b"epochshf"), epoch as u64]);
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let results: Vec<(f64, LstmGrads)> = chunk
                .par_iter()
                .map(|&idx| {
                    let (w, t) = &train_set[idx];
                    let (pred, cache) = lstm_forward(&params, w).expect("forward");
                    let (loss, grad_out) = mse_loss(pred, *t);
                    let grads = lstm_backward(&params, &cache, grad_out).expect("backward");
                    (loss, grads)
                })
                .collect();

            let mut batch_grads = params.grads_like();
            for (loss, g) in &results {
                loss_sum += loss;
                batch_grads.add_assign(g);
            }
            batch_grads.scale(1.0 / chunk.len() as f64);
            adam_step(&mut params, &batch_grads, &mut opt)?;
        }

        let train_loss = loss_sum / train_set.len() as f64;
        let val_loss = mean_loss(&params, &val_set);
        curve.push(EpochStats { epoch, train_loss, val_loss });

        if val_loss < best_val {
            best_val = val_loss;
            best_epoch = epoch;
            best_params = params.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                break;
            }
        }
    }

    Ok(TrainOutcome {
        params: best_params,
        stats,
        curve,
        best_epoch,
        best_val_loss: best_val,
    })
}
