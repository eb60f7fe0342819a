//! Trajectory prediction: a from-scratch two-layer LSTM regressor trained
//! with Adam on MSE, multi-step recursive rollout, and a constant-velocity
//! baseline. Everything runs in f64 and is deterministic per seed.

mod adam;
mod checkpoint;
mod lstm;
mod train;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use lstm::{
    lstm_backward, lstm_forward, mse_loss, ForwardCache, LstmGrads, LstmLayer, LstmParams,
    INPUT_DIM, NUM_LAYERS, OUTPUT_DIM,
};
pub use train::{train, EpochStats, TrainConfig, TrainOutcome};

use crate::error::{Error, Result};
use crate::geom::GeoPoint;
use crate::trajectory::NormStats;

/// Anything that maps a normalized coordinate window to the next normalized
/// pair. The LSTM implements it; tests substitute exact closed-form models.
pub trait OneStepModel {
    fn predict_next(&self, window: &[[f64; 2]]) -> [f64; 2];
}

impl OneStepModel for LstmParams {
    fn predict_next(&self, window: &[[f64; 2]]) -> [f64; 2] {
        lstm_forward(self, window).expect("non-empty window").0
    }
}

/// Recursive multi-step rollout.
///
/// Takes the last `in_len` points of `history` (resampled at `dt_s`),
/// normalizes them, and repeatedly applies the one-step model, sliding each
/// prediction into the window. Outputs are denormalized to geographic points
/// with timestamps `t0 + k dt`.
pub fn predict_horizon(
    model: &impl OneStepModel,
    stats: &NormStats,
    history: &[GeoPoint],
    steps: usize,
    dt_s: f64,
    in_len: usize,
) -> Result<Vec<GeoPoint>> {
    if history.len() < in_len {
        return Err(Error::Predictor(format!(
            "history has {} points, need {in_len}",
            history.len()
        )));
    }
    if steps == 0 {
        return Err(Error::Predictor("steps must be at least 1".into()));
    }
    let t0 = history.last().unwrap().t;
    let mut window: Vec<[f64; 2]> = history[history.len() - in_len..]
        .iter()
        .map(|p| stats.normalize([p.lat, p.lon]))
        .collect();

    let mut out = Vec::with_capacity(steps);
    for k in 1..=steps {
        let z = model.predict_next(&window);
        window.remove(0);
        window.push(z);
        let [lat, lon] = stats.denormalize(z);
        out.push(GeoPoint::new(lat, lon, t0 + k as f64 * dt_s));
    }
    Ok(out)
}

/// Constant-velocity baseline: extrapolate the last displacement,
/// `p_k = last + k (last - second_last)`.
pub fn linear_baseline(history: &[GeoPoint], steps: usize) -> Result<Vec<GeoPoint>> {
    if history.len() < 2 {
        return Err(Error::Predictor(format!(
            "history has {} points, need 2",
            history.len()
        )));
    }
    if steps == 0 {
        return Err(Error::Predictor("steps must be at least 1".into()));
    }
    let last = history[history.len() - 1];
    let prev = history[history.len() - 2];
    let (dlat, dlon, dt) = (last.lat - prev.lat, last.lon - prev.lon, last.t - prev.t);
    Ok((1..=steps)
        .map(|k| {
            GeoPoint::new(
                last.lat + k as f64 * dlat,
                last.lon + k as f64 * dlon,
                last.t + k as f64 * dt,
            )
        })
        .collect())
}

/// Result of comparing analytic gradients against central finite differences.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Worst relative error per parameter group.
    pub per_group: Vec<(String, f64)>,
    pub max_rel_err: f64,
}

/// Finite-difference check of [`lstm_backward`] on a seeded random instance.
pub fn gradient_check(hidden: usize, seed: u64, eps: f64) -> GradCheckReport {
    use rand::Rng;
    let params = LstmParams::init(hidden, seed);
    let mut rng = crate::channel::stream_rng(seed, &[u64::from_le_bytes(*b"gradchk0")]);
    let window: Vec<[f64; 2]> = (0..8)
        .map(|_| [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)])
        .collect();
    let target = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];

    let (pred, cache) = lstm_forward(&params, &window).expect("forward");
    let (_, grad_out) = mse_loss(pred, target);
    let analytic = lstm_backward(&params, &cache, grad_out).expect("backward");
    gradient_check_against(&params, &analytic, &window, target, eps)
}

/// Compare a supplied gradient against central finite differences of the MSE
/// loss at `(window, target)`. Exposed so verification can also prove the
/// checker catches corrupted gradients.
pub fn gradient_check_against(
    params: &LstmParams,
    grads: &LstmGrads,
    window: &[[f64; 2]],
    target: [f64; 2],
    eps: f64,
) -> GradCheckReport {
    let names: Vec<String> = params.tensors().iter().map(|(n, _)| n.clone()).collect();
    let sizes: Vec<usize> = params.tensors().iter().map(|(_, t)| t.len()).collect();
    let mut work = params.clone();
    let mut per_group = Vec::new();
    let mut overall = 0.0f64;

    for ti in 0..names.len() {
        let mut worst = 0.0f64;
        for k in 0..sizes[ti] {
            let orig = work.tensors_mut()[ti][k];
            work.tensors_mut()[ti][k] = orig + eps;
            let (pp, _) = lstm_forward(&work, window).expect("forward");
            let lp = mse_loss(pp, target).0;
            work.tensors_mut()[ti][k] = orig - eps;
            let (pm, _) = lstm_forward(&work, window).expect("forward");
            let lm = mse_loss(pm, target).0;
            work.tensors_mut()[ti][k] = orig;

            let numeric = (lp - lm) / (2.0 * eps);
            let analytic = grads.tensors()[ti][k];
            let rel = (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
        overall = overall.max(worst);
        per_group.push((names[ti].clone(), worst));
    }
    GradCheckReport { per_group, max_rel_err: overall }
}
