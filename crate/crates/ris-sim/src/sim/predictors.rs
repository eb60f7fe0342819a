//! Position sources for the predictive controller.

use crate::error::{Error, Result};
use crate::geom::GeoPoint;
use crate::predictor::{linear_baseline, predict_horizon, LstmParams};
use crate::trajectory::{NormStats, Trajectory};

use super::Scenario;

/// Predicts a user's geographic positions `steps` resample intervals past the
/// end of `history`. Implementations must be deterministic.
pub trait PositionPredictor: Sync {
    fn name(&self) -> &'static str;
    fn predict(
        &self,
        user: usize,
        history: &[GeoPoint],
        steps: usize,
        dt_s: f64,
    ) -> Result<Vec<GeoPoint>>;
}

/// Recursive LSTM rollout from a trained checkpoint.
pub struct LstmPredictor {
    pub params: LstmParams,
    pub stats: NormStats,
    pub in_len: usize,
}

impl PositionPredictor for LstmPredictor {
    fn name(&self) -> &'static str {
        "lstm"
    }

    fn predict(&self, _user: usize, history: &[GeoPoint], steps: usize, dt_s: f64) -> Result<Vec<GeoPoint>> {
        predict_horizon(&self.params, &self.stats, history, steps, dt_s, self.in_len)
    }
}

/// Constant-velocity extrapolation.
pub struct LinearPredictor;

impl PositionPredictor for LinearPredictor {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn predict(&self, _user: usize, history: &[GeoPoint], steps: usize, _dt_s: f64) -> Result<Vec<GeoPoint>> {
        linear_baseline(history, steps)
    }
}

/// Returns the true future positions (a perfect-prediction upper bound for
/// separating controller quality from prediction quality).
pub struct TruthPredictor {
    tracks: Vec<Trajectory>,
}

impl TruthPredictor {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        TruthPredictor {
            tracks: scenario.users.iter().map(|u| u.track.clone()).collect(),
        }
    }
}

impl PositionPredictor for TruthPredictor {
    fn name(&self) -> &'static str {
        "truth"
    }

    fn predict(&self, user: usize, history: &[GeoPoint], steps: usize, dt_s: f64) -> Result<Vec<GeoPoint>> {
        let track = self
            .tracks
            .get(user)
            .ok_or_else(|| Error::Sim(format!("no track for user {user}")))?;
        let t0 = history
            .last()
            .ok_or_else(|| Error::Sim("empty history".into()))?
            .t;
        (1..=steps).map(|k| track.at(t0 + k as f64 * dt_s)).collect()
    }
}
