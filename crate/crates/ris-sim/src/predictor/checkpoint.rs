//! Versioned model checkpoints.
//!
//! JSON with full-precision weights, the normalization statistics, the
//! resample step, and fingerprints tying the model to its training
//! configuration and dataset. Loading rejects version or shape mismatches.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::lstm::{LstmLayer, LstmParams};
use super::train::TrainConfig;
use crate::error::{Error, Result};
use crate::fingerprint::fingerprint_hex;
use crate::trajectory::NormStats;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub hidden: usize,
    /// Input window length the model was trained on.
    pub in_len: usize,
    /// Resample step of the training data, seconds.
    pub dt_s: f64,
    pub stats: NormStats,
    pub train_config: TrainConfig,
    /// Fingerprint of the serialized training configuration.
    pub config_fingerprint: String,
    /// Fingerprint of the dataset manifest this model was trained from.
    pub dataset_fingerprint: String,
    pub best_val_loss: f64,
    layers: Vec<LstmLayer>,
    w_out: Vec<f64>,
    b_out: Vec<f64>,
}

impl Checkpoint {
    pub fn new(
        params: &LstmParams,
        stats: NormStats,
        train_config: &TrainConfig,
        in_len: usize,
        dt_s: f64,
        dataset_fingerprint: &str,
        best_val_loss: f64,
    ) -> Result<Self> {
        let cfg_json = serde_json::to_string(train_config)?;
        Ok(Checkpoint {
            version: CHECKPOINT_VERSION,
            hidden: params.hidden,
            in_len,
            dt_s,
            stats,
            train_config: train_config.clone(),
            config_fingerprint: fingerprint_hex(cfg_json.as_bytes()),
            dataset_fingerprint: dataset_fingerprint.to_string(),
            best_val_loss,
            layers: params.layers.clone(),
            w_out: params.w_out.clone(),
            b_out: params.b_out.clone(),
        })
    }

    /// Rebuild the weights, re-validating every shape.
    pub fn params(&self) -> Result<LstmParams> {
        LstmParams::from_parts(
            self.hidden,
            self.layers.clone(),
            self.w_out.clone(),
            self.b_out.clone(),
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read checkpoint {}: {e}", path.display())))?;
        let ck: Checkpoint = serde_json::from_str(&text)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "checkpoint version {} unsupported (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        ck.params()?; // shape validation
        Ok(ck)
    }
}
