//! Method-comparison sweeps over transmit power or element count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::Strategy;
use crate::error::{Error, Result};
use crate::link::to_db;

use super::frame::run_frame;
use super::predictors::PositionPredictor;
use super::Scenario;

/// What the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Power,
    Elements,
}

impl std::str::FromStr for SweepKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(SweepKind::Power),
            "elements" => Ok(SweepKind::Elements),
            other => Err(Error::Config(format!(
                "unknown sweep kind '{other}', valid: power, elements"
            ))),
        }
    }
}

/// Sweep request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: SweepKind,
    /// Power levels in watts, or element counts.
    pub values: Vec<f64>,
    /// Frames per sweep point (capped by track coverage).
    pub frames: usize,
    pub methods: Vec<Strategy>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("sweep needs at least one method".into()));
        }
        if self.frames == 0 {
            return Err(Error::Config("sweep needs at least one frame".into()));
        }
        for &v in &self.values {
            match self.kind {
                SweepKind::Power if !(v > 0.0) => {
                    return Err(Error::Config(format!("power {v} must be positive")));
                }
                SweepKind::Elements if !(v >= 1.0) || v.fract() != 0.0 => {
                    return Err(Error::Config(format!("element count {v} must be a positive integer")));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    pub param: f64,
    pub frame: usize,
    pub gamma_db: f64,
    pub pred_err_m: f64,
    pub v_bits: String,
}

/// Per-sweep-point aggregate: means are over evaluated frames only, in dB.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSummary {
    pub param: f64,
    pub frames_evaluated: usize,
    pub frames_skipped: Vec<(usize, String)>,
    pub mean_gamma_db: Vec<(Strategy, f64)>,
    pub mean_pred_err_m: Vec<(Strategy, f64)>,
}

impl PointSummary {
    pub fn mean_for(&self, method: Strategy) -> Option<f64> {
        self.mean_gamma_db
            .iter()
            .find(|(m, _)| *m == method)
            .map(|(_, v)| *v)
    }
}

/// Full sweep result: every row plus per-point aggregates.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub kind: SweepKind,
    pub rows: Vec<SweepRow>,
    pub points: Vec<PointSummary>,
}

/// Run the sweep. Frames are independent given their sub-seeds and evaluated
/// in parallel; rows and aggregates are assembled in deterministic frame
/// order. Frames that fail (for example a diverged prediction leaving the
/// projectable region) are recorded as skipped, never silently dropped.
pub fn run_sweep(
    scenario: &Scenario,
    spec: &SweepSpec,
    predictor: &dyn PositionPredictor,
) -> Result<SweepOutput> {
    spec.validate()?;
    let mut rows = Vec::new();
    let mut points = Vec::new();

    for &value in &spec.values {
        let sc = match spec.kind {
            SweepKind::Power => scenario.with_power(value),
            SweepKind::Elements => scenario.with_elements(value as usize),
        };
        sc.config.validate()?;
        let frames = spec.frames.min(sc.frame_count());
        if frames == 0 {
            return Err(Error::Sim("tracks too short for a single frame".into()));
        }

        let results: Vec<_> = (0..frames)
            .into_par_iter()
            .map(|f| run_frame(&sc, f, &spec.methods, predictor))
            .collect();

        let mut skipped = Vec::new();
        let mut sums: Vec<(f64, f64)> = vec![(0.0, 0.0); spec.methods.len()];
        let mut evaluated = 0usize;
        for (f, res) in results.into_iter().enumerate() {
            match res {
                Ok(frame_result) => {
                    evaluated += 1;
                    for (mi, o) in frame_result.outcomes.iter().enumerate() {
                        let gamma_db = to_db(o.gamma_true);
                        sums[mi].0 += gamma_db;
                        sums[mi].1 += o.pred_err_m;
                        rows.push(SweepRow {
                            method: o.decision.method.name().to_string(),
                            param: value,
                            frame: f,
                            gamma_db,
                            pred_err_m: o.pred_err_m,
                            v_bits: o.decision.v.bit_string(),
                        });
                    }
                }
                Err(e) => skipped.push((f, e.to_string())),
            }
        }
        if evaluated == 0 {
            return Err(Error::Sim(format!(
                "every frame at sweep value {value} was skipped; first reason: {}",
                skipped.first().map(|(_, r)| r.as_str()).unwrap_or("none")
            )));
        }

        points.push(PointSummary {
            param: value,
            frames_evaluated: evaluated,
            frames_skipped: skipped,
            mean_gamma_db: spec
                .methods
                .iter()
                .zip(&sums)
                .map(|(m, (g, _))| (*m, g / evaluated as f64))
                .collect(),
            mean_pred_err_m: spec
                .methods
                .iter()
                .zip(&sums)
                .map(|(m, (_, e))| (*m, e / evaluated as f64))
                .collect(),
        });
    }

    Ok(SweepOutput { kind: spec.kind, rows, points })
}

/// Write rows as RFC-4180 CSV with the
/// `method,param,frame,gamma_db,pred_err_m,v_bits` header.
pub fn write_rows_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Placement record for the run manifest: enough to audit how a raw track was
/// mapped into the scenario plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserPlacement {
    pub name: String,
    pub scale: f64,
    pub offset_x_m: f64,
    pub offset_y_m: f64,
    pub track_points: usize,
}

/// Reproducibility record written next to every sweep CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario: super::ScenarioConfig,
    pub sweep: SweepSpec,
    pub predictor: String,
    pub users: Vec<UserPlacement>,
    pub dataset_fingerprint: Option<String>,
    pub checkpoint_fingerprint: Option<String>,
    pub frames_evaluated: usize,
    pub frames_skipped: usize,
}

impl RunManifest {
    pub fn new(
        scenario: &Scenario,
        spec: &SweepSpec,
        predictor_name: &str,
        output: &SweepOutput,
    ) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: scenario.config.clone(),
            sweep: spec.clone(),
            predictor: predictor_name.to_string(),
            users: scenario
                .users
                .iter()
                .map(|u| UserPlacement {
                    name: u.name.clone(),
                    scale: u.scale,
                    offset_x_m: u.offset.x,
                    offset_y_m: u.offset.y,
                    track_points: u.track.len(),
                })
                .collect(),
            dataset_fingerprint: None,
            checkpoint_fingerprint: None,
            frames_evaluated: output.points.iter().map(|p| p.frames_evaluated).sum(),
            frames_skipped: output.points.iter().map(|p| p.frames_skipped.len()).sum(),
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
