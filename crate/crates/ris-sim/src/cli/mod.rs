//! Operator commands behind the `ris-sim` binary.
//!
//! Every command is a plain library function over a [`RunConfig`], so tests
//! and examples drive the same code paths as the binary. Commands are
//! deterministic given (config, seed) and write enough manifest material to
//! reproduce themselves.

mod verify;

pub use verify::{run_verification, Check, VerifyReport};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::Strategy;
use crate::error::{Error, Result};
use crate::fingerprint::fingerprint_hex;
use crate::geom::{haversine_m, GeoPoint};
use crate::predictor::{linear_baseline, predict_horizon, train, Checkpoint, TrainConfig};
use crate::sim::{
    build_scenario, run_sweep, write_rows_csv, LinearPredictor, LstmPredictor, PositionPredictor,
    RunManifest, Scenario, ScenarioConfig, SweepKind, SweepOutput, SweepSpec,
};
use crate::trajectory::{
    build_dataset, mean_haversine_error, parse_plt, Dataset, DatasetConfig, DatasetManifest,
    Split, Trajectory,
};

/// File-system layout of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    /// Directory of PLT trajectory files.
    pub data_dir: PathBuf,
    /// Output directory for manifests, checkpoints, and CSVs.
    pub out_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig { data_dir: PathBuf::from("data"), out_dir: PathBuf::from("out") }
    }
}

impl PathsConfig {
    pub fn manifest_path(&self) -> PathBuf {
        self.out_dir.join("dataset_manifest.json")
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.out_dir.join("model.json")
    }

    pub fn loss_curve_path(&self) -> PathBuf {
        self.out_dir.join("loss_curve.csv")
    }
}

/// Simulation-run options beyond the scenario itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimOptions {
    /// Frames per sweep point.
    pub frames: usize,
    /// Strategies to evaluate.
    pub methods: Vec<String>,
    /// Position source for the predictive controller: "lstm" or "linear".
    pub predictor: String,
    /// Power levels for `sweep --kind power`, watts.
    pub power_levels: Vec<f64>,
    /// Element counts for `sweep --kind elements`.
    pub element_counts: Vec<u64>,
    /// Explicit desired-user PLT file (defaults to a seed-rotated test file).
    pub desired_track: Option<String>,
    /// Explicit interferer PLT files (defaults to seed-rotated test files).
    pub interferer_tracks: Vec<String>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            frames: 50,
            methods: Strategy::ALL.iter().map(|m| m.name().to_string()).collect(),
            predictor: "lstm".into(),
            power_levels: vec![0.1, 0.25, 0.5, 1.0, 2.0],
            element_counts: vec![100, 200, 400, 600],
            desired_track: None,
            interferer_tracks: Vec::new(),
        }
    }
}

impl SimOptions {
    pub fn parsed_methods(&self) -> Result<Vec<Strategy>> {
        self.methods.iter().map(|m| Strategy::parse(m)).collect()
    }
}

/// The full run configuration: a TOML file with `[scenario]`, `[train]`,
/// `[dataset]`, `[paths]`, and `[sim]` sections, all optional. Unknown keys
/// are rejected. Command-line flags override file values.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub train: TrainConfig,
    pub dataset: DatasetConfig,
    pub paths: PathsConfig,
    pub sim: SimOptions,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Fail-fast validation of every section before any work starts.
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.train.batch_size == 0 || self.train.epochs == 0 || self.train.hidden == 0 {
            return Err(Error::Config(
                "train.batch_size, train.epochs, and train.hidden must be positive".into(),
            ));
        }
        if !(self.dataset.dt_s > 0.0) || self.dataset.in_len < 2 {
            return Err(Error::Config("dataset.dt_s must be positive, in_len at least 2".into()));
        }
        self.sim.parsed_methods()?;
        if self.sim.predictor != "lstm" && self.sim.predictor != "linear" {
            return Err(Error::Config(format!(
                "sim.predictor '{}' unknown, valid: lstm, linear",
                self.sim.predictor
            )));
        }
        if self.sim.frames == 0 {
            return Err(Error::Config("sim.frames must be positive".into()));
        }
        Ok(())
    }

    /// Apply command-line overrides (flags win over the file).
    pub fn apply_overrides(&mut self, ov: &Overrides) {
        if let Some(seed) = ov.seed {
            self.scenario.seed = seed;
            self.train.seed = seed;
            self.dataset.split_seed = seed;
        }
        if let Some(out) = &ov.out_dir {
            self.paths.out_dir = out.clone();
        }
        if let Some(data) = &ov.data_dir {
            self.paths.data_dir = data.clone();
        }
        if let Some(methods) = &ov.methods {
            self.sim.methods = methods.clone();
        }
        if let Some(frames) = ov.frames {
            self.sim.frames = frames;
        }
    }
}

/// Flag-level overrides collected by the binary.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub methods: Option<Vec<String>>,
    pub frames: Option<usize>,
}

// ---------------------------------------------------------------------------
// prepare
// ---------------------------------------------------------------------------

/// Outcome of dataset preparation.
#[derive(Debug)]
pub struct PrepareReport {
    pub manifest: DatasetManifest,
    /// Files that failed to parse, with reasons; the run continues as long as
    /// at least one file survives.
    pub failed_files: Vec<(String, String)>,
    pub manifest_path: PathBuf,
}

/// Parse every PLT file in `data_dir`, build the dataset, write the manifest.
pub fn cmd_prepare(cfg: &RunConfig) -> Result<PrepareReport> {
    let mut names: Vec<PathBuf> = std::fs::read_dir(&cfg.paths.data_dir)
        .map_err(|e| {
            Error::Config(format!(
                "cannot read data_dir {}: {e}",
                cfg.paths.data_dir.display()
            ))
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "plt"))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(Error::Trajectory(format!(
            "no trajectories: {} contains no .plt files",
            cfg.paths.data_dir.display()
        )));
    }

    let mut parsed = Vec::new();
    let mut failed = Vec::new();
    for path in names {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        match std::fs::read_to_string(&path)
            .map_err(Error::from)
            .and_then(|text| parse_plt(&text))
        {
            Ok(p) => parsed.push((name, p)),
            Err(e) => failed.push((name, e.to_string())),
        }
    }
    if parsed.is_empty() {
        return Err(Error::Trajectory("no trajectories: every file failed to parse".into()));
    }

    let dataset = build_dataset(parsed, &cfg.dataset)?;
    std::fs::create_dir_all(&cfg.paths.out_dir)?;
    let manifest_path = cfg.paths.manifest_path();
    std::fs::write(&manifest_path, dataset.manifest.to_json_string()?)?;

    Ok(PrepareReport { manifest: dataset.manifest, failed_files: failed, manifest_path })
}

/// Rebuild the dataset exactly as `prepare` did and cross-check the stored
/// manifest fingerprint (stale manifests are an error, not a surprise).
fn rebuild_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let manifest_path = cfg.paths.manifest_path();
    let stored = DatasetManifest::from_json_str(
        &std::fs::read_to_string(&manifest_path).map_err(|e| {
            Error::Config(format!(
                "missing manifest {} (run `prepare` first): {e}",
                manifest_path.display()
            ))
        })?,
    )?;

    let mut parsed = Vec::new();
    for f in &stored.files {
        let path = cfg.paths.data_dir.join(&f.name);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Config(format!("manifest file {} unreadable: {e}", f.name)))?;
        parsed.push((f.name.clone(), parse_plt(&text)?));
    }
    let dataset = build_dataset(parsed, &stored.config)?;
    if dataset.manifest.fingerprint != stored.fingerprint {
        return Err(Error::Config(format!(
            "dataset changed since prepare (fingerprint {} vs {}); rerun `prepare`",
            dataset.manifest.fingerprint, stored.fingerprint
        )));
    }
    Ok(dataset)
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct TrainReport {
    pub checkpoint_path: PathBuf,
    pub loss_curve_path: PathBuf,
    pub final_train_loss: f64,
    pub best_val_loss: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    /// One-step validation error in meters.
    pub val_error_m: f64,
}

/// Train from the prepared dataset; write the checkpoint and loss curve.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainReport> {
    let dataset = rebuild_dataset(cfg)?;
    let outcome = train(&dataset, &cfg.train)?;

    // one-step validation error in meters
    let stats = outcome.stats;
    let preds: Vec<GeoPoint> = dataset
        .val
        .iter()
        .map(|w| {
            let window: Vec<[f64; 2]> = w.input.iter().map(|p| stats.normalize(*p)).collect();
            let (z, _) = crate::predictor::lstm_forward(&outcome.params, &window)?;
            let [lat, lon] = stats.denormalize(z);
            Ok(GeoPoint::fixed(lat, lon))
        })
        .collect::<Result<_>>()?;
    let truths: Vec<GeoPoint> = dataset
        .val
        .iter()
        .map(|w| GeoPoint::fixed(w.target[0], w.target[1]))
        .collect();
    let val_error_m = mean_haversine_error(&preds, &truths)?;

    std::fs::create_dir_all(&cfg.paths.out_dir)?;
    let checkpoint = Checkpoint::new(
        &outcome.params,
        stats,
        &cfg.train,
        dataset.manifest.config.in_len,
        dataset.manifest.config.dt_s,
        &dataset.manifest.fingerprint,
        outcome.best_val_loss,
    )?;
    let checkpoint_path = cfg.paths.checkpoint_path();
    checkpoint.save(&checkpoint_path)?;

    let loss_curve_path = cfg.paths.loss_curve_path();
    let mut w = csv::Writer::from_path(&loss_curve_path)?;
    for row in &outcome.curve {
        w.serialize(row)?;
    }
    w.flush()?;

    Ok(TrainReport {
        checkpoint_path,
        loss_curve_path,
        final_train_loss: outcome.curve.last().map(|e| e.train_loss).unwrap_or(f64::NAN),
        best_val_loss: outcome.best_val_loss,
        best_epoch: outcome.best_epoch,
        epochs_run: outcome.curve.len(),
        val_error_m,
    })
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

/// Per-trajectory horizon-error aggregate.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryEval {
    pub file: String,
    pub windows: usize,
    pub lstm_err_m: f64,
    pub linear_err_m: f64,
}

/// Multi-step evaluation report at the configured horizon.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub split: Split,
    pub horizon_s: f64,
    pub windows: usize,
    /// Mean great-circle error of the position predicted one horizon ahead.
    pub lstm_err_m: f64,
    pub linear_err_m: f64,
    /// Windows whose true heading changes by more than 30 degrees over the
    /// horizon.
    pub curved_windows: usize,
    pub curved_lstm_err_m: f64,
    pub curved_linear_err_m: f64,
    pub per_trajectory: Vec<TrajectoryEval>,
}

/// One evaluation point for the per-point CSV (predicted-vs-true track).
#[derive(Debug, Clone, Serialize)]
struct EvalPointRow {
    file: String,
    t: f64,
    true_lat: f64,
    true_lon: f64,
    lstm_lat: f64,
    lstm_lon: f64,
    lstm_err_m: f64,
    linear_err_m: f64,
    curved: bool,
}

fn heading_change_deg(points: &[GeoPoint], decide: usize, eval: usize) -> f64 {
    // east/north displacement components; longitude shrinks with latitude
    let scale = points[decide].lat.to_radians().cos();
    let step = |i: usize| {
        (
            (points[i].lon - points[i - 1].lon) * scale,
            points[i].lat - points[i - 1].lat,
        )
    };
    let before = step(decide);
    let after = step(eval);
    let h0 = before.1.atan2(before.0);
    let h1 = after.1.atan2(after.0);
    let mut d = (h1 - h0).abs();
    if d > std::f64::consts::PI {
        d = std::f64::consts::TAU - d;
    }
    d.to_degrees()
}

/// Evaluate the checkpoint on one split: rollout error at the horizon versus
/// the constant-velocity baseline, overall and on curved windows.
pub fn cmd_eval(cfg: &RunConfig, split: Split) -> Result<EvalReport> {
    let dataset = rebuild_dataset(cfg)?;
    let ck = Checkpoint::load(&cfg.paths.checkpoint_path())?;
    if ck.dataset_fingerprint != dataset.manifest.fingerprint {
        return Err(Error::Config(format!(
            "checkpoint was trained on dataset {} but the manifest is {}",
            ck.dataset_fingerprint, dataset.manifest.fingerprint
        )));
    }
    if ck.stats != dataset.manifest.stats {
        return Err(Error::Config(
            "checkpoint normalization statistics do not match the manifest".into(),
        ));
    }
    let params = ck.params()?;
    let in_len = ck.in_len;
    let horizon_steps = (cfg.scenario.horizon_s / ck.dt_s).round() as usize;

    let mut rows: Vec<EvalPointRow> = Vec::new();
    let mut per_traj: Vec<TrajectoryEval> = Vec::new();

    for seg in dataset.segments_in(split) {
        let pts = seg.track.points();
        if pts.len() < in_len + horizon_steps {
            continue;
        }
        let mut lstm_sum = 0.0;
        let mut lin_sum = 0.0;
        let mut count = 0usize;
        for decide in (in_len - 1)..(pts.len() - horizon_steps) {
            let history = &pts[decide + 1 - in_len..=decide];
            let eval_idx = decide + horizon_steps;
            let truth = pts[eval_idx];

            let lstm_pt = *predict_horizon(&params, &ck.stats, history, horizon_steps, ck.dt_s, in_len)?
                .last()
                .unwrap();
            let lin_pt = *linear_baseline(history, horizon_steps)?.last().unwrap();
            let lstm_err = haversine_m(&lstm_pt, &truth);
            let lin_err = haversine_m(&lin_pt, &truth);
            let curved = heading_change_deg(pts, decide, eval_idx) > 30.0;

            rows.push(EvalPointRow {
                file: seg.file.clone(),
                t: truth.t,
                true_lat: truth.lat,
                true_lon: truth.lon,
                lstm_lat: lstm_pt.lat,
                lstm_lon: lstm_pt.lon,
                lstm_err_m: lstm_err,
                linear_err_m: lin_err,
                curved,
            });
            lstm_sum += lstm_err;
            lin_sum += lin_err;
            count += 1;
        }
        if count > 0 {
            per_traj.push(TrajectoryEval {
                file: seg.file.clone(),
                windows: count,
                lstm_err_m: lstm_sum / count as f64,
                linear_err_m: lin_sum / count as f64,
            });
        }
    }

    if rows.is_empty() {
        return Err(Error::Trajectory(format!(
            "split {split:?} has no window long enough for the {} s horizon",
            cfg.scenario.horizon_s
        )));
    }

    let n = rows.len() as f64;
    let curved: Vec<&EvalPointRow> = rows.iter().filter(|r| r.curved).collect();
    let report = EvalReport {
        split,
        horizon_s: horizon_steps as f64 * ck.dt_s,
        windows: rows.len(),
        lstm_err_m: rows.iter().map(|r| r.lstm_err_m).sum::<f64>() / n,
        linear_err_m: rows.iter().map(|r| r.linear_err_m).sum::<f64>() / n,
        curved_windows: curved.len(),
        curved_lstm_err_m: if curved.is_empty() {
            f64::NAN
        } else {
            curved.iter().map(|r| r.lstm_err_m).sum::<f64>() / curved.len() as f64
        },
        curved_linear_err_m: if curved.is_empty() {
            f64::NAN
        } else {
            curved.iter().map(|r| r.linear_err_m).sum::<f64>() / curved.len() as f64
        },
        per_trajectory: per_traj,
    };

    std::fs::create_dir_all(&cfg.paths.out_dir)?;
    let points_path = cfg.paths.out_dir.join(format!("eval_points_{}.csv", split_name(split)));
    let mut w = csv::Writer::from_path(&points_path)?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    std::fs::write(
        cfg.paths.out_dir.join(format!("eval_report_{}.json", split_name(split))),
        serde_json::to_string_pretty(&report)?,
    )?;

    Ok(report)
}

fn split_name(s: Split) -> &'static str {
    match s {
        Split::Train => "train",
        Split::Val => "val",
        Split::Test => "test",
    }
}

// ---------------------------------------------------------------------------
// simulate / sweep
// ---------------------------------------------------------------------------

/// Pick scenario tracks: explicit config entries win, otherwise rotate
/// deterministically through the test split.
fn select_tracks(cfg: &RunConfig, dataset: &Dataset) -> Result<Vec<(String, Trajectory)>> {
    let users = cfg.scenario.users();
    let mut chosen: Vec<String> = Vec::with_capacity(users);
    if let Some(desired) = &cfg.sim.desired_track {
        chosen.push(desired.clone());
        chosen.extend(cfg.sim.interferer_tracks.iter().cloned());
        if chosen.len() != users {
            return Err(Error::Config(format!(
                "explicit track list has {} entries, scenario needs {users}",
                chosen.len()
            )));
        }
    } else {
        let mut test_files: Vec<&str> = dataset
            .manifest
            .files
            .iter()
            .filter(|f| f.split == Split::Test && f.windows > 0)
            .map(|f| f.name.as_str())
            .collect();
        test_files.sort();
        if test_files.is_empty() {
            return Err(Error::Config("test split has no usable files".into()));
        }
        let start = (cfg.scenario.seed as usize) % test_files.len();
        for k in 0..users {
            chosen.push(test_files[(start + k) % test_files.len()].to_string());
        }
    }

    chosen
        .into_iter()
        .map(|name| {
            let seg = dataset
                .segments
                .iter()
                .filter(|s| s.file == name)
                .max_by_key(|s| s.track.len())
                .ok_or_else(|| Error::Config(format!("no usable segment in track '{name}'")))?;
            Ok((name, seg.track.clone()))
        })
        .collect()
}

fn build_predictor(cfg: &RunConfig) -> Result<(Box<dyn PositionPredictor>, Option<String>)> {
    match cfg.sim.predictor.as_str() {
        "linear" => Ok((Box::new(LinearPredictor), None)),
        "lstm" => {
            let ck = Checkpoint::load(&cfg.paths.checkpoint_path())?;
            let fp = fingerprint_hex(std::fs::read(cfg.paths.checkpoint_path())?.as_slice());
            Ok((
                Box::new(LstmPredictor {
                    params: ck.params()?,
                    stats: ck.stats,
                    in_len: ck.in_len,
                }),
                Some(fp),
            ))
        }
        other => Err(Error::Config(format!("unknown predictor '{other}'"))),
    }
}

/// Outcome of a simulate/sweep run.
#[derive(Debug)]
pub struct SweepReport {
    pub output: SweepOutput,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
}

struct AssembledRun {
    scenario: Scenario,
    predictor: Box<dyn PositionPredictor>,
    dataset_fingerprint: String,
    checkpoint_fingerprint: Option<String>,
}

/// Shared scenario assembly for `simulate` and `sweep`.
fn assemble_scenario(cfg: &RunConfig) -> Result<AssembledRun> {
    let dataset = rebuild_dataset(cfg)?;
    let tracks = select_tracks(cfg, &dataset)?;
    let scenario = build_scenario(&cfg.scenario, tracks)?;
    let (predictor, checkpoint_fingerprint) = build_predictor(cfg)?;
    Ok(AssembledRun {
        scenario,
        predictor,
        dataset_fingerprint: dataset.manifest.fingerprint.clone(),
        checkpoint_fingerprint,
    })
}

fn run_and_write(cfg: &RunConfig, run: &AssembledRun, spec: &SweepSpec, stem: &str) -> Result<SweepReport> {
    let output = run_sweep(&run.scenario, spec, run.predictor.as_ref())?;

    std::fs::create_dir_all(&cfg.paths.out_dir)?;
    let csv_path = cfg.paths.out_dir.join(format!("{stem}.csv"));
    let file = std::fs::File::create(&csv_path)?;
    write_rows_csv(&output.rows, file)?;

    let mut manifest = RunManifest::new(&run.scenario, spec, run.predictor.name(), &output);
    manifest.dataset_fingerprint = Some(run.dataset_fingerprint.clone());
    manifest.checkpoint_fingerprint = run.checkpoint_fingerprint.clone();
    let manifest_path = cfg.paths.out_dir.join(format!("{stem}_manifest.json"));
    std::fs::write(&manifest_path, manifest.to_json_string()?)?;

    Ok(SweepReport { output, csv_path, manifest_path })
}

/// Single-point simulation at the configured scenario.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<SweepReport> {
    let run = assemble_scenario(cfg)?;
    let spec = SweepSpec {
        kind: SweepKind::Power,
        values: vec![cfg.scenario.p_tx_w],
        frames: cfg.sim.frames,
        methods: cfg.sim.parsed_methods()?,
    };
    run_and_write(cfg, &run, &spec, "simulate")
}

/// Multi-point sweep over power or element count.
pub fn cmd_sweep(cfg: &RunConfig, kind: SweepKind, values: Option<Vec<f64>>) -> Result<SweepReport> {
    let run = assemble_scenario(cfg)?;
    let values = values.unwrap_or_else(|| match kind {
        SweepKind::Power => cfg.sim.power_levels.clone(),
        SweepKind::Elements => cfg.sim.element_counts.iter().map(|&n| n as f64).collect(),
    });
    let spec = SweepSpec {
        kind,
        values,
        frames: cfg.sim.frames,
        methods: cfg.sim.parsed_methods()?,
    };
    let stem = match kind {
        SweepKind::Power => "sweep_power",
        SweepKind::Elements => "sweep_elements",
    };
    run_and_write(cfg, &run, &spec, stem)
}

/// Exit-code classification: validation errors distinct from runtime errors.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parse { .. } => 1,
        _ => 2,
    }
}
