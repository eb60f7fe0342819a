//! Dataset assembly: file-level splits, windowing, and the reproducibility
//! manifest.
//!
//! Splits are assigned per FILE (never per window) so no track contributes to
//! two splits. Normalization statistics come from the training split only and
//! are reused unchanged on validation and test. The manifest records every
//! input, parameter, and count needed to rebuild the dataset bit-exactly,
//! plus a fingerprint over its own serialized form.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{make_windows, segment_and_resample, NormStats, ParsedPlt, Trajectory, WindowSample};
use crate::error::{Error, Result};
use crate::fingerprint::fingerprint_hex;

/// Which split a file landed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl std::str::FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!(
                "unknown split '{other}', valid: train, val, test"
            ))),
        }
    }
}

/// Windowing and split parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// Resample step in seconds.
    pub dt_s: f64,
    /// Input window length in points.
    pub in_len: usize,
    /// Steps ahead of the window end the target sits.
    pub horizon: usize,
    /// Recording gaps above this split the track.
    pub max_gap_s: f64,
    /// Seed of the file-level split shuffle.
    pub split_seed: u64,
    /// Fraction of files assigned to training.
    pub train_frac: f64,
    /// Fraction of files assigned to validation; the rest is test.
    pub val_frac: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            dt_s: 5.0,
            in_len: 8,
            horizon: 1,
            max_gap_s: super::MAX_GAP_S,
            split_seed: 1,
            train_frac: 0.8,
            val_frac: 0.1,
        }
    }
}

/// Per-file manifest record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub split: Split,
    /// Valid points kept by the parser.
    pub points: usize,
    /// Records dropped by the parser.
    pub dropped: usize,
    /// Resampled segments after gap splitting.
    pub segments: usize,
    /// Window samples contributed.
    pub windows: usize,
}

/// Everything needed to reproduce a dataset bit-exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub config: DatasetConfig,
    pub stats: NormStats,
    pub train_windows: usize,
    pub val_windows: usize,
    pub test_windows: usize,
    pub files: Vec<FileEntry>,
    /// Fingerprint of this manifest serialized with the field below empty.
    pub fingerprint: String,
}

pub const MANIFEST_VERSION: u32 = 1;

impl DatasetManifest {
    /// Deterministic pretty JSON with the fingerprint filled in.
    pub fn to_json_string(&self) -> Result<String> {
        let mut m = self.clone();
        m.fingerprint = String::new();
        let body = serde_json::to_string_pretty(&m)?;
        m.fingerprint = fingerprint_hex(body.as_bytes());
        Ok(serde_json::to_string_pretty(&m)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let m: DatasetManifest = serde_json::from_str(s)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::Config(format!(
                "dataset manifest version {} unsupported (expected {MANIFEST_VERSION})",
                m.version
            )));
        }
        Ok(m)
    }

    pub fn file_names(&self, split: Split) -> Vec<&str> {
        self.files
            .iter()
            .filter(|f| f.split == split)
            .map(|f| f.name.as_str())
            .collect()
    }
}

/// One resampled gap-free segment with its provenance.
#[derive(Debug, Clone)]
pub struct SegmentRecord {
    pub file: String,
    pub split: Split,
    pub track: Trajectory,
}

/// The assembled dataset. Window coordinates are raw degrees; training code
/// applies `manifest.stats`.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub train: Vec<WindowSample>,
    pub val: Vec<WindowSample>,
    pub test: Vec<WindowSample>,
    /// Every resampled segment, for multi-step horizon evaluation and replay.
    pub segments: Vec<SegmentRecord>,
}

impl Dataset {
    pub fn segments_in(&self, split: Split) -> impl Iterator<Item = &SegmentRecord> {
        self.segments.iter().filter(move |s| s.split == split)
    }
}

/// Deterministic file-level split: sort by name, shuffle with the seed, then
/// cut at the configured fractions.
pub fn split_files(names: &[String], seed: u64, train_frac: f64, val_frac: f64) -> Vec<(String, Split)> {
    let mut sorted: Vec<String> = names.to_vec();
    sorted.sort();
    let mut rng = crate::channel::stream_rng(seed, &[u64::from_le_bytes(*b"splitfil")]);
    sorted.shuffle(&mut rng);

    let n = sorted.len();
    let n_train = ((n as f64) * train_frac).round() as usize;
    let n_val = (((n as f64) * val_frac).round() as usize).min(n.saturating_sub(n_train));
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            let split = if i < n_train {
                Split::Train
            } else if i < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
            (name, split)
        })
        .collect()
}

/// Parse results in, dataset out: split, segment, resample, window, fit stats.
pub fn build_dataset(files: Vec<(String, ParsedPlt)>, cfg: &DatasetConfig) -> Result<Dataset> {
    if files.is_empty() {
        return Err(Error::Trajectory("no trajectories".into()));
    }
    let names: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    let assignment = split_files(&names, cfg.split_seed, cfg.train_frac, cfg.val_frac);
    let split_of = |name: &str| -> Split {
        assignment
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
            .expect("every file was assigned a split")
    };

    let mut by_name: Vec<(String, ParsedPlt)> = files;
    by_name.sort_by(|a, b| a.0.cmp(&b.0));

    let mut entries = Vec::new();
    let mut train = Vec::new();
    let mut val = Vec::new();
    let mut test = Vec::new();
    let mut segment_records = Vec::new();
    let mut train_points: Vec<[f64; 2]> = Vec::new();

    for (name, parsed) in by_name {
        let split = split_of(&name);
        let segments = segment_and_resample(&parsed.trajectory, cfg.dt_s, cfg.max_gap_s);
        let mut windows = 0usize;
        for seg in &segments {
            let w = make_windows(seg, cfg.in_len, cfg.horizon);
            windows += w.len();
            match split {
                Split::Train => {
                    train_points.extend(seg.points().iter().map(|p| [p.lat, p.lon]));
                    train.extend(w);
                }
                Split::Val => val.extend(w),
                Split::Test => test.extend(w),
            }
            segment_records.push(SegmentRecord {
                file: name.clone(),
                split,
                track: seg.clone(),
            });
        }
        entries.push(FileEntry {
            name,
            split,
            points: parsed.trajectory.len(),
            dropped: parsed.dropped,
            segments: segments.len(),
            windows,
        });
    }

    let stats = NormStats::fit(&train_points)
        .map_err(|e| Error::Trajectory(format!("training split unusable: {e}")))?;

    let mut manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        config: cfg.clone(),
        stats,
        train_windows: train.len(),
        val_windows: val.len(),
        test_windows: test.len(),
        files: entries,
        fingerprint: String::new(),
    };
    let body = serde_json::to_string_pretty(&manifest)?;
    manifest.fingerprint = fingerprint_hex(body.as_bytes());

    Ok(Dataset { manifest, train, val, test, segments: segment_records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::GeoPoint;

    fn synthetic_parsed(seed: u64, n: usize) -> ParsedPlt {
        // wobbling walk, 2 s sampling
        let mut lat = 39.98 + seed as f64 * 1e-3;
        let mut lon = 116.32;
        let mut pts = Vec::new();
        for k in 0..n {
            lat += 1.2e-5 * ((k as f64 * 0.1 + seed as f64).sin() + 1.2);
            lon += 1.0e-5 * ((k as f64 * 0.07).cos() + 0.8);
            pts.push(GeoPoint::new(lat, lon, k as f64 * 2.0));
        }
        ParsedPlt {
            trajectory: Trajectory::new(pts).unwrap(),
            dropped: 0,
        }
    }

    fn corpus(n_files: usize) -> Vec<(String, ParsedPlt)> {
        (0..n_files)
            .map(|i| (format!("track_{i:03}.plt"), synthetic_parsed(i as u64, 300)))
            .collect()
    }

    #[test]
    fn splits_are_disjoint_at_file_level() {
        let names: Vec<String> = (0..71).map(|i| format!("f{i:03}")).collect();
        let assignment = split_files(&names, 3, 0.8, 0.1);
        assert_eq!(assignment.len(), 71);
        let train = assignment.iter().filter(|(_, s)| *s == Split::Train).count();
        let val = assignment.iter().filter(|(_, s)| *s == Split::Val).count();
        let test = assignment.iter().filter(|(_, s)| *s == Split::Test).count();
        assert_eq!(train + val + test, 71);
        assert_eq!(train, 57); // round(71 * 0.8)
        assert_eq!(val, 7);
        assert_eq!(test, 7);
        // no duplicates
        let mut seen: Vec<&String> = assignment.iter().map(|(n, _)| n).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 71);
    }

    #[test]
    fn split_is_deterministic_in_seed() {
        let names: Vec<String> = (0..20).map(|i| format!("f{i:02}")).collect();
        assert_eq!(split_files(&names, 5, 0.8, 0.1), split_files(&names, 5, 0.8, 0.1));
        assert_ne!(split_files(&names, 5, 0.8, 0.1), split_files(&names, 6, 0.8, 0.1));
    }

    #[test]
    fn build_produces_consistent_counts_and_manifest() {
        let ds = build_dataset(corpus(10), &DatasetConfig::default()).unwrap();
        assert_eq!(ds.manifest.train_windows, ds.train.len());
        assert_eq!(ds.manifest.val_windows, ds.val.len());
        assert_eq!(ds.manifest.test_windows, ds.test.len());
        assert!(ds.train.len() > 0);
        let total: usize = ds.manifest.files.iter().map(|f| f.windows).sum();
        assert_eq!(total, ds.train.len() + ds.val.len() + ds.test.len());
        assert!(!ds.manifest.fingerprint.is_empty());
    }

    #[test]
    fn rebuild_is_byte_identical() {
        let a = build_dataset(corpus(8), &DatasetConfig::default()).unwrap();
        let b = build_dataset(corpus(8), &DatasetConfig::default()).unwrap();
        assert_eq!(
            a.manifest.to_json_string().unwrap(),
            b.manifest.to_json_string().unwrap()
        );
    }

    #[test]
    fn manifest_round_trips_and_rejects_bad_version() {
        let ds = build_dataset(corpus(5), &DatasetConfig::default()).unwrap();
        let json = ds.manifest.to_json_string().unwrap();
        let back = DatasetManifest::from_json_str(&json).unwrap();
        assert_eq!(back.train_windows, ds.manifest.train_windows);
        assert_eq!(back.fingerprint, {
            let mut m = ds.manifest.clone();
            m.fingerprint = String::new();
            fingerprint_hex(serde_json::to_string_pretty(&m).unwrap().as_bytes())
        });

        let bad = json.replace("\"version\": 1", "\"version\": 999");
        assert!(DatasetManifest::from_json_str(&bad).is_err());
    }

    #[test]
    fn stats_come_from_the_train_split_only() {
        let files = corpus(10);
        let ds = build_dataset(files.clone(), &DatasetConfig::default()).unwrap();
        let train_names: Vec<_> = ds.manifest.file_names(Split::Train).iter().map(|s| s.to_string()).collect();
        let mut pts = Vec::new();
        let cfg = DatasetConfig::default();
        for (name, parsed) in &files {
            if train_names.contains(name) {
                for seg in segment_and_resample(&parsed.trajectory, cfg.dt_s, cfg.max_gap_s) {
                    pts.extend(seg.points().iter().map(|p| [p.lat, p.lon]));
                }
            }
        }
        let expect = NormStats::fit(&pts).unwrap();
        assert_eq!(ds.manifest.stats, expect);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(build_dataset(Vec::new(), &DatasetConfig::default()).is_err());
    }
}
