//! PLT ingestion pipeline: parse, gap-split, resample, window, manifest.
//!
//! Generates a small synthetic corpus in PLT format (drop in real files the
//! same way), builds the dataset, and prints the manifest that makes the
//! build reproducible.
//!
//! Run: `cargo run --release -p ris-sim --example prepare_dataset`

use ris_sim::synth::demo_corpus;
use ris_sim::trajectory::{build_dataset, make_windows, parse_plt, DatasetConfig, Split};

fn main() -> ris_sim::Result<()> {
    let corpus = demo_corpus(21, 12, 600.0);
    println!("synthesized {} PLT files, first lines of {}:", corpus.len(), corpus[0].0);
    for line in corpus[0].1.lines().take(8) {
        println!("  {line}");
    }

    let parsed = corpus
        .iter()
        .map(|(name, text)| Ok((name.clone(), parse_plt(text)?)))
        .collect::<ris_sim::Result<Vec<_>>>()?;
    println!(
        "\nparsed {} files, {} points in the first",
        parsed.len(),
        parsed[0].1.trajectory.len()
    );

    let cfg = DatasetConfig::default();
    let dataset = build_dataset(parsed, &cfg)?;
    let m = &dataset.manifest;
    println!(
        "resampled at {} s, windows {} + 1 target: train/val/test = {}/{}/{}",
        cfg.dt_s, cfg.in_len, m.train_windows, m.val_windows, m.test_windows
    );
    println!(
        "normalization (train split only): mean ({:.5}, {:.5}), std ({:.5}, {:.5})",
        m.stats.mean_lat, m.stats.mean_lon, m.stats.std_lat, m.stats.std_lon
    );
    println!("fingerprint {} (rebuilds are byte-identical)", m.fingerprint);

    for split in [Split::Train, Split::Val, Split::Test] {
        let files: Vec<&str> = m.file_names(split);
        println!("{split:?}: {files:?}");
    }

    // windowing on one resampled segment
    let seg = &dataset.segments_in(Split::Test).next().unwrap().track;
    let windows = make_windows(seg, cfg.in_len, cfg.horizon);
    println!(
        "\nfirst test segment: {} points -> {} sliding windows",
        seg.len(),
        windows.len()
    );
    Ok(())
}
