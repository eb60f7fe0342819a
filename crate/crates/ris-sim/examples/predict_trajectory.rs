//! Multi-step rollout vs constant-velocity extrapolation on a turning walk.
//!
//! Trains a compact model, then rolls both predictors 10 steps (50 s) ahead
//! along a held-out track and prints the horizon errors. On sustained turns
//! the constant-velocity line overshoots; the recurrent model tracks the
//! curvature it saw in the history window.
//!
//! Run: `cargo run --release -p ris-sim --example predict_trajectory`

use ris_sim::geom::haversine_m;
use ris_sim::predictor::{linear_baseline, predict_horizon, train, TrainConfig};
use ris_sim::synth::demo_corpus;
use ris_sim::trajectory::{build_dataset, parse_plt, DatasetConfig, Split};

fn main() -> ris_sim::Result<()> {
    let corpus = demo_corpus(7, 100, 600.0);
    let parsed = corpus
        .iter()
        .map(|(name, text)| Ok((name.clone(), parse_plt(text)?)))
        .collect::<ris_sim::Result<Vec<_>>>()?;
    let dataset = build_dataset(parsed, &DatasetConfig::default())?;

    let config = TrainConfig {
        hidden: 32,
        epochs: 100,
        learning_rate: 3e-3,
        seed: 7,
        patience: 15,
        ..TrainConfig::default()
    };
    eprintln!("training H = {} for up to {} epochs...", config.hidden, config.epochs);
    let outcome = train(&dataset, &config)?;
    eprintln!("best val loss {:.3e}\n", outcome.best_val_loss);

    let seg = dataset
        .segments_in(Split::Test)
        .max_by_key(|s| s.track.len())
        .expect("test segment");
    let pts = seg.track.points();
    let (in_len, steps, dt) = (8usize, 10usize, dataset.manifest.config.dt_s);

    println!("held-out track {} ({} points)", seg.file, pts.len());
    println!("{:>8} {:>12} {:>12}", "t [s]", "lstm [m]", "linear [m]");
    let mut sums = (0.0, 0.0, 0usize);
    for decide in ((in_len - 1)..(pts.len() - steps)).step_by(8) {
        let history = &pts[decide + 1 - in_len..=decide];
        let truth = pts[decide + steps];
        let lstm = *predict_horizon(&outcome.params, &outcome.stats, history, steps, dt, in_len)?
            .last()
            .unwrap();
        let lin = *linear_baseline(history, steps)?.last().unwrap();
        let (el, eb) = (haversine_m(&lstm, &truth), haversine_m(&lin, &truth));
        println!("{:>8.0} {el:>12.1} {eb:>12.1}", truth.t);
        sums = (sums.0 + el, sums.1 + eb, sums.2 + 1);
    }
    println!(
        "\nmean over {} rollouts at the 50 s horizon: lstm {:.1} m, linear {:.1} m",
        sums.2,
        sums.0 / sums.2 as f64,
        sums.1 / sums.2 as f64
    );
    Ok(())
}
