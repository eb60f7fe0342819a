//! Train the two-layer LSTM from scratch on synthetic walks.
//!
//! Small model, couple of minutes of CPU; prints the loss curve and the
//! one-step validation error in meters. The `train` subcommand runs the same
//! loop at full scale.
//!
//! Run: `cargo run --release -p ris-sim --example train_predictor`

use ris_sim::predictor::{train, TrainConfig};
use ris_sim::synth::demo_corpus;
use ris_sim::trajectory::{build_dataset, parse_plt, DatasetConfig};

fn main() -> ris_sim::Result<()> {
    let corpus = demo_corpus(5, 24, 600.0);
    let parsed = corpus
        .iter()
        .map(|(name, text)| Ok((name.clone(), parse_plt(text)?)))
        .collect::<ris_sim::Result<Vec<_>>>()?;
    let dataset = build_dataset(parsed, &DatasetConfig::default())?;
    println!(
        "dataset: {} train / {} val windows",
        dataset.train.len(),
        dataset.val.len()
    );

    let config = TrainConfig {
        hidden: 24,
        epochs: 40,
        learning_rate: 3e-3,
        seed: 5,
        patience: 10,
        ..TrainConfig::default()
    };
    println!(
        "training: 2-layer LSTM, H = {}, batch {}, Adam lr {}\n",
        config.hidden, config.batch_size, config.learning_rate
    );

    let outcome = train(&dataset, &config)?;
    for e in outcome.curve.iter().step_by(5) {
        println!(
            "epoch {:>3}: train {:.3e}  val {:.3e}",
            e.epoch, e.train_loss, e.val_loss
        );
    }
    println!(
        "\nbest epoch {} with validation loss {:.3e}",
        outcome.best_epoch, outcome.best_val_loss
    );

    // translate the normalized loss into meters (rough: std-weighted RMSE)
    let rmse_z = (2.0 * outcome.best_val_loss / 2.0).sqrt();
    let meters = rmse_z * outcome.stats.std_lat.to_radians() * 6_371_000.0;
    println!("~{meters:.1} m one-step RMSE at a {} s step", dataset.manifest.config.dt_s);
    Ok(())
}
