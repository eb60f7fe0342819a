//! Thin command-line front end; all logic lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ris_sim::cli::{
    cmd_eval, cmd_prepare, cmd_simulate, cmd_sweep, cmd_train, exit_code_for, run_verification,
    Overrides, RunConfig,
};
use ris_sim::error::Error;
use ris_sim::sim::SweepKind;
use ris_sim::synth::demo_corpus;
use ris_sim::trajectory::Split;

#[derive(Parser)]
#[command(
    name = "ris-sim",
    version,
    about = "Multi-RIS uplink simulator: trajectory-predictive ON-OFF control vs baselines"
)]
struct Args {
    /// TOML run configuration (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed override (scenario, training, and split seeds).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker-thread cap (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a synthetic demo corpus of walker PLT files into the data dir.
    GenData {
        /// Number of files to generate.
        #[arg(long, default_value_t = 40)]
        files: usize,
        /// Duration of each walk, seconds.
        #[arg(long, default_value_t = 900.0)]
        duration: f64,
        /// Target directory (defaults to paths.data_dir).
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Parse, resample, split, and window the trajectory files; write the
    /// dataset manifest.
    Prepare {
        /// Directory of PLT files (defaults to paths.data_dir).
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Train the trajectory predictor; write checkpoint and loss curve.
    Train,
    /// Evaluate the checkpoint at the prediction horizon.
    Eval {
        /// Split to evaluate: train, val, or test.
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Run the configured scenario at a single operating point.
    Simulate {
        /// Comma-separated strategies (tpc,reactive,always_on,oracle,direct).
        #[arg(long)]
        methods: Option<String>,
        /// Frames to evaluate.
        #[arg(long)]
        frames: Option<usize>,
    },
    /// Sweep transmit power or element count and compare strategies.
    Sweep {
        /// What to vary: power or elements.
        #[arg(long, default_value = "power")]
        kind: String,
        /// Comma-separated sweep values (defaults from the config).
        #[arg(long)]
        values: Option<String>,
        #[arg(long)]
        methods: Option<String>,
        #[arg(long)]
        frames: Option<usize>,
    },
    /// Run the oracle verification suites; non-zero exit on any failure.
    Verify,
}

fn parse_list(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

fn parse_values(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad sweep value '{x}'")))
        })
        .collect()
}

fn run(args: Args) -> Result<(), Error> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        // ignore the error if a pool already exists (tests, repeated init)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut overrides = Overrides {
        seed: args.seed,
        out_dir: args.out.clone(),
        ..Overrides::default()
    };

    match args.cmd {
        Cmd::GenData { files, duration, data_dir } => {
            overrides.data_dir = data_dir;
            cfg.apply_overrides(&overrides);
            cfg.validate()?;
            std::fs::create_dir_all(&cfg.paths.data_dir)?;
            let corpus = demo_corpus(cfg.scenario.seed, files, duration);
            for (name, text) in &corpus {
                std::fs::write(cfg.paths.data_dir.join(name), text)?;
            }
            println!(
                "wrote {} walker files ({duration} s each) to {}",
                corpus.len(),
                cfg.paths.data_dir.display()
            );
        }
        Cmd::Prepare { data_dir } => {
            overrides.data_dir = data_dir;
            cfg.apply_overrides(&overrides);
            cfg.validate()?;
            let report = cmd_prepare(&cfg)?;
            for (name, reason) in &report.failed_files {
                eprintln!("skipped {name}: {reason}");
            }
            let m = &report.manifest;
            println!(
                "{} files (train/val/test windows: {}/{}/{}), manifest {} -> {}",
                m.files.len(),
                m.train_windows,
                m.val_windows,
                m.test_windows,
                m.fingerprint,
                report.manifest_path.display()
            );
        }
        Cmd::Train => {
            cfg.apply_overrides(&overrides);
            cfg.validate()?;
            let report = cmd_train(&cfg)?;
            println!(
                "trained {} epochs (best epoch {}): train loss {:.6e}, val loss {:.6e}, val error {:.1} m",
                report.epochs_run,
                report.best_epoch,
                report.final_train_loss,
                report.best_val_loss,
                report.val_error_m
            );
            println!(
                "checkpoint {} / loss curve {}",
                report.checkpoint_path.display(),
                report.loss_curve_path.display()
            );
        }
        Cmd::Eval { split } => {
            cfg.apply_overrides(&overrides);
            cfg.validate()?;
            let split: Split = split.parse()?;
            let r = cmd_eval(&cfg, split)?;
            println!(
                "{:?} split, {:.0} s horizon: {} windows, lstm {:.1} m vs linear {:.1} m",
                r.split, r.horizon_s, r.windows, r.lstm_err_m, r.linear_err_m
            );
            println!(
                "curved windows (> 30 deg heading change): {}, lstm {:.1} m vs linear {:.1} m",
                r.curved_windows, r.curved_lstm_err_m, r.curved_linear_err_m
            );
            for t in &r.per_trajectory {
                println!(
                    "  {:<24} {:>5} windows  lstm {:>8.1} m  linear {:>8.1} m",
                    t.file, t.windows, t.lstm_err_m, t.linear_err_m
                );
            }
        }
        Cmd::Simulate { methods, frames } => {
            overrides.methods = methods.as_deref().map(parse_list);
            overrides.frames = frames;
            cfg.apply_overrides(&overrides);
            cfg.validate()?;
            let report = cmd_simulate(&cfg)?;
            print_points(&report.output.points);
            println!("rows -> {}", report.csv_path.display());
        }
        Cmd::Sweep { kind, values, methods, frames } => {
            overrides.methods = methods.as_deref().map(parse_list);
            overrides.frames = frames;
            cfg.apply_overrides(&overrides);
            cfg.validate()?;
            let kind: SweepKind = kind.parse()?;
            let values = values.as_deref().map(parse_values).transpose()?;
            let report = cmd_sweep(&cfg, kind, values)?;
            print_points(&report.output.points);
            println!("rows -> {}", report.csv_path.display());
        }
        Cmd::Verify => {
            let report = run_verification()?;
            print!("{}", report.render());
            if !report.all_passed() {
                std::process::exit(3);
            }
        }
    }
    Ok(())
}

fn print_points(points: &[ris_sim::sim::PointSummary]) {
    for pt in points {
        let skipped = if pt.frames_skipped.is_empty() {
            String::new()
        } else {
            format!(" ({} skipped)", pt.frames_skipped.len())
        };
        println!("param {:>8}: {} frames{skipped}", pt.param, pt.frames_evaluated);
        for (m, db) in &pt.mean_gamma_db {
            println!("  {:<10} {:>9.2} dB", m.name(), db);
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
