//! Mean SINR per strategy across the element count per surface.
//!
//! Two runs: interference-free (coherent gain only, SINR climbs steadily with
//! N) and the full 10-interferer scenario, where larger surfaces also amplify
//! whatever interference they reflect.
//!
//! Run: `cargo run --release -p ris-sim --example element_sweep`

use ris_sim::control::Strategy;
use ris_sim::sim::{build_scenario, run_sweep, ScenarioConfig, SweepKind, SweepSpec, TruthPredictor};
use ris_sim::synth::{walker_trajectory, WalkerConfig};

fn run_case(interferers: usize) -> ris_sim::Result<()> {
    let config = ScenarioConfig {
        interferers,
        seed: 31,
        ..ScenarioConfig::default()
    };
    let tracks = (0..config.users())
        .map(|u| {
            let cfg = WalkerConfig {
                seed: 500 + u as u64,
                duration_s: 420.0,
                ..WalkerConfig::default()
            };
            (format!("walker_{u:02}"), walker_trajectory(&cfg))
        })
        .collect();
    let scenario = build_scenario(&config, tracks)?;
    let predictor = TruthPredictor::from_scenario(&scenario);
    let methods = vec![Strategy::Tpc, Strategy::AlwaysOn, Strategy::Oracle, Strategy::Direct];

    let spec = SweepSpec {
        kind: SweepKind::Elements,
        values: vec![100.0, 200.0, 400.0, 600.0],
        frames: 20,
        methods: methods.clone(),
    };
    let out = run_sweep(&scenario, &spec, &predictor)?;

    println!("interferers = {interferers}:");
    print!("{:>10}", "N");
    for m in &methods {
        print!("{:>12}", m.name());
    }
    println!();
    for pt in &out.points {
        print!("{:>10}", pt.param);
        for m in &methods {
            print!("{:>12.2}", pt.mean_for(*m).unwrap());
        }
        println!();
    }
    println!();
    Ok(())
}

fn main() -> ris_sim::Result<()> {
    run_case(0)?;
    run_case(10)
}
