//! The release-gate verification suites, as a library call.
//!
//! Same checks as `ris-sim verify`: backpropagation vs finite differences,
//! greedy vs exhaustive control, alignment vs brute-force codebook search,
//! and the algebraic SINR/path-loss identities.
//!
//! Run: `cargo run --release -p ris-sim --example verify_oracles`

use ris_sim::cli::run_verification;

fn main() -> ris_sim::Result<()> {
    let report = run_verification()?;
    print!("{}", report.render());
    if report.all_passed() {
        println!("\nall checks passed");
        Ok(())
    } else {
        Err(ris_sim::Error::Sim("verification failed".into()))
    }
}
