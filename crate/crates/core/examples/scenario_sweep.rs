//! Scenario files and sweeps through the library API: load a preset, sweep
//! the A coupling in exact-moments mode and print the sweep CSV.
//!
//! cargo run --release --example scenario_sweep [path/to/scenario.json]

use weakmeas::cli::report::{sweep_csv, sweep_rows, SweepParam};
use weakmeas::cli::scenario::{load_scenario, preset, Mode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut sc = match std::env::args().nth(1) {
        Some(path) => load_scenario(path.as_ref())?,
        None => preset("qubit-theta30")?,
    };
    sc.run.mode = Mode::ExactMoments;

    let gs = [0.01, 0.02, 0.05, 0.1, 0.2];
    let rows = sweep_rows(&sc, SweepParam::GaTa, &gs).map_err(|e| e.to_string())?;
    print!("{}", sweep_csv(SweepParam::GaTa, &rows));

    // abs_error / g² settles to a constant in the first-order regime
    for r in &rows {
        eprintln!("g = {:<5} abs_error/g² = {:.4}", r.value, r.abs_error / (r.value * r.value));
    }
    Ok(())
}
