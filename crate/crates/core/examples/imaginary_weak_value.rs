//! The imaginary part of a weak value shows up in the A pointer's momentum.
//! A = σ_x, I = |0⟩, F = (|0⟩ + i|1⟩)/√2 gives A_w = -i.
//!
//! cargo run --release --example imaginary_weak_value

use weakmeas::cli::scenario::preset;
use weakmeas::estimator::{run_sampling, SamplingMode};
use weakmeas::weakvalues::weak_value;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sc = preset("imaginary-sigma-x")?;
    let w = weak_value(&sc.a_matrix, &sc.i_vector, &sc.f_vector)?;
    println!("closed form: A_w = {:.6} {:+.6}i", w.re, w.im);

    let exp = sc.experiment();
    for (mode, seed) in [(SamplingMode::PointerModel, 1), (SamplingMode::IdealProjection, 2)] {
        let r = run_sampling(&exp, mode, 1_000_000, seed)?;
        println!(
            "{mode:<15} <Pi_A>^(p) = {:+.6}  Im estimate = {:+.4} ± {:.4}",
            r.mean_selected_a,
            r.estimate,
            r.std_error.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
