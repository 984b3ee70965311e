//! Sampling joint pointer readouts, post-selecting on X_F and reading the
//! real part of the weak value off the boosted conditional mean.
//!
//! cargo run --release --example postselection_monte_carlo

use weakmeas::estimator::{
    boost_identity_check, sample_records, summarize, Experiment, Readout, SamplingMode,
};
use weakmeas::pointer::GridSpec;
use weakmeas::qmath::{pauli_z, HermitianOperator, Ket};

fn main() -> weakmeas::Result<()> {
    let (c, s) = (3f64.sqrt() / 2.0, 0.5);
    let exp = Experiment {
        observable: HermitianOperator::new(pauli_z())?,
        initial: Ket::from_real(&[c, s])?,
        post: Ket::from_real(&[c, -s])?,
        strength_a: 0.05,
        strength_f: 1.0,
        pointer_a: GridSpec::new(512, 16.0, 1.0, 1.0)?,
        pointer_f: GridSpec::new(512, 4.0, 0.05, 1.0)?,
        readout: Readout::Position,
        threshold: 0.5,
    };

    let seed = 42;
    let records = sample_records(&exp, 1_000_000, seed)?;
    let sm = summarize(&records, &exp, SamplingMode::PointerModel, seed)?;
    println!("n = {}, selected = {}", sm.n_total, sm.n_selected);
    println!("<X_A X_F>      = {:.6}", sm.mean_all_af);
    println!("<X_F>          = {:.6} (raw pointer mean {:.6})", sm.mean_f, sm.mean_f_raw);
    println!("<X_A X_F>^(p)  = {:.6}, boost = {:.4}", sm.mean_selected_af, sm.boost);
    println!("estimate       = {:.4} ± {:.4} (weak value 2)", sm.estimate, sm.std_error.unwrap_or(f64::NAN));

    let b = boost_identity_check(&records)?;
    println!("boost identity: {:.15} vs {:.15}, pass = {}", b.lhs, b.rhs, b.pass);

    // the first 5 records of the stream
    for r in &records[..5] {
        println!("  x_A = {:+.5}  x_F = {:+.5}  selected = {}", r.value_a, r.value_f, r.selected);
    }
    Ok(())
}
