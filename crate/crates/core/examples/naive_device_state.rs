//! The "device state after post-selection" |φ⟩ - (i g/ħ) A_w π|φ⟩ next to
//! what the exact joint state actually gives once post-selected.
//!
//! cargo run --example naive_device_state

use weakmeas::estimator::{Experiment, Readout};
use weakmeas::pointer::{gaussian_pointer, moments, GridSpec};
use weakmeas::qmath::{pauli_z, HermitianOperator, Ket};
use weakmeas::weakvalues::naive_device_state;

fn main() -> weakmeas::Result<()> {
    let (c, s) = (3f64.sqrt() / 2.0, 0.5);
    let a = HermitianOperator::new(pauli_z())?;
    let (i, f) = (Ket::from_real(&[c, s])?, Ket::from_real(&[c, -s])?);
    let phi = gaussian_pointer(1.0, 512, 16.0, 1.0)?;

    println!("{:>5}  {:>14}  {:>14}", "g", "naive <x>/g", "exact <x>^(p)/g");
    for g in [0.05, 0.2, 0.5, 1.0] {
        let naive = moments(&naive_device_state(&a, &i, &f, g, &phi)?).mean_x / g;
        let exp = Experiment {
            observable: a.clone(),
            initial: i.clone(),
            post: f.clone(),
            strength_a: g,
            strength_f: 1.0,
            pointer_a: GridSpec::new(512, 16.0, 1.0, 1.0)?,
            pointer_f: GridSpec::new(512, 4.0, 0.05, 1.0)?,
            readout: Readout::Position,
            threshold: 0.5,
        };
        let (mean, _) = exp.readout_density()?.postselected_mean_a(exp.threshold);
        println!("{g:>5.2}  {naive:>14.6}  {:>14.6}", mean / g);
    }
    Ok(())
}
