//! Closed-form weak values of σ_z for the family I = (cos θ, sin θ),
//! F = (cos θ, -sin θ), showing values far outside the eigenvalue range ±1.
//!
//! cargo run --example anomalous_weak_value

use weakmeas::qmath::{pauli_z, HermitianOperator, Ket};
use weakmeas::weakvalues::{commutation_report, weak_value};

fn main() -> weakmeas::Result<()> {
    let a = HermitianOperator::new(pauli_z())?;
    println!("{:>6}  {:>10}  {:>10}  {:>10}", "theta", "A_w", "<I|A|I>", "|<F|I>|^2");
    for theta in [0.0, 15.0, 30.0, 40.0, 44.0] {
        let t = f64::to_radians(theta);
        let i = Ket::from_real(&[t.cos(), t.sin()])?;
        let f = Ket::from_real(&[t.cos(), -t.sin()])?;
        let r = commutation_report(&a, &i, &f)?;
        println!(
            "{theta:>6.1}  {:>10.4}  {:>10.4}  {:>10.4}",
            r.weak_value.re, r.expectation, r.postselect_prob
        );
    }

    // the formulas built from {F̂, A} and [F̂, A] give the same numbers
    let t = 30f64.to_radians();
    let (i, f) = (Ket::from_real(&[t.cos(), t.sin()])?, Ket::from_real(&[t.cos(), -t.sin()])?);
    let r = commutation_report(&a, &i, &f)?;
    println!("\ntheta = 30: A_w = {}, re formula = {}, ||[A,F]|| = {:.4}", weak_value(&a, &i, &f)?, r.re_formula, r.commutator_norms.a_f);
    Ok(())
}
