//! System plus two pointers: exact von Neumann evolution for A = σ_z and
//! then F̂ = |F⟩⟨F|, with the resulting pointer moments next to their
//! first-order values.
//!
//! cargo run --example joint_evolution

use weakmeas::pointer::gaussian_pointer;
use weakmeas::qmath::{expectation, pauli_z, HermitianOperator, Ket};
use weakmeas::vonneumann::{
    evolve_first_order, evolve_sequence, initial_state, mean_pointer, position_correlation, CouplingSpec,
};

fn main() -> weakmeas::Result<()> {
    let (c, s) = (3f64.sqrt() / 2.0, 0.5);
    let i = Ket::from_real(&[c, s])?;
    let f = Ket::from_real(&[c, -s])?;
    let a = HermitianOperator::new(pauli_z())?;
    let proj = f.projector()?;

    let ptrs = [gaussian_pointer(1.0, 512, 16.0, 1.0)?, gaussian_pointer(0.05, 512, 4.0, 1.0)?];
    let s0 = initial_state(&i, &ptrs)?;

    println!("{:>6}  {:>12} {:>12}  {:>12} {:>12}  {:>12} {:>12}", "g_A", "x_A", "g<A>", "x_F", "<F>", "<xAxF>/g", "Re<I|FA|I>");
    let fa = proj.matmul(a.as_operator())?;
    for g in [0.01, 0.05, 0.1, 0.3] {
        let ca = CouplingSpec::new(a.clone(), g, 0)?;
        let cf = CouplingSpec::new(HermitianOperator::new(proj.clone())?, 1.0, 1)?;
        let st = evolve_sequence(&s0, &[ca, cf])?;
        println!(
            "{g:>6.2}  {:>12.8} {:>12.8}  {:>12.8} {:>12.8}  {:>12.8} {:>12.8}",
            mean_pointer(&st, 0)?,
            g * expectation(a.as_operator(), &i)?.re,
            mean_pointer(&st, 1)?,
            expectation(&proj, &i)?.re,
            position_correlation(&st)? / g,
            expectation(&fa, &i)?.re,
        );
    }

    // the truncated expansion is not norm preserving
    let one = initial_state(&i, &ptrs[..1])?;
    let lin = evolve_first_order(&one, &CouplingSpec::new(a, 0.1, 0)?)?;
    println!("\nfirst-order state norm² at g = 0.1: {:.10} (1 + g²/4 = {:.10})", lin.norm_sqr(), 1.0 + 0.01 / 4.0);
    Ok(())
}
