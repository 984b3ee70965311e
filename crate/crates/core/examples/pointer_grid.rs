//! A Gaussian pointer on the periodic grid: moments in both
//! representations, spectral shifts and the momentum transform.
//!
//! cargo run --example pointer_grid

use weakmeas::pointer::{gaussian_pointer, moments, shift, to_momentum};

fn main() -> weakmeas::Result<()> {
    let p = gaussian_pointer(1.0, 512, 16.0, 1.0)?;
    let m = moments(&p);
    println!("fresh pointer: <x> = {:.2e}, var x = {:.10}, var p = {:.10}", m.mean_x, m.var_x, m.var_p);
    println!("uncertainty product var_x·var_p = {:.10} (bound 1/4)", m.var_x * m.var_p);

    let moved = shift(&p, 1.25)?;
    println!("after shift by 1.25: <x> = {:.12}, norm = {:.15}", moments(&moved).mean_x, moved.norm_sqr());

    let kicked = p.kick(0.8);
    println!("after momentum kick 0.8: <p> = {:.12}", moments(&kicked).mean_p);

    let q = to_momentum(&p);
    println!("momentum grid: dp = {:.5}, Parseval norm = {:.15}", q.dp(), q.norm_sqr());

    match shift(&p, 3.0) {
        Err(e) => println!("shift by 3.0 refused: {e}"),
        Ok(_) => println!("shift by 3.0 accepted"),
    }
    Ok(())
}
