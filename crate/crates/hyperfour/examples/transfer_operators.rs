//! Transfer operators acting on functions on `(−1, 1)`.

use std::f64::consts::PI;

use hyperfour::kleingordon::{transfer_apply, transfer_apply_fn, GridFunction, TransferKind};
use hyperfour::real::C64;

fn main() -> hyperfour::Result<()> {
    let one = GridFunction::from_fn(256, |_| C64::new(1.0, 0.0))?;
    let v = transfer_apply(TransferKind::Omega(0.0), &one, 1.0 - 1e-9, 100)?;
    println!(
        "T_0[1](1-) = {:.12} vs pi^2/4 - 1 = {:.12} (tail bound {:.1e})",
        v.value.re,
        PI * PI / 4.0 - 1.0,
        v.tail_bound
    );

    let bump = GridFunction::from_fn(256, |t| C64::new(1.0 - t * t, 0.0))?;
    for kind in [
        TransferKind::Omega(0.0),
        TransferKind::Omega(0.25),
        TransferKind::K(1),
        TransferKind::AbsK(1),
    ] {
        let vals = [-0.5, 0.0, 0.5]
            .iter()
            .map(|&t| transfer_apply(kind, &bump, t, 200).map(|v| format!("{:.8}", v.value)))
            .collect::<hyperfour::Result<Vec<_>>>()?;
        println!(
            "{kind:?} applied to 1 - t^2 at t = -1/2, 0, 1/2: {}",
            vals.join("  ")
        );
    }

    let v = transfer_apply_fn(
        TransferKind::Omega(0.5),
        |s| Ok(C64::new(s.cos(), 0.0)),
        1.0,
        0.3,
        200,
    )?;
    println!("T_(1/2)[cos](0.3) = {:.10}", v.value);
    Ok(())
}
