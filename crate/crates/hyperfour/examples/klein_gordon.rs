//! Solutions of `u_xy + u = 0` with prescribed values on the lattice-cross
//! `{(πm, 0)} ∪ {(0, πn)}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use hyperfour::biortho::BiorthoTable;
use hyperfour::kleingordon::{
    goursat_check, kg_eval, kg_interp_solution, kg_interpolate, pde_residual, Axis, LatticeData,
};
use hyperfour::real::C64;

fn main() -> hyperfour::Result<()> {
    let table = Arc::new(BiorthoTable::new(8)?);
    let one = C64::new(1.0, 0.0);

    let u = kg_interpolate(
        table.clone(),
        &BTreeMap::from([(2, one)]),
        &BTreeMap::from([(3, one)]),
    )?;
    println!("u(πm, 0) and u(0, πn) for α_2 = β_3 = 1:");
    for m in 0..=4 {
        println!(
            "  m = {m}: {:+.8}   n = {m}: {:+.8}",
            u.lattice_value(Axis::X, m)?.re,
            u.lattice_value(Axis::Y, m)?.re
        );
    }
    let v = kg_eval(&u, 2.0 * PI, 0.0, 100.0)?;
    println!(
        "direct quadrature u(2π, 0) = {:.6} (tail bound {:.1e}, {} nodes)",
        v.value, v.tail_bound, v.nodes
    );
    println!(
        "PDE residual at (0.4, -0.7): {:.1e}",
        pde_residual(&u, 0.4, -0.7, 1e-3)?
    );

    let u1 = kg_interp_solution(table.clone(), 1, Axis::X)?;
    let g = goursat_check(&u1, -1.5, 40.0)?;
    println!(
        "Goursat identity for u_(1,0) at y = -1.5: residual {:.1e}",
        g.residual
    );

    let lattice =
        LatticeData::from_json_str(r#"{"alpha": {"0": 0.5, "1": [0, 1]}, "beta": {"2": -1}}"#)?;
    let w = lattice.solution(table)?;
    println!(
        "lattice data from JSON: u(0, 0) = {:.6}",
        w.lattice_value(Axis::X, 0)?
    );
    let xs = [0.0, PI];
    let ys = [0.0, 2.0 * PI];
    w.write_grid_csv(std::io::stdout().lock(), &xs, &ys)?;
    Ok(())
}
