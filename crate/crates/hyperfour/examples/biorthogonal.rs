//! The biorthogonal functions `A_0`, `A_n`, `B_n`: values, lattice-point
//! identities at the origin, pairings, periodization and CSV export.

use std::f64::consts::PI;

use hyperfour::biortho::{r4_count, BiorthoTable, CoefficientFunction, Lattice};

fn main() -> hyperfour::Result<()> {
    let t = BiorthoTable::new(6)?;
    println!(
        "A_0(0) = {:.15}, 4 ln 2 / pi^2 = {:.15}",
        t.a0_eval(0.0)?,
        4.0 * 2f64.ln() / (PI * PI)
    );

    println!("n  A_n(0)·2π²n  r4 on (Z+1/2)^4  (A_n+B_n)(0)·2π²n  r4 on Z^4");
    for n in 1..=6i64 {
        let s = 2.0 * PI * PI * n as f64;
        let a = t.an_eval(n, 0.0)?;
        let b = t.bn_eval(n, 0.0)?;
        println!(
            "{n}  {:>11.6}  {:>16}  {:>17.6}  {:>9}",
            a.re * s,
            r4_count(n as u64, Lattice::HalfIntegers),
            (a + b).re * s,
            r4_count(n as u64, Lattice::Integers)
        );
    }

    println!("pairings <A_n, e^(iπmx)> for n, m ≤ 3:");
    for n in 1..=3 {
        let row = (1..=3)
            .map(|m| {
                Ok(format!(
                    "{:+.6}",
                    t.pairing(CoefficientFunction::A(n), m)?.re
                ))
            })
            .collect::<hyperfour::Result<Vec<String>>>()?;
        println!("  n = {n}: {}", row.join("  "));
    }
    let report = t.pairing_checked(CoefficientFunction::A(2), 2, 200.0)?;
    println!(
        "<A_2, e_2> = {:.10} (direct quadrature differs by {:.1e}, tail bound {:.1e})",
        report.value, report.residual, report.tail_bound
    );

    let (sum, bound) = t.periodization_sum(CoefficientFunction::A(1), 0.3, 10_000)?;
    println!(
        "Σ_j A_1(0.3 + 2j) = {sum:.6} vs e^(-0.3iπ)/2 = {:.6} (tail bound {bound:.1e})",
        0.5 * hyperfour::real::C64::new(0.0, -0.3 * PI).exp()
    );

    let xs: Vec<f64> = (0..=8).map(|k| -2.0 + 0.5 * k as f64).collect();
    t.write_csv(std::io::stdout().lock(), 2, &xs)?;
    Ok(())
}
