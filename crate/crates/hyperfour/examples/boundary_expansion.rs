//! Expanding boundary data on the semicircle into a hyperbolic Fourier
//! series, from a closed form and from samples, with the fast
//! positive-index path as a cross-check.

use std::f64::consts::PI;

use hyperfour::biortho::BiorthoTable;
use hyperfour::expand::{expand_boundary, fast_path_check, BoundaryFunction, SampledBoundary};
use hyperfour::real::C64;

fn main() -> hyperfour::Result<()> {
    let x = 0.7;
    let f = BoundaryFunction::Cauchy(x);
    let exp = expand_boundary(&f, 6)?;
    let table = BiorthoTable::new(6)?;
    println!("Cauchy kernel at x = {x}: coefficients are A_n(x) and B_n(x)");
    for n in 1..=6i64 {
        println!(
            "  a_{n} = {:.10}  A_{n}(x) = {:.10}  b_{n} = {:.10}",
            exp.coeffs.a(n),
            table.an_eval(n, x)?,
            exp.coeffs.b(n)
        );
    }
    println!(
        "height invariance {:.1e}, boundary residual {:.1e}",
        exp.invariance, exp.boundary_residual
    );
    let fast = fast_path_check(&table, &f, &exp, 6, 1e-6)?;
    println!("fast positive path agrees to {fast:.1e}");

    let theta: Vec<f64> = (0..400).map(|k| PI * (k as f64 + 0.5) / 400.0).collect();
    let values: Vec<C64> = theta
        .iter()
        .map(|&t| {
            let eta = C64::from_polar(1.0, t);
            (C64::i() * PI * eta).exp() + 0.25 * (-C64::i() * 2.0 * PI / eta).exp()
        })
        .collect();
    let sampled = BoundaryFunction::Sampled(SampledBoundary::new(theta, values)?);
    let exp = expand_boundary(&sampled, 4)?;
    println!("sampled e^(iπη) + e^(-2iπ/η)/4:");
    println!(
        "  a_1 = {:.6}, b_2 = {:.6}, a_2 = {:.1e}",
        exp.coeffs.a(1),
        exp.coeffs.b(2),
        exp.coeffs.a(2).norm()
    );
    println!("  JSON: {}", exp.coeffs.to_json_string()?);
    Ok(())
}
