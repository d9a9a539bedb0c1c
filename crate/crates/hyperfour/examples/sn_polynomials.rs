//! The polynomials `S_n` whose values at `1/λ` match the principal part of
//! `e^{−iπnτ}`, and the remainder they leave.

use hyperfour::real::C64;
use hyperfour::snpoly::SnTable;

fn main() -> hyperfour::Result<()> {
    let table = SnTable::with_default_order(5)?;
    for n in 1..=5 {
        let p = table.get(n)?;
        let coeffs: Vec<String> = (1..=n).map(|k| format!("{}", p.coeff(k).re)).collect();
        println!(
            "S_{n}(w) coefficients of w^1..w^{n}: [{}]",
            coeffs.join(", ")
        );
    }
    for tau in [C64::new(0.0, 1.0), C64::new(0.4, 0.3)] {
        let (r, err) = table.remainder_with_error(3, tau)?;
        println!("remainder R_3 at tau = {tau}: {r:.12} (error bound {err:.1e})");
    }
    Ok(())
}
