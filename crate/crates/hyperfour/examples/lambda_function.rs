//! Evaluating the modular lambda function, its functional equations and its
//! inverse on the double fundamental domain.

use hyperfour::modular::{table_order_from_env, ModularTables};
use hyperfour::real::C64;

fn main() -> hyperfour::Result<()> {
    let t: ModularTables = ModularTables::build(table_order_from_env())?;
    let i = C64::new(0.0, 1.0);
    println!("lambda(i) = {}", t.lambda_eval(i)?);
    println!("theta00(i) = {}", t.theta00_eval(i)?);

    for tau in [
        C64::new(0.3, 0.8),
        C64::new(-0.9, 0.05),
        C64::new(0.95, 0.01),
    ] {
        let l = t.lambda_full(tau)?;
        let s = t.lambda_eval(-1.0 / tau)?;
        let m = l.one_minus.norm();
        let shifted = t.lambda_eval(tau + 1.0)?;
        println!(
            "tau = {tau}: lambda = {:.6e}, |S residual| = {:.1e}, |T residual| = {:.1e}",
            l.lambda,
            (s - l.one_minus).norm() / l.lambda.norm().max(1.0),
            (shifted + (l.lambda / m) / (l.one_minus / m)).norm() / shifted.norm().max(1.0),
        );
    }

    match t.lambda_eval(C64::new(0.999, 0.001)) {
        Ok(v) => println!("lambda(0.999+0.001i) = {v:e}"),
        Err(e) => println!("near the cusp: {e}"),
    }

    for zeta in [C64::new(0.5, 0.0), C64::new(-3.0, 2.0), C64::new(0.2, -0.7)] {
        let tau = t.lambda_inverse(zeta)?;
        println!(
            "lambda^-1({zeta}) = {tau:.12}, lambda of that = {:.12}",
            t.lambda_eval(tau)?
        );
    }
    Ok(())
}
