//! Truncated nome series: the theta and lambda expansions and the formal
//! exp, log and power operations.

use hyperfour::dd::Dd;
use hyperfour::modular::ModularTables;
use hyperfour::real::{from_c64, to_c64, C64};

fn main() -> hyperfour::Result<()> {
    let t: ModularTables<Dd> = ModularTables::build(64)?;
    print!("lambda = ");
    for k in 1..=6 {
        print!("{:+} q^{k} ", to_c64(t.lambda.coeff(k).unwrap()).re);
    }
    println!("+ ...");
    print!("theta00 = ");
    for k in 0..=9 {
        print!("{:+} q^{k} ", to_c64(t.theta00.coeff(k).unwrap()).re);
    }
    println!("+ ...");

    let log = t.theta00.log()?;
    let back = log.exp()?;
    let err = (0..=64)
        .map(|k| to_c64(back.coeff(k).unwrap() - t.theta00.coeff(k).unwrap()).norm())
        .fold(0.0, f64::max);
    println!("exp(log theta00) reproduces theta00 to {err:.1e}");

    let root = t.one_minus_lambda.pow(from_c64(C64::new(0.25, 0.0)))?;
    let fourth = root.mul(&root).mul(&root).mul(&root);
    let err = (0..=64)
        .map(|k| {
            let want = to_c64(t.one_minus_lambda.coeff(k).unwrap());
            (to_c64(fourth.coeff(k).unwrap()) - want).norm() / want.norm().max(1.0)
        })
        .fold(0.0, f64::max);
    println!("((1 - lambda)^(1/4))^4 reproduces 1 - lambda to relative {err:.1e}");
    Ok(())
}
