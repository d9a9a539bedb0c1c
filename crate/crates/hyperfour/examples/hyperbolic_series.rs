//! Hyperbolic Fourier series: evaluation, the exceptional null series built
//! from the lambda coefficients, skew conversions and JSON round trips.

use hyperfour::dd::Dd;
use hyperfour::hfs::{
    exceptional_series, exceptional_tail_bound, expskew_convert, pskew_convert, Direction,
    HfsCoefficients, Sided,
};
use hyperfour::modular::ModularTables;
use hyperfour::real::C64;

fn main() -> hyperfour::Result<()> {
    let one = C64::new(1.0, 0.0);
    let c = HfsCoefficients::zero(Sided::One)
        .with_a(1, one)?
        .with_b(2, C64::new(0.0, 0.5))?;
    let tau = C64::new(0.2, 0.9);
    println!(
        "e^(i pi tau) + (i/2) e^(-2 i pi / tau) at {tau} = {:.12}",
        c.eval(tau)?
    );

    // P(w) = w gives -1 + Σ λ̂(n) (e^{iπnτ} + e^{−iπn/τ}) = 0
    let tables: ModularTables<Dd> = ModularTables::build(301)?;
    let null = exceptional_series(&[C64::new(0.0, 0.0), one], 300, &tables)?;
    for tau in [C64::new(0.0, 1.0), C64::new(0.2, 1.1), C64::new(-0.6, 0.9)] {
        println!(
            "null series at {tau}: |value| = {:.1e} (tail bound {:.1e})",
            null.eval(tau)?.norm(),
            exceptional_tail_bound(&[C64::new(0.0, 0.0), one], 300, tau)
        );
    }

    let small: ModularTables<Dd> = ModularTables::build(64)?;
    let skewed = pskew_convert(&c, 1.5, Direction::ToSkewed, &small)?;
    let back = pskew_convert(&skewed, 1.5, Direction::ToPlain, &small)?;
    println!(
        "power skew beta = 1.5: a_1 = {}, round trip a_1 = {}",
        skewed.a(1),
        back.a(1)
    );
    let e = expskew_convert(
        &HfsCoefficients::constant(one),
        0.3,
        -0.4,
        Direction::ToSkewed,
        &small,
    )?;
    println!(
        "exponential skew of the constant 1: a0 = {} = 16^0.3",
        e.a0()
    );

    let json = c.to_json_string()?;
    let parsed = HfsCoefficients::from_json_str(&json)?;
    println!(
        "JSON round trip preserves the series: {}",
        parsed.eval(tau)? == c.eval(tau)?
    );
    Ok(())
}
