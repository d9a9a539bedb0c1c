//! Reference checks with stated tolerances and time budgets, shared by the
//! `verify` subcommand and the acceptance tests.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::biortho::{r4_count, BiorthoTable, CoefficientFunction, Lattice};
use crate::dd::Dd;
use crate::error::Result;
use crate::expand::{expand_boundary, fast_path_check, BoundaryFunction};
use crate::halfplane::{average_height, average_height_leading, flycatcher_height, HPoint};
use crate::hfs::{expskew_convert, pskew_convert, Direction, HfsCoefficients, Sided};
use crate::kleingordon::{
    kg_eval, kg_interpolate, transfer_apply, Axis, GridFunction, TransferKind,
};
use crate::modular::ModularTables;
use crate::quad::GaussLegendre;
use crate::real::{from_c64, to_c64, C64};

/// Identifiers of all reference checks, in run order.
pub const CRITERIA: [u8; 14] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14];

/// One measured quantity with its acceptance threshold.
#[derive(Clone, Debug)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(label: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check {
            label: label.into(),
            measured,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.measured.is_finite() && self.measured <= self.tolerance
    }
}

/// Outcome of one reference check.
#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// Set when the computation itself failed.
    pub error: Option<String>,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionReport {
    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    pub fn accuracy_passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(Check::passed)
    }

    pub fn passed(&self) -> bool {
        self.accuracy_passed() && self.within_budget()
    }

    /// The check with the largest `measured / tolerance`.
    pub fn worst(&self) -> Option<&Check> {
        let ratio = |c: &Check| {
            if !c.measured.is_finite() {
                f64::INFINITY
            } else if c.tolerance > 0.0 {
                c.measured / c.tolerance
            } else if c.measured > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        };
        self.checks
            .iter()
            .max_by(|a, b| ratio(a).total_cmp(&ratio(b)))
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} {status}  {:<34}", self.id, self.title)?;
        if let Some(e) = &self.error {
            write!(f, "  error: {e}")?;
        } else if let Some(c) = self.worst() {
            write!(
                f,
                "  worst {} = {:.3e} (tol {:.1e})",
                c.label, c.measured, c.tolerance
            )?;
        }
        write!(
            f,
            "  {:.2} s / {} s",
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )?;
        if !self.within_budget() {
            write!(f, "  over time budget")?;
        }
        Ok(())
    }
}

fn meta(id: u8) -> Option<(&'static str, u64)> {
    Some(match id {
        1 => ("lambda Fourier coefficients", 1),
        2 => ("lambda functional equations", 1),
        3 => ("exceptional null series", 1),
        4 => ("A_0(0) closed form", 5),
        5 => ("A_n(0) four-square counts", 30),
        6 => ("semicircle biorthogonality", 30),
        7 => ("Poisson reconstruction", 60),
        8 => ("B_n / A_n symmetry", 20),
        9 => ("periodization sums", 60),
        10 => ("fly-catcher heights", 10),
        11 => ("expansion consistency", 60),
        12 => ("Klein-Gordon interpolation", 60),
        13 => ("transfer operators", 5),
        14 => ("skew conversions", 5),
        _ => return None,
    })
}

/// Runs one check; `None` for an unknown id. Computation errors are
/// recorded in the report rather than propagated.
pub fn run_criterion(id: u8) -> Option<CriterionReport> {
    let (title, budget) = meta(id)?;
    let start = Instant::now();
    let outcome = match id {
        1 => lambda_coefficients(),
        2 => functional_equations(),
        3 => exceptional_null_series(),
        4 => a0_at_zero(),
        5 => four_square_counts(),
        6 => biorthogonality(),
        7 => poisson_reconstruction(),
        8 => symmetry(),
        9 => periodization(),
        10 => heights(),
        11 => expansion_consistency(),
        12 => klein_gordon_interpolation(),
        13 => transfer_operators(),
        _ => skew_conversions(),
    };
    let elapsed = start.elapsed();
    let (checks, error) = match outcome {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    Some(CriterionReport {
        id,
        title,
        checks,
        error,
        elapsed,
        budget: Duration::from_secs(budget),
    })
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA
        .iter()
        .filter_map(|&id| run_criterion(id))
        .collect()
}

fn lambda_coefficients() -> Result<Vec<Check>> {
    let t: ModularTables<Dd> = ModularTables::build(64)?;
    let mut out = Vec::new();
    for (k, want) in [(1i64, 16.0), (2, -128.0), (3, 704.0)] {
        let c = to_c64(t.lambda.coeff(k).unwrap_or_default());
        out.push(Check::new(
            format!("|lambda_{k} - {want}|"),
            (c - want).norm(),
            1e-9,
        ));
    }
    Ok(out)
}

fn functional_equations() -> Result<Vec<Check>> {
    let t: ModularTables = ModularTables::build(64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut r_s, mut r_t): (f64, f64) = (0.0, 0.0);
    let mut skipped = 0usize;
    for _ in 0..100 {
        let y = 10f64.powf(rng.gen_range(-3.0..1.0));
        let tau = C64::new(rng.gen_range(-1.0..1.0), y);
        let (Ok(l), Ok(lt), Ok(ls)) = (
            t.lambda_full(tau),
            t.lambda_eval(tau + 1.0),
            t.lambda_eval(-1.0 / tau),
        ) else {
            skipped += 1;
            continue;
        };
        r_s = r_s.max((ls - l.one_minus).norm() / l.lambda.norm().max(1.0));
        let s = l.one_minus.norm();
        r_t = r_t.max((lt + (l.lambda / s) / (l.one_minus / s)).norm() / lt.norm().max(1.0));
    }
    Ok(vec![
        Check::new("S relation residual", r_s, 1e-8),
        Check::new("T relation residual", r_t, 1e-8),
        Check::new("unrepresentable points", skipped as f64, 10.0),
    ])
}

fn exceptional_null_series() -> Result<Vec<Check>> {
    let t: ModularTables<Dd> = ModularTables::build(301)?;
    let mut c = HfsCoefficients::zero(Sided::One);
    c.set_a0(from_c64(C64::new(-1.0, 0.0)));
    for n in 1..=300i64 {
        let v = t.lambda.coeff(n).unwrap_or_default();
        c.set_a(n, v)?;
        c.set_b(n, v)?;
    }
    let mut out = Vec::new();
    for tau in [C64::new(0.0, 1.0), C64::new(0.2, 1.1)] {
        out.push(Check::new(
            format!("|value at {tau}|"),
            c.eval(tau)?.norm(),
            1e-8,
        ));
    }
    Ok(out)
}

fn a0_at_zero() -> Result<Vec<Check>> {
    let t = BiorthoTable::new(1)?;
    let want = 4.0 * 2f64.ln() / (PI * PI);
    Ok(vec![Check::new(
        "|A_0(0) - 4 ln 2/pi^2|",
        (t.a0_eval(0.0)? - want).abs(),
        1e-8,
    )])
}

fn four_square_counts() -> Result<Vec<Check>> {
    let t = BiorthoTable::new(10)?;
    let (mut ea, mut eab): (f64, f64) = (0.0, 0.0);
    for n in 1..=10u64 {
        let scale = 2.0 * PI * PI * n as f64;
        let a = t.an_eval(n as i64, 0.0)?;
        let b = t.bn_eval(n as i64, 0.0)?;
        ea = ea.max((a - r4_count(n, Lattice::HalfIntegers) as f64 / scale).norm());
        eab = eab.max((a + b - r4_count(n, Lattice::Integers) as f64 / scale).norm());
    }
    Ok(vec![
        Check::new("A_n(0) vs half-integer count", ea, 1e-8),
        Check::new("A_n(0)+B_n(0) vs integer count", eab, 1e-8),
    ])
}

fn biorthogonality() -> Result<Vec<Check>> {
    let t = BiorthoTable::new(8)?;
    let mut worst: f64 = 0.0;
    for n in 1..=8i64 {
        for m in 1..=8i64 {
            let want = if m == n { 1.0 } else { 0.0 };
            worst = worst.max((t.pairing(CoefficientFunction::A(n), m)? - want).norm());
        }
    }
    Ok(vec![Check::new("max |<A_n, e_m> - delta|", worst, 1e-7)])
}

fn poisson_reconstruction() -> Result<Vec<Check>> {
    let t = BiorthoTable::new(25)?;
    let mut worst: f64 = 0.0;
    for tau in [C64::new(0.0, 1.0), C64::new(0.3, 0.8)] {
        for x in [0.0, 0.7, 3.0] {
            let (a, b) = t.eval_all(x)?;
            let mut s = C64::new(0.0, 0.0);
            for n in 1..=25usize {
                let k = PI * n as f64;
                s += a[n - 1] * (C64::i() * k * tau).exp() + b[n - 1] * (-C64::i() * k / tau).exp();
            }
            let rec = t.a0_eval(x)? + 2.0 * s.re;
            let p = tau.im / (PI * (C64::new(x, 0.0) - tau).norm_sqr());
            worst = worst.max((rec - p).abs());
        }
    }
    Ok(vec![Check::new("max reconstruction error", worst, 1e-6)])
}

fn symmetry() -> Result<Vec<Check>> {
    let t = BiorthoTable::new(8)?;
    let mut worst: f64 = 0.0;
    for n in 1..=8i64 {
        for x in [-2.5, -1.0, -0.3, 0.3, 1.0, 2.5] {
            let lhs = t.bn_eval(n, x)?;
            let rhs = t.an_eval(n, -1.0 / x)? / (x * x);
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(vec![Check::new(
        "max |B_n(x) - A_n(-1/x)/x^2|",
        worst,
        1e-8,
    )])
}

fn periodization() -> Result<Vec<Check>> {
    let t = BiorthoTable::new(2)?;
    let (mut ea, mut eb): (f64, f64) = (0.0, 0.0);
    for x in [0.0, 0.3] {
        for n in 0..=2i64 {
            let fa = if n == 0 {
                CoefficientFunction::A0
            } else {
                CoefficientFunction::A(n)
            };
            let want = 0.5 * C64::new(0.0, -PI * n as f64 * x).exp();
            let (sa, _) = t.periodization_sum(fa, x, 10_000)?;
            ea = ea.max((sa - want).norm());
            if n > 0 {
                let (sb, _) = t.periodization_sum(CoefficientFunction::B(n), x, 10_000)?;
                eb = eb.max(sb.norm());
            }
        }
    }
    Ok(vec![
        Check::new("max |sum A_n - exp/2|", ea, 1e-3),
        Check::new("max |sum B_n|", eb, 1e-3),
    ])
}

fn heights() -> Result<Vec<Check>> {
    let n2 = flycatcher_height(HPoint::from_parts(0.0, 2.0)?)?.n as f64;
    let nh = flycatcher_height(HPoint::from_parts(0.0, 0.5)?)?.n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let y = 10f64.powf(rng.gen_range(-3.0..1.0));
        let tau = HPoint::from_parts(rng.gen_range(-1.0..1.0), y)?;
        let n = flycatcher_height(tau)?.n as f64;
        excess = excess.max(n - (0.5 + 0.5 / y));
    }
    let mut out = vec![
        Check::new("|n*(2i) - 0|", n2.abs(), 0.0),
        Check::new("|n*(i/2) - 1|", (nh - 1.0).abs(), 0.0),
        Check::new("max n* - (1/2 + 1/(2y))", excess.max(0.0), 0.0),
    ];
    for y in [1e-2, 1e-3, 1e-4] {
        let mean = average_height(y, 4096)?;
        let dev = (mean - average_height_leading(y)).abs();
        out.push(Check::new(
            format!("mean height deviation at y={y:e}"),
            dev,
            3.0 * (1.0 / y).ln(),
        ));
    }
    Ok(out)
}

fn expansion_consistency() -> Result<Vec<Check>> {
    let x = 0.7;
    let f = BoundaryFunction::Cauchy(x);
    let exp = expand_boundary(&f, 10)?;
    let t = BiorthoTable::new(10)?;
    let (mut ea, mut eb): (f64, f64) = (0.0, 0.0);
    for n in 1..=10i64 {
        ea = ea.max((exp.coeffs.a(n) - t.an_eval(n, x)?).norm());
        eb = eb.max((exp.coeffs.b(n) - t.bn_eval(n, x)?).norm());
    }
    let fast = fast_path_check(&t, &f, &exp, 10, f64::INFINITY)?;
    Ok(vec![
        Check::new("max |a_n - A_n(x)|", ea, 1e-6),
        Check::new("max |b_n - B_n(x)|", eb, 1e-6),
        Check::new("max |fast - slow a_n|", fast, 1e-7),
    ])
}

fn klein_gordon_interpolation() -> Result<Vec<Check>> {
    let t = Arc::new(BiorthoTable::new(8)?);
    let one = C64::new(1.0, 0.0);
    let u = kg_interpolate(t, &BTreeMap::from([(2, one)]), &BTreeMap::from([(3, one)]))?;
    let targets = [
        (Axis::X, 2, 1.0),
        (Axis::X, 1, 0.0),
        (Axis::Y, 3, 1.0),
        (Axis::Y, 1, 0.0),
    ];
    let (mut fast, mut direct): (f64, f64) = (0.0, 0.0);
    for (axis, m, want) in targets {
        fast = fast.max((u.lattice_value(axis, m)? - want).norm());
        let (x, y) = match axis {
            Axis::X => (PI * m as f64, 0.0),
            Axis::Y => (0.0, PI * m as f64),
        };
        direct = direct.max((kg_eval(&u, x, y, 100.0)?.value - want).norm());
    }
    Ok(vec![
        Check::new("fast-path lattice error", fast, 1e-7),
        Check::new("direct quadrature lattice error", direct, 1e-3),
    ])
}

fn transfer_operators() -> Result<Vec<Check>> {
    let one = GridFunction::from_fn(256, |_| C64::new(1.0, 0.0))?;
    let near_one = transfer_apply(TransferKind::Omega(0.0), &one, 1.0 - 1e-9, 100)?.value;
    let f = GridFunction::from_fn(256, |t| C64::new(1.0 - t * t, 0.0))?;
    let gl: GaussLegendre = GaussLegendre::new(48);
    let mut integral = C64::new(0.0, 0.0);
    for (t, w) in gl.on(-1.0, 1.0) {
        integral += w * transfer_apply(TransferKind::Omega(0.0), &f, t, 200)?.value;
    }
    Ok(vec![
        Check::new(
            "|int T_0[1-t^2] - 4/3|",
            (integral - 4.0 / 3.0).norm(),
            1e-6,
        ),
        Check::new(
            "|T_0[1](1-) - (pi^2/4 - 1)|",
            (near_one - (PI * PI / 4.0 - 1.0)).norm(),
            1e-6,
        ),
    ])
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: i64) -> Result<HfsCoefficients> {
    let z = |rng: &mut ChaCha8Rng| -> Complex<Dd> {
        from_c64(C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    };
    let mut c = HfsCoefficients::zero(Sided::One);
    c.set_a0(z(rng));
    for k in 1..=n {
        c.set_a(k, z(rng))?;
        c.set_b(k, z(rng))?;
    }
    Ok(c)
}

fn max_diff(a: &HfsCoefficients, b: &HfsCoefficients) -> f64 {
    let mut d = (a.a0() - b.a0()).norm();
    for k in a.a_map().keys().chain(b.a_map().keys()) {
        d = d.max((a.a(*k) - b.a(*k)).norm());
    }
    for k in a.b_map().keys().chain(b.b_map().keys()) {
        d = d.max((a.b(*k) - b.b(*k)).norm());
    }
    d
}

fn skew_conversions() -> Result<Vec<Check>> {
    let tables: ModularTables<Dd> = ModularTables::build(64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let c = random_coeffs(&mut rng, 50)?;
    let fwd = pskew_convert(&c, 1.5, Direction::ToSkewed, &tables)?;
    let p = max_diff(&c, &pskew_convert(&fwd, 1.5, Direction::ToPlain, &tables)?);
    let fwd = expskew_convert(&c, 0.3, -0.4, Direction::ToSkewed, &tables)?;
    let e = max_diff(
        &c,
        &expskew_convert(&fwd, 0.3, -0.4, Direction::ToPlain, &tables)?,
    );
    let a0 = C64::new(0.7, -0.2);
    let sk = expskew_convert(
        &HfsCoefficients::constant(a0),
        0.3,
        -0.4,
        Direction::ToSkewed,
        &tables,
    )?;
    let rule = (sk.a0() - a0 * 16f64.powf(0.3)).norm();
    Ok(vec![
        Check::new("power skew round trip", p, 1e-9),
        Check::new("exponential skew round trip", e, 1e-9),
        Check::new("|a0 - 16^w1 a0~|", rule, 1e-12),
    ])
}
