//! Hyperbolic Fourier series as data: coefficient objects, evaluation in the
//! upper half-plane, the Schwarz transform, exceptional null series, skew
//! conversions and growth-envelope checks.
//!
//! A one-sided series is
//! `a0 + Σ_{n>0} (a_n e^{iπnτ} + b_n e^{−iπn/τ})`; a two-sided series adds
//! the terms with `n < 0`, evaluated with conjugated exponentials
//! `e^{iπnτ̄}` and `e^{−iπn/τ̄}`.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{HfError, Result};
use crate::modular::ModularTables;
use crate::qseries::NomeSeries;
use crate::real::{from_c64, to_c64, Cdd, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sided {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Skew {
    #[default]
    None,
    Power {
        beta: f64,
    },
    Exponential {
        omega1: f64,
        omega2: f64,
    },
}

/// Declared growth class of the coefficients; metadata only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Growth {
    Polynomial {
        k: u32,
    },
    #[default]
    Subexponential,
    Envelope {
        beta: f64,
    },
}

#[derive(Serialize, Deserialize)]
struct RawCoefficients {
    a0: [f64; 2],
    #[serde(default)]
    a: BTreeMap<i64, [f64; 2]>,
    #[serde(default)]
    b: BTreeMap<i64, [f64; 2]>,
    #[serde(default = "default_sided")]
    sided: Sided,
    #[serde(default)]
    skew: Skew,
    #[serde(default)]
    growth: Growth,
}

fn default_sided() -> Sided {
    Sided::One
}

fn pair(z: Cdd) -> [f64; 2] {
    [z.re.to_f64(), z.im.to_f64()]
}

fn unpair(p: [f64; 2]) -> Cdd {
    from_c64(C64::new(p[0], p[1]))
}

fn cdd_zero() -> Cdd {
    Complex::new(Dd::ZERO, Dd::ZERO)
}

fn is_zero(z: &Cdd) -> bool {
    z.re == Dd::ZERO && z.im == Dd::ZERO
}

/// Finitely supported coefficients `a0`, `a_n`, `b_n` stored in
/// double-double precision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoefficients", into = "RawCoefficients")]
pub struct HfsCoefficients {
    a0: Cdd,
    a: BTreeMap<i64, Cdd>,
    b: BTreeMap<i64, Cdd>,
    sided: Sided,
    skew: Skew,
    growth: Growth,
}

impl TryFrom<RawCoefficients> for HfsCoefficients {
    type Error = HfError;

    fn try_from(r: RawCoefficients) -> Result<Self> {
        let mut c = HfsCoefficients::zero(r.sided);
        c.a0 = unpair(r.a0);
        c.skew = r.skew;
        c.growth = r.growth;
        for (n, v) in r.a {
            c.set_a(n, unpair(v))?;
        }
        for (n, v) in r.b {
            c.set_b(n, unpair(v))?;
        }
        c.validate()?;
        Ok(c)
    }
}

impl From<HfsCoefficients> for RawCoefficients {
    fn from(c: HfsCoefficients) -> Self {
        RawCoefficients {
            a0: pair(c.a0),
            a: c.a.iter().map(|(&n, &v)| (n, pair(v))).collect(),
            b: c.b.iter().map(|(&n, &v)| (n, pair(v))).collect(),
            sided: c.sided,
            skew: c.skew,
            growth: c.growth,
        }
    }
}

impl HfsCoefficients {
    pub fn zero(sided: Sided) -> Self {
        HfsCoefficients {
            a0: cdd_zero(),
            a: BTreeMap::new(),
            b: BTreeMap::new(),
            sided,
            skew: Skew::None,
            growth: Growth::default(),
        }
    }

    pub fn constant(a0: C64) -> Self {
        let mut c = Self::zero(Sided::One);
        c.a0 = from_c64(a0);
        c
    }

    fn check_index(&self, n: i64) -> Result<()> {
        if n == 0 {
            return Err(HfError::InvalidInput(
                "index 0 belongs to a0; a_0 and b_0 are not separate coefficients".into(),
            ));
        }
        if n < 0 && self.sided == Sided::One {
            return Err(HfError::InvalidInput(format!(
                "negative index {n} in a one-sided series"
            )));
        }
        Ok(())
    }

    pub fn set_a0(&mut self, v: Cdd) {
        self.a0 = v;
    }

    /// Sets `a_n`; an exact zero removes the entry.
    pub fn set_a(&mut self, n: i64, v: Cdd) -> Result<()> {
        self.check_index(n)?;
        if is_zero(&v) {
            self.a.remove(&n);
        } else {
            self.a.insert(n, v);
        }
        Ok(())
    }

    /// Sets `b_n`; an exact zero removes the entry.
    pub fn set_b(&mut self, n: i64, v: Cdd) -> Result<()> {
        self.check_index(n)?;
        if is_zero(&v) {
            self.b.remove(&n);
        } else {
            self.b.insert(n, v);
        }
        Ok(())
    }

    pub fn with_a(mut self, n: i64, v: C64) -> Result<Self> {
        self.set_a(n, from_c64(v))?;
        Ok(self)
    }

    pub fn with_b(mut self, n: i64, v: C64) -> Result<Self> {
        self.set_b(n, from_c64(v))?;
        Ok(self)
    }

    pub fn with_skew(mut self, skew: Skew) -> Result<Self> {
        self.skew = skew;
        self.validate()?;
        Ok(self)
    }

    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = growth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.skew != Skew::None && self.sided == Sided::Two {
            return Err(HfError::InvalidInput(
                "skewed series must be one-sided".into(),
            ));
        }
        let finite = |z: &Cdd| z.re.to_f64().is_finite() && z.im.to_f64().is_finite();
        if !finite(&self.a0) || !self.a.values().chain(self.b.values()).all(finite) {
            return Err(HfError::InvalidInput("non-finite coefficient".into()));
        }
        for &n in self.a.keys().chain(self.b.keys()) {
            self.check_index(n)?;
        }
        Ok(())
    }

    pub fn a0(&self) -> C64 {
        to_c64(self.a0)
    }

    pub fn a(&self, n: i64) -> C64 {
        self.a.get(&n).map_or(C64::new(0.0, 0.0), |&v| to_c64(v))
    }

    pub fn b(&self, n: i64) -> C64 {
        self.b.get(&n).map_or(C64::new(0.0, 0.0), |&v| to_c64(v))
    }

    pub fn a0_dd(&self) -> Cdd {
        self.a0
    }

    pub fn a_dd(&self, n: i64) -> Cdd {
        self.a.get(&n).copied().unwrap_or_else(cdd_zero)
    }

    pub fn b_dd(&self, n: i64) -> Cdd {
        self.b.get(&n).copied().unwrap_or_else(cdd_zero)
    }

    pub fn a_map(&self) -> &BTreeMap<i64, Cdd> {
        &self.a
    }

    pub fn b_map(&self) -> &BTreeMap<i64, Cdd> {
        &self.b
    }

    pub fn sided(&self) -> Sided {
        self.sided
    }

    pub fn skew(&self) -> Skew {
        self.skew
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    /// Largest `|n|` carrying a coefficient.
    pub fn support(&self) -> usize {
        self.a
            .keys()
            .chain(self.b.keys())
            .map(|n| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Sum of the series at `τ ∈ H`.
    pub fn eval(&self, tau: C64) -> Result<C64> {
        hfs_eval(self, tau)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }

    /// Coefficientwise conjugate with `n ↦ −n`; the evaluation of the result
    /// is the conjugate of the original evaluation.
    pub fn conj_flip(&self) -> Result<Self> {
        if self.sided != Sided::Two {
            return Err(HfError::InvalidInput(
                "conj_flip needs a two-sided series".into(),
            ));
        }
        let mut out = Self::zero(Sided::Two);
        out.a0 = self.a0.conj();
        for (&n, v) in &self.a {
            out.a.insert(-n, v.conj());
        }
        for (&n, v) in &self.b {
            out.b.insert(-n, v.conj());
        }
        Ok(out)
    }
}

fn e_ipi(z: C64) -> C64 {
    (C64::i() * std::f64::consts::PI * z).exp()
}

/// Evaluates the finite series at `τ` with `Im τ > 0`.
pub fn hfs_eval(c: &HfsCoefficients, tau: C64) -> Result<C64> {
    if !(tau.im > 0.0) || !tau.re.is_finite() || !tau.im.is_finite() {
        return Err(HfError::DomainError(format!(
            "{tau} is not in the upper half-plane"
        )));
    }
    let inv = -1.0 / tau;
    let mut sum = C64::new(0.0, 0.0);
    match c.skew {
        Skew::None => {
            sum += c.a0();
            for (&n, &v) in &c.a {
                let z = if n > 0 { tau } else { tau.conj() };
                sum += to_c64(v) * e_ipi(n as f64 * z);
            }
            for (&n, &v) in &c.b {
                let z = if n > 0 { inv } else { inv.conj() };
                sum += to_c64(v) * e_ipi(n as f64 * z);
            }
        }
        Skew::Power { beta } => {
            sum += c.a0();
            let factor = (tau / C64::i()).powc(C64::new(-beta, 0.0));
            for (&n, &v) in &c.a {
                sum += to_c64(v) * e_ipi(n as f64 * tau);
            }
            for (&n, &v) in &c.b {
                sum += to_c64(v) * factor * e_ipi(n as f64 * inv);
            }
        }
        Skew::Exponential { omega1, omega2 } => {
            sum += c.a0() * e_ipi(omega1 * tau);
            for (&n, &v) in &c.a {
                sum += to_c64(v) * e_ipi((n as f64 + omega1) * tau);
            }
            for (&n, &v) in &c.b {
                sum += to_c64(v) * e_ipi((n as f64 + omega2) * inv);
            }
        }
    }
    Ok(sum)
}

/// Truncated coefficient vector `v[0..=n]` of a nome series with
/// nonnegative orders.
fn series_vec(s: &NomeSeries<Dd>, n: usize) -> Vec<Cdd> {
    (0..=n as i64)
        .map(|k| s.coeff(k).unwrap_or_else(cdd_zero))
        .collect()
}

fn conv(x: &[Cdd], y: &[Cdd]) -> Vec<Cdd> {
    let n = x.len().min(y.len());
    let mut out = vec![cdd_zero(); n];
    for (i, a) in x.iter().take(n).enumerate() {
        if is_zero(a) {
            continue;
        }
        for (j, b) in y.iter().take(n - i).enumerate() {
            out[i + j] += *a * *b;
        }
    }
    out
}

/// `P(x)` for a truncated power series `x`, by Horner's scheme.
fn poly_of_series(p: &[Cdd], x: &[Cdd]) -> Vec<Cdd> {
    let mut acc = vec![cdd_zero(); x.len()];
    for &pk in p.iter().rev() {
        acc = conv(&acc, x);
        acc[0] += pk;
    }
    acc
}

fn poly_at_one(p: &[Cdd]) -> Cdd {
    p.iter().fold(cdd_zero(), |s, &v| s + v)
}

fn check_polynomial(p: &[C64], n: usize, tables: &ModularTables<Dd>) -> Result<Vec<Cdd>> {
    if let Some(p0) = p.first() {
        if *p0 != C64::new(0.0, 0.0) {
            return Err(HfError::InvalidInput(format!("P(0) = {p0} must vanish")));
        }
    }
    let deg = p
        .iter()
        .rposition(|z| *z != C64::new(0.0, 0.0))
        .unwrap_or(0);
    if 4 * deg > n {
        return Err(HfError::InvalidInput(format!(
            "degree {deg} is too large for truncation N = {n}; need deg ≤ N/4"
        )));
    }
    if tables.truncation_order < n {
        return Err(HfError::InvalidSeries(format!(
            "table order {} is below the requested support {n}",
            tables.truncation_order
        )));
    }
    Ok(p.iter().take(deg + 1).map(|&z| from_c64(z)).collect())
}

/// `(P(λ)[1..=n], P(1) − P(1 − λ)[1..=n], P(1))` as coefficient vectors.
fn exceptional_parts(p: &[Cdd], n: usize, tables: &ModularTables<Dd>) -> (Vec<Cdd>, Vec<Cdd>, Cdd) {
    let lam = series_vec(&tables.lambda, n);
    let one_minus = series_vec(&tables.one_minus_lambda, n);
    let a = poly_of_series(p, &lam);
    let p1 = poly_at_one(p);
    let b: Vec<Cdd> = poly_of_series(p, &one_minus).iter().map(|&v| -v).collect();
    (a, b, p1)
}

/// One-sided exceptional series of the polynomial `P` (coefficients
/// `p[k]` of `w^k`, with `p[0] = 0`) truncated at `n`. The series sums to
/// zero on `H` up to the truncation error bounded by
/// [`exceptional_tail_bound`].
pub fn exceptional_series(
    p: &[C64],
    n: usize,
    tables: &ModularTables<Dd>,
) -> Result<HfsCoefficients> {
    let p = check_polynomial(p, n, tables)?;
    let mut c = HfsCoefficients::zero(Sided::One);
    if p.iter().all(is_zero) {
        return Ok(c);
    }
    let (a, b, p1) = exceptional_parts(&p, n, tables);
    c.a0 = -p1;
    for k in 1..=n {
        c.set_a(k as i64, a[k])?;
        c.set_b(k as i64, b[k])?;
    }
    Ok(c)
}

/// Two-sided exceptional series built from `P` on the positive side and
/// `Q` on the negative side. Returns the series and the parameter
/// `c0 = −Q(1)` that splits `a0` between the two one-sided halves.
pub fn exceptional_series_two_sided(
    p: &[C64],
    q: &[C64],
    n: usize,
    tables: &ModularTables<Dd>,
) -> Result<(HfsCoefficients, C64)> {
    let p = check_polynomial(p, n, tables)?;
    let q = check_polynomial(q, n, tables)?;
    let (pa, pb, p1) = exceptional_parts(&p, n, tables);
    let (qa, qb, q1) = exceptional_parts(&q, n, tables);
    let mut c = HfsCoefficients::zero(Sided::Two);
    let c0 = -q1;
    c.a0 = -p1 + c0;
    for k in 1..=n {
        let k_i = k as i64;
        c.set_a(k_i, pa[k])?;
        c.set_b(k_i, pb[k])?;
        c.set_a(-k_i, qa[k])?;
        c.set_b(-k_i, qb[k])?;
    }
    Ok((c, to_c64(c0)))
}

/// Majorant for the omitted terms `n > N` of an exceptional series at `τ`,
/// using `|coefficient of q^m in λ^k| ≤ (1/16) m^{−3/4} e^{2π√(km)}`.
pub fn exceptional_tail_bound(p: &[C64], n: usize, tau: C64) -> f64 {
    let pi = std::f64::consts::PI;
    let ys = [tau.im, (-1.0 / tau).im];
    let mut total = 0.0;
    for (k, pk) in p.iter().enumerate().skip(1) {
        let mag = pk.norm();
        if mag == 0.0 {
            continue;
        }
        for &y in &ys {
            if y <= 0.0 {
                return f64::INFINITY;
            }
            let mut m = n + 1;
            let mut acc = 0.0;
            loop {
                let mf = m as f64;
                let log_term = mag.ln() - 16f64.ln() - 0.75 * mf.ln()
                    + 2.0 * pi * (k as f64 * mf).sqrt()
                    - pi * mf * y;
                let term = log_term.exp();
                acc += term;
                // the terms decrease once π y exceeds the derivative of 2π√(km)
                let decreasing = pi * y > pi * (k as f64 / mf).sqrt();
                if decreasing && term <= 1e-17 * acc.max(f64::MIN_POSITIVE) {
                    break;
                }
                if m > n + 10_000_000 {
                    return f64::INFINITY;
                }
                m += 1;
            }
            total += acc;
        }
    }
    total
}

/// Holomorphic series agreeing with the two-sided series on the unit
/// semicircle.
pub fn schwarz_transform(c: &HfsCoefficients) -> Result<HfsCoefficients> {
    if c.skew != Skew::None {
        return Err(HfError::InvalidInput(
            "the Schwarz transform needs an unskewed series".into(),
        ));
    }
    let mut out = HfsCoefficients::zero(Sided::One);
    out.a0 = c.a0;
    out.growth = c.growth;
    let mut add = |is_a: bool, m: i64, v: Cdd| -> Result<()> {
        let cur = if is_a { out.a_dd(m) } else { out.b_dd(m) };
        if is_a {
            out.set_a(m, cur + v)
        } else {
            out.set_b(m, cur + v)
        }
    };
    for (&n, &v) in &c.a {
        if n > 0 {
            add(true, n, v)?;
        } else {
            add(false, -n, v)?;
        }
    }
    for (&n, &v) in &c.b {
        if n > 0 {
            add(false, n, v)?;
        } else {
            add(true, -n, v)?;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    ToSkewed,
    ToPlain,
}

fn multiply_parts(
    c: &HfsCoefficients,
    m1: &NomeSeries<Dd>,
    m2: &NomeSeries<Dd>,
    n: usize,
    skew: Skew,
) -> Result<HfsCoefficients> {
    let mut av = vec![cdd_zero(); n + 1];
    let mut bv = vec![cdd_zero(); n + 1];
    av[0] = c.a0;
    for (&k, &v) in &c.a {
        av[k as usize] = v;
    }
    for (&k, &v) in &c.b {
        bv[k as usize] = v;
    }
    let a = conv(&av, &series_vec(m1, n));
    let b = conv(&bv, &series_vec(m2, n));
    let mut out = HfsCoefficients::zero(Sided::One);
    out.growth = c.growth;
    out.a0 = a[0];
    for k in 1..=n {
        out.set_a(k as i64, a[k])?;
        out.set_b(k as i64, b[k])?;
    }
    out.skew = skew;
    Ok(out)
}

fn conversion_support(c: &HfsCoefficients, tables: &ModularTables<Dd>) -> Result<usize> {
    if c.sided != Sided::One {
        return Err(HfError::InvalidInput(
            "skew conversion needs a one-sided series".into(),
        ));
    }
    let n = c.support().max(1);
    if tables.truncation_order < n {
        return Err(HfError::InvalidSeries(format!(
            "table order {} is below the coefficient support {n}",
            tables.truncation_order
        )));
    }
    Ok(n)
}

/// Converts between a plain series and a power-skewed series with
/// parameter `β` by multiplying both coefficient sequences by `θ00^{±2β}`.
pub fn pskew_convert(
    c: &HfsCoefficients,
    beta: f64,
    direction: Direction,
    tables: &ModularTables<Dd>,
) -> Result<HfsCoefficients> {
    let n = conversion_support(c, tables)?;
    let (expected, sign, skew) = match direction {
        Direction::ToSkewed => (Skew::None, 1.0, Skew::Power { beta }),
        Direction::ToPlain => (Skew::Power { beta }, -1.0, Skew::None),
    };
    if c.skew != expected {
        return Err(HfError::InvalidInput(format!(
            "expected skew {expected:?}, found {:?}",
            c.skew
        )));
    }
    let m = tables.theta_pow_series(sign * beta)?;
    multiply_parts(c, &m, &m, n, skew)
}

/// Converts between a plain series and an exponentially skewed series with
/// parameters `(ω1, ω2)`.
pub fn expskew_convert(
    c: &HfsCoefficients,
    omega1: f64,
    omega2: f64,
    direction: Direction,
    tables: &ModularTables<Dd>,
) -> Result<HfsCoefficients> {
    let n = conversion_support(c, tables)?;
    let target = Skew::Exponential { omega1, omega2 };
    let (expected, sign, skew) = match direction {
        Direction::ToSkewed => (Skew::None, 1.0, target),
        Direction::ToPlain => (target, -1.0, Skew::None),
    };
    if c.skew != expected {
        return Err(HfError::InvalidInput(format!(
            "expected skew {expected:?}, found {:?}",
            c.skew
        )));
    }
    let (lead1, om1) = tables.lambda_pow_series(sign * omega1)?;
    let (lead2, om2) = tables.lambda_pow_series(sign * omega2)?;
    let m1 = lead1.mul(&om2);
    let m2 = lead2.mul(&om1);
    multiply_parts(c, &m1, &m2, n, skew)
}

#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub beta: f64,
    /// Constant `C` fitted at the largest grid value of `y`.
    pub constant: f64,
    /// `(y, |f(iy)| / (C e^{πβ/y}))` for each grid point.
    pub ratios: Vec<(f64, f64)>,
    pub max_ratio: f64,
}

/// Compares `|Σ_{n>0} a_n e^{−πny}|` with the envelope `C e^{πβ/y}`.
pub fn growth_envelope_check(
    c: &HfsCoefficients,
    beta: f64,
    y_grid: &[f64],
) -> Result<GrowthReport> {
    if c.sided != Sided::One {
        return Err(HfError::InvalidInput(
            "growth check needs a one-sided series".into(),
        ));
    }
    if y_grid.is_empty() || y_grid.iter().any(|&y| !(y > 0.0)) {
        return Err(HfError::InvalidInput(
            "y grid must be nonempty and positive".into(),
        ));
    }
    let pi = std::f64::consts::PI;
    let f = |y: f64| -> f64 {
        c.a.iter()
            .map(|(&n, &v)| to_c64(v) * (-pi * n as f64 * y).exp())
            .sum::<C64>()
            .norm()
    };
    let y_max = y_grid.iter().cloned().fold(f64::MIN, f64::max);
    let constant = (f(y_max) * (-pi * beta / y_max).exp()).max(f64::MIN_POSITIVE);
    let ratios: Vec<(f64, f64)> = y_grid
        .iter()
        .map(|&y| (y, f(y) / (constant * (pi * beta / y).exp())))
        .collect();
    let max_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(GrowthReport {
        beta,
        constant,
        ratios,
        max_ratio,
    })
}

/// Splits an unskewed series into `h_+ + h_- + k` with `h_±(i) = 0`.
pub fn split_harmonic(c: &HfsCoefficients) -> Result<(HfsCoefficients, HfsCoefficients, C64)> {
    if c.skew != Skew::None {
        return Err(HfError::InvalidInput(
            "split_harmonic needs an unskewed series".into(),
        ));
    }
    let mut holo = HfsCoefficients::zero(Sided::One);
    let mut anti = HfsCoefficients::zero(Sided::Two);
    for (&n, &v) in &c.a {
        if n > 0 {
            holo.set_a(n, v)?;
        } else {
            anti.set_a(n, v)?;
        }
    }
    for (&n, &v) in &c.b {
        if n > 0 {
            holo.set_b(n, v)?;
        } else {
            anti.set_b(n, v)?;
        }
    }
    let i = C64::new(0.0, 1.0);
    let hi = holo.eval(i)?;
    let ai = anti.eval(i)?;
    holo.a0 = from_c64(-hi);
    anti.a0 = from_c64(-ai);
    Ok((holo, anti, c.a0() + hi + ai))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_coeffs(rng: &mut ChaCha8Rng, sided: Sided, n: i64) -> HfsCoefficients {
        let mut c = HfsCoefficients::zero(sided);
        c.set_a0(from_c64(C64::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )));
        let lo = if sided == Sided::Two { -n } else { 1 };
        for k in lo..=n {
            if k == 0 {
                continue;
            }
            let z = |rng: &mut ChaCha8Rng| {
                from_c64(C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            };
            c.set_a(k, z(rng)).unwrap();
            c.set_b(k, z(rng)).unwrap();
        }
        c
    }

    #[test]
    fn basic_evaluations() {
        let c = HfsCoefficients::constant(C64::new(5.0, 0.0));
        assert_eq!(c.eval(C64::new(0.3, 0.7)).unwrap(), C64::new(5.0, 0.0));
        let c = HfsCoefficients::zero(Sided::One)
            .with_a(1, C64::new(1.0, 0.0))
            .unwrap();
        let v = c.eval(C64::new(0.0, 1.0)).unwrap();
        assert!((v - C64::new((-std::f64::consts::PI).exp(), 0.0)).norm() < 1e-16);
        assert!(matches!(
            c.eval(C64::new(0.0, -1.0)),
            Err(HfError::DomainError(_))
        ));
        assert!(HfsCoefficients::zero(Sided::One)
            .with_b(0, C64::new(1.0, 0.0))
            .is_err());
    }

    #[test]
    fn json_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = random_coeffs(&mut rng, Sided::Two, 4);
        let s = c.to_json_string().unwrap();
        let d = HfsCoefficients::from_json_str(&s).unwrap();
        assert_eq!(to_c64(c.a_dd(-3)), to_c64(d.a_dd(-3)));
        let tau = C64::new(0.1, 0.9);
        assert!((c.eval(tau).unwrap() - d.eval(tau).unwrap()).norm() < 1e-15);
        let j = r#"{"a0":[1,0],"a":{"2":[0.5,0]},"skew":{"type":"power","beta":0.5}}"#;
        let e = HfsCoefficients::from_json_str(j).unwrap();
        assert_eq!(e.skew(), Skew::Power { beta: 0.5 });
        assert_eq!(e.a(2), C64::new(0.5, 0.0));
        let bad = r#"{"a0":[0,0],"b":{"0":[1,0]}}"#;
        assert!(HfsCoefficients::from_json_str(bad).is_err());
    }

    #[test]
    fn linearity_and_reality() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let c = random_coeffs(&mut rng, Sided::Two, 5);
            let d = random_coeffs(&mut rng, Sided::Two, 5);
            let mut s = c.clone();
            s.a0 = c.a0 + d.a0;
            for k in -5i64..=5 {
                if k != 0 {
                    s.set_a(k, c.a_dd(k) + d.a_dd(k)).unwrap();
                    s.set_b(k, c.b_dd(k) + d.b_dd(k)).unwrap();
                }
            }
            let tau = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..2.0));
            let lhs = s.eval(tau).unwrap();
            let rhs = c.eval(tau).unwrap() + d.eval(tau).unwrap();
            assert!((lhs - rhs).norm() < 1e-13);
            let flipped = c.conj_flip().unwrap().eval(tau).unwrap();
            assert!((c.eval(tau).unwrap() - flipped.conj()).norm() < 1e-13);
        }
    }

    #[test]
    fn exceptional_series_vanish() {
        let tables: ModularTables<Dd> = ModularTables::build(300).unwrap();
        let lin =
            exceptional_series(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)], 200, &tables).unwrap();
        assert_eq!(lin.a0(), C64::new(-1.0, 0.0));
        for n in 1..=200i64 {
            let l = to_c64(tables.lambda.coeff(n).unwrap());
            assert!((lin.a(n) - l).norm() <= 1e-12 * l.norm());
            assert!((lin.b(n) - l).norm() <= 1e-12 * l.norm());
        }
        assert!(lin.eval(C64::new(0.0, 1.0)).unwrap().norm() < 1e-8);

        let zero = exceptional_series(&[], 50, &tables).unwrap();
        assert_eq!(zero, HfsCoefficients::zero(Sided::One));

        let sq = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let c = exceptional_series(&sq, 300, &tables).unwrap();
        assert!(c.eval(C64::new(0.2, 1.1)).unwrap().norm() < 1e-6);
        assert!(exceptional_tail_bound(&sq, 300, C64::new(0.2, 1.1)) < 1e-6);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let tau = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.8..2.0));
            assert!(c.eval(tau).unwrap().norm() < 1e-6, "{tau}");
        }
        assert!(matches!(
            exceptional_series(&[C64::new(1.0, 0.0)], 10, &tables),
            Err(HfError::InvalidInput(_))
        ));
    }

    #[test]
    fn two_sided_exceptional_vanishes() {
        let tables: ModularTables<Dd> = ModularTables::build(120).unwrap();
        let p = [C64::new(0.0, 0.0), C64::new(1.0, 0.5), C64::new(-0.25, 0.0)];
        let q = [C64::new(0.0, 0.0), C64::new(0.0, 2.0)];
        let (c, c0) = exceptional_series_two_sided(&p, &q, 120, &tables).unwrap();
        assert!((c0 - C64::new(0.0, -2.0)).norm() < 1e-15);
        for tau in [C64::new(0.0, 1.0), C64::new(0.4, 1.3), C64::new(-0.7, 0.9)] {
            assert!(c.eval(tau).unwrap().norm() < 1e-8, "{tau}");
        }
    }

    #[test]
    fn schwarz_transform_matches_on_semicircle() {
        let c = HfsCoefficients::zero(Sided::Two)
            .with_a(-3, C64::new(2.0, 0.0))
            .unwrap();
        let s = schwarz_transform(&c).unwrap();
        assert_eq!(s.b(3), C64::new(2.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = random_coeffs(&mut rng, Sided::Two, 6);
        let s = schwarz_transform(&c).unwrap();
        assert_eq!(s.a0(), c.a0());
        for theta in [2.0, 0.4, 1.3] {
            let tau = C64::from_polar(1.0, theta);
            assert!((s.eval(tau).unwrap() - c.eval(tau).unwrap()).norm() < 1e-12);
        }
        let skewed = HfsCoefficients::constant(C64::new(1.0, 0.0))
            .with_skew(Skew::Power { beta: 1.0 })
            .unwrap();
        assert!(schwarz_transform(&skewed).is_err());
    }

    fn max_diff(c: &HfsCoefficients, d: &HfsCoefficients) -> f64 {
        let n = c.support().max(d.support()) as i64;
        let mut m = (c.a0() - d.a0()).norm();
        for k in 1..=n {
            m = m
                .max((c.a(k) - d.a(k)).norm())
                .max((c.b(k) - d.b(k)).norm());
        }
        m
    }

    #[test]
    fn power_skew_conversion() {
        let tables: ModularTables<Dd> = ModularTables::build(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_coeffs(&mut rng, Sided::One, 20);
        let same = pskew_convert(&c, 0.0, Direction::ToSkewed, &tables).unwrap();
        assert!(max_diff(&c, &same) == 0.0);

        let fwd = pskew_convert(&c, 1.5, Direction::ToSkewed, &tables).unwrap();
        let back = pskew_convert(&fwd, 1.5, Direction::ToPlain, &tables).unwrap();
        assert!(max_diff(&c, &back) < 1e-10);

        let one = HfsCoefficients::constant(C64::new(1.0, 0.0));
        let sk = pskew_convert(&one, 0.5, Direction::ToSkewed, &tables).unwrap();
        assert_eq!(sk.a0(), C64::new(1.0, 0.0));
        for k in 1..=1i64 {
            assert!((sk.a(k) - to_c64(tables.theta00.coeff(k).unwrap())).norm() < 1e-15);
        }

        // skewed(τ) = θ00(τ)^{2β} · plain(τ)
        let small = random_coeffs(&mut rng, Sided::One, 6);
        let fwd = pskew_convert(&small, 1.5, Direction::ToSkewed, &tables).unwrap();
        let tf: ModularTables = ModularTables::build(64).unwrap();
        for tau in [C64::new(0.0, 1.0), C64::new(0.2, 1.3)] {
            let th = tf.theta00_eval(tau).unwrap();
            let lhs = fwd.eval(tau).unwrap();
            let rhs = th.powf(3.0) * small.eval(tau).unwrap();
            assert!(
                (lhs - rhs).norm() < 1e-6 * rhs.norm().max(1.0),
                "{lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn exponential_skew_conversion() {
        let tables: ModularTables<Dd> = ModularTables::build(64).unwrap();
        let one = HfsCoefficients::constant(C64::new(1.0, 0.0));
        let sk = expskew_convert(&one, 1.0, 0.0, Direction::ToSkewed, &tables).unwrap();
        assert!((sk.a0() - C64::new(16.0, 0.0)).norm() < 1e-13);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = random_coeffs(&mut rng, Sided::One, 20);
        let same = expskew_convert(&c, 0.0, 0.0, Direction::ToSkewed, &tables).unwrap();
        assert!(max_diff(&c, &same) < 1e-15);
        let fwd = expskew_convert(&c, 0.3, -0.4, Direction::ToSkewed, &tables).unwrap();
        let back = expskew_convert(&fwd, 0.3, -0.4, Direction::ToPlain, &tables).unwrap();
        assert!(max_diff(&c, &back) < 1e-9);

        // skewed(τ) = λ^{ω1} (1 − λ)^{ω2} · plain(τ)
        let small = random_coeffs(&mut rng, Sided::One, 6);
        let fwd = expskew_convert(&small, 0.3, -0.4, Direction::ToSkewed, &tables).unwrap();
        let tf: ModularTables = ModularTables::build(64).unwrap();
        for tau in [C64::new(0.0, 1.0), C64::new(0.1, 1.2)] {
            let l = tf.lambda_eval(tau).unwrap();
            let factor = l.powf(0.3) * (1.0 - l).powf(-0.4);
            let lhs = fwd.eval(tau).unwrap();
            let rhs = factor * small.eval(tau).unwrap();
            assert!(
                (lhs - rhs).norm() < 1e-6 * rhs.norm().max(1.0),
                "{lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn growth_envelopes() {
        let grid: Vec<f64> = (0..=19).map(|k| 0.05 + 0.05 * k as f64).collect();
        let mut flat = HfsCoefficients::zero(Sided::One);
        for n in 1..=10 {
            flat.set_a(n, from_c64(C64::new(1.0, 0.0))).unwrap();
        }
        let r = growth_envelope_check(&flat, 0.5, &grid).unwrap();
        assert!(r.max_ratio < 2.0);
        assert!(r.ratios[0].1 < 1e-6);

        let pi = std::f64::consts::PI;
        let mut crit = HfsCoefficients::zero(Sided::One);
        let mut fast = HfsCoefficients::zero(Sided::One);
        for n in 1..=400i64 {
            let nf = n as f64;
            crit.set_a(
                n,
                from_c64(C64::new(nf.powf(-0.75) * (2.0 * pi * nf.sqrt()).exp(), 0.0)),
            )
            .unwrap();
            fast.set_a(
                n,
                from_c64(C64::new(
                    nf.powf(-0.75) * (2.0 * pi * (2.0 * nf).sqrt()).exp(),
                    0.0,
                )),
            )
            .unwrap();
        }
        let rc = growth_envelope_check(&crit, 1.0, &grid).unwrap();
        let rf = growth_envelope_check(&fast, 1.0, &grid).unwrap();
        assert!(rc.max_ratio < 10.0, "{}", rc.max_ratio);
        assert!(rf.max_ratio > 1e15, "{}", rf.max_ratio);
        assert!(rf.ratios.windows(2).all(|w| w[0].1 > w[1].1));
    }

    #[test]
    fn split_recombines() {
        let c = HfsCoefficients::constant(C64::new(2.0, 1.0));
        let (h, a, k) = split_harmonic(&c).unwrap();
        assert_eq!(k, C64::new(2.0, 1.0));
        assert_eq!(h.eval(C64::new(0.0, 2.0)).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(a.eval(C64::new(0.0, 2.0)).unwrap(), C64::new(0.0, 0.0));

        let c = HfsCoefficients::zero(Sided::Two)
            .with_a(1, C64::new(1.0, 0.0))
            .unwrap();
        let (h, _, k) = split_harmonic(&c).unwrap();
        let e = (-std::f64::consts::PI).exp();
        assert!((k - C64::new(e, 0.0)).norm() < 1e-16);
        let tau = C64::new(0.3, 0.8);
        let want = (C64::i() * std::f64::consts::PI * tau).exp() - e;
        assert!((h.eval(tau).unwrap() - want).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = random_coeffs(&mut rng, Sided::Two, 5);
        let (h, a, k) = split_harmonic(&c).unwrap();
        assert!(h.eval(C64::new(0.0, 1.0)).unwrap().norm() < 1e-14);
        assert!(a.eval(C64::new(0.0, 1.0)).unwrap().norm() < 1e-14);
        for _ in 0..20 {
            let tau = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..2.0));
            let sum = h.eval(tau).unwrap() + a.eval(tau).unwrap() + k;
            assert!((sum - c.eval(tau).unwrap()).norm() < 1e-13);
        }
    }
}
