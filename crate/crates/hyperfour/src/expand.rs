//! Boundary data on `T_+` to hyperbolic Fourier coefficients: the Poisson
//! problem in `λ`-coordinates on `Ω_0`, harmonic extension along fly-catcher
//! orbits, harmonic Fourier coefficient extraction and the contour shortcut
//! for the positive coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Deserialize;

use crate::biortho::BiorthoTable;
use crate::dd::Dd;
use crate::error::{HfError, Result};
use crate::halfplane::{flycatcher_height, mod2, HPoint, BOUNDARY_TOL};
use crate::hfs::{hfs_eval, schwarz_transform, HfsCoefficients, Sided};
use crate::modular::{table_order_from_env, ModularTables};
use crate::quad::{adaptive_gk, cubic_interp};
use crate::real::{expipi, from_c64, to_c64, Cdd, C64};

const PI: f64 = std::f64::consts::PI;

/// Default number of trapezoid nodes for coefficient extraction.
pub const DEFAULT_NODES: usize = 2048;
/// Extraction height for boundary data with a holomorphic extension.
pub const DEFAULT_HEIGHT: f64 = 0.1;
/// Second height used for the invariance diagnostic.
pub const CHECK_HEIGHT: f64 = 0.15;
/// Extraction height for sampled data, which is only known on `T_+`.
pub const SAMPLED_HEIGHT: f64 = 1.05;
pub const SAMPLED_CHECK_HEIGHT: f64 = 1.1;

/// The Poisson integral is cut where `|λ(η)|` exceeds this multiple of
/// `max(1, |λ(τ)|)`.
const CUTOFF_FACTOR: f64 = 1e16;
/// Smallest angle probed when locating the cutoff.
const THETA_FLOOR: f64 = 0.02;
const POISSON_ABS_TOL: f64 = 1e-13;
const POISSON_REL_TOL: f64 = 1e-12;
const POISSON_MAX_INTERVALS: usize = 4000;

/// Boundary data sampled on an increasing grid of angles in `(0, π)`.
#[derive(Clone, Debug)]
pub struct SampledBoundary {
    theta: Vec<f64>,
    values: Vec<C64>,
    interp_error: f64,
}

#[derive(Deserialize)]
struct SampleRow {
    theta: f64,
    re: f64,
    im: f64,
}

impl SampledBoundary {
    pub fn new(theta: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if theta.len() != values.len() {
            return Err(HfError::InvalidInput(format!(
                "{} angles but {} values",
                theta.len(),
                values.len()
            )));
        }
        if theta.len() < 8 {
            return Err(HfError::InvalidInput(
                "sampled boundary data needs at least 8 points".into(),
            ));
        }
        if theta.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HfError::InvalidInput(
                "sample angles must be strictly increasing".into(),
            ));
        }
        if !(theta[0] > 0.0) || !(theta[theta.len() - 1] < PI) {
            return Err(HfError::InvalidInput(
                "sample angles must lie in (0, π)".into(),
            ));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(HfError::InvalidInput(
                "sampled values must be finite".into(),
            ));
        }
        // leave-one-out residual, rescaled from the wide stencil
        // `|(x+2)(x+1)(x−1)(x−2)| = 4` to the interpolation stencil maximum 9/16
        let mut interp_error: f64 = 0.0;
        for j in 2..theta.len() - 2 {
            let xs = [theta[j - 2], theta[j - 1], theta[j + 1], theta[j + 2]];
            let ys = [values[j - 2], values[j - 1], values[j + 1], values[j + 2]];
            interp_error = interp_error.max((cubic_interp(&xs, &ys, theta[j]) - values[j]).norm());
        }
        interp_error *= 9.0 / 64.0;
        Ok(SampledBoundary {
            theta,
            values,
            interp_error,
        })
    }

    /// Reads `theta,re,im` rows with a header line.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut theta = Vec::new();
        let mut values = Vec::new();
        for row in rdr.deserialize() {
            let row: SampleRow = row?;
            theta.push(row.theta);
            values.push(C64::new(row.re, row.im));
        }
        Self::new(theta, values)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    pub fn theta_range(&self) -> (f64, f64) {
        (self.theta[0], self.theta[self.theta.len() - 1])
    }

    /// Estimated error of the cubic interpolant.
    pub fn interp_error(&self) -> f64 {
        self.interp_error
    }

    /// Interpolated value; angles outside the sampled range take the value
    /// at the nearest end.
    pub fn value(&self, theta: f64) -> C64 {
        let (lo, hi) = self.theta_range();
        cubic_interp(&self.theta, &self.values, theta.clamp(lo, hi))
    }
}

/// Boundary data on `T_+`, with a holomorphic extension to `H` for every
/// kind except sampled data.
#[derive(Clone)]
pub enum BoundaryFunction {
    /// `f_x(τ) = 1/(2πi(x − τ))`
    Cauchy(f64),
    Constant(C64),
    /// `e^{iπnτ}`
    PureExponential(i64),
    /// `e^{−iπn/τ}`
    InvertedExponential(i64),
    Sampled(SampledBoundary),
    Custom(Arc<dyn Fn(C64) -> C64 + Send + Sync>),
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryFunction::Cauchy(x) => write!(f, "Cauchy({x})"),
            BoundaryFunction::Constant(v) => write!(f, "Constant({v})"),
            BoundaryFunction::PureExponential(n) => write!(f, "PureExponential({n})"),
            BoundaryFunction::InvertedExponential(n) => write!(f, "InvertedExponential({n})"),
            BoundaryFunction::Sampled(s) => write!(f, "Sampled({} points)", s.theta.len()),
            BoundaryFunction::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl BoundaryFunction {
    pub fn custom<F: Fn(C64) -> C64 + Send + Sync + 'static>(f: F) -> Self {
        BoundaryFunction::Custom(Arc::new(f))
    }

    pub fn has_extension(&self) -> bool {
        !matches!(self, BoundaryFunction::Sampled(_))
    }

    /// Value at `τ`; sampled data only accepts points on the unit circle.
    pub fn eval(&self, tau: C64) -> Result<C64> {
        let v = match self {
            BoundaryFunction::Cauchy(x) => {
                let d = C64::new(*x, 0.0) - tau;
                if d.norm() == 0.0 {
                    return Err(HfError::DomainError(format!(
                        "Cauchy kernel evaluated at its pole {x}"
                    )));
                }
                1.0 / (C64::new(0.0, 2.0 * PI) * d)
            }
            BoundaryFunction::Constant(v) => *v,
            BoundaryFunction::PureExponential(n) => expipi(tau * *n as f64),
            BoundaryFunction::InvertedExponential(n) => expipi(-(*n as f64) / tau),
            BoundaryFunction::Sampled(s) => {
                if (tau.norm() - 1.0).abs() > 1e-9 || !(tau.im > 0.0) {
                    return Err(HfError::DomainError(format!(
                        "sampled boundary data has no extension to {tau}"
                    )));
                }
                s.value(tau.arg())
            }
            BoundaryFunction::Custom(f) => f(tau),
        };
        Ok(v)
    }

    /// Value at `e^{iθ}`.
    pub fn on_semicircle(&self, theta: f64) -> Result<C64> {
        match self {
            BoundaryFunction::Sampled(s) => Ok(s.value(theta)),
            _ => self.eval(C64::from_polar(1.0, theta)),
        }
    }

    /// Double-double value where the kind allows it; sampled and custom data
    /// are evaluated in `f64`.
    pub fn eval_dd(&self, tau: Cdd) -> Result<Cdd> {
        let v = match self {
            BoundaryFunction::Cauchy(x) => {
                let d = Complex::new(Dd::from_f64(*x) - tau.re, -tau.im);
                let two_pi = Dd::from_f64(2.0) * Dd::PI;
                // 2πi(x − τ)
                let den = Complex::new(-(two_pi * d.im), two_pi * d.re);
                Complex::new(Dd::ONE, Dd::ZERO) / den
            }
            BoundaryFunction::Constant(v) => from_c64(*v),
            BoundaryFunction::PureExponential(n) => {
                let k = Dd::from_f64(*n as f64);
                expipi(Complex::new(tau.re * k, tau.im * k))
            }
            BoundaryFunction::InvertedExponential(n) => {
                let w = Complex::new(Dd::ONE, Dd::ZERO) / tau;
                let k = -Dd::from_f64(*n as f64);
                expipi(Complex::new(w.re * k, w.im * k))
            }
            _ => from_c64(self.eval(to_c64(tau))?),
        };
        Ok(v)
    }
}

/// The harmonic extension `h` of boundary data `f` on `T_+` that is
/// 2-periodic and satisfies `h + h∘S* = f + f∘S*`.
#[derive(Clone, Debug)]
pub struct HarmonicEvaluator {
    f: BoundaryFunction,
    tables: ModularTables<f64>,
    abs_tol: f64,
}

impl HarmonicEvaluator {
    pub fn new(f: BoundaryFunction) -> Result<Self> {
        Ok(Self::with_tables(
            f,
            ModularTables::build(table_order_from_env())?,
        ))
    }

    /// The quadrature tolerance is loosened to a fraction of the
    /// interpolation error for sampled data.
    pub fn with_tables(f: BoundaryFunction, tables: ModularTables<f64>) -> Self {
        let abs_tol = match &f {
            BoundaryFunction::Sampled(s) => POISSON_ABS_TOL.max(1e-3 * s.interp_error()),
            _ => POISSON_ABS_TOL,
        };
        HarmonicEvaluator { f, tables, abs_tol }
    }

    pub fn boundary(&self) -> &BoundaryFunction {
        &self.f
    }

    pub fn tables(&self) -> &ModularTables<f64> {
        &self.tables
    }

    /// `f_sym(τ) = f(τ) + f(1/τ̄)`.
    pub fn f_sym(&self, tau: C64) -> Result<C64> {
        Ok(self.f.eval(tau)? + self.f.eval(1.0 / tau.conj())?)
    }

    fn lambda_on_circle(&self, theta: f64) -> Result<(C64, C64)> {
        let v = self.tables.lambda_full(C64::from_polar(1.0, theta))?;
        Ok((v.lambda, v.derivative))
    }

    /// The `λ`-pushforward Poisson integral on `Ω_0`.
    pub fn h0(&self, tau: HPoint) -> Result<C64> {
        let z = mod2(tau.value());
        if z.norm() < 1.0 - BOUNDARY_TOL {
            return Err(HfError::DomainError(format!(
                "{} lies inside a disk D(2j, 1)",
                tau
            )));
        }
        let zeta = self.tables.lambda_eval(z)?;
        if !(zeta.re.is_finite() && zeta.im.is_finite()) || zeta.norm() > 1e100 {
            return Err(HfError::DomainError(format!("λ({z}) is out of range")));
        }
        let d = 0.5 - zeta.re;
        if d <= 1e-14 * (1.0 + zeta.norm()) {
            if d < -1e-8 * (1.0 + zeta.norm()) {
                return Err(HfError::DomainError(format!(
                    "{} lies inside a disk D(2j, 1)",
                    tau
                )));
            }
            return self.f.on_semicircle(z.arg());
        }

        let vmax = CUTOFF_FACTOR * zeta.norm().max(1.0);
        let excess = |t: f64| -> Result<f64> { Ok(self.lambda_on_circle(t)?.0.im.abs() - vmax) };
        let theta_lo = if excess(THETA_FLOOR)? > 0.0 {
            bisect(excess, THETA_FLOOR, PI / 2.0)?
        } else {
            THETA_FLOOR
        };
        let theta_hi = PI - theta_lo;
        let offset = |t: f64| -> Result<f64> { Ok(self.lambda_on_circle(t)?.0.im - zeta.im) };
        let peak = bisect(offset, theta_lo, theta_hi)?;

        // h_0 = f(θ*) ∫K + ∫K (f − f(θ*)), where ∫K over the cut range is
        // an arctangent difference
        let f_peak = self.f.on_semicircle(peak)?;
        let v_lo = self.lambda_on_circle(theta_lo)?.0.im;
        let v_hi = self.lambda_on_circle(theta_hi)?.0.im;
        let mass = (((v_hi - zeta.im) / d).atan() - ((v_lo - zeta.im) / d).atan()).abs() / PI;
        let mut failure: Option<HfError> = None;
        let integrand = |t: f64| -> C64 {
            let r = self
                .lambda_on_circle(t)
                .and_then(|(l, lp)| Ok((l, lp, self.f.on_semicircle(t)?)));
            match r {
                Ok((l, lp, fv)) => (fv - f_peak) * (d * lp.norm() / ((zeta - l).norm_sqr() * PI)),
                Err(e) => {
                    failure.get_or_insert(e);
                    C64::new(0.0, 0.0)
                }
            }
        };
        let integral = adaptive_gk(
            integrand,
            theta_lo,
            theta_hi,
            &[peak],
            self.abs_tol,
            POISSON_REL_TOL,
            POISSON_MAX_INTERVALS,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(f_peak * mass + integral?.value)
    }

    /// `h(τ) = Σ_{j<N} (−1)^j f_sym(τ_j) + (−1)^N h_0(τ_N)` along the
    /// fly-catcher orbit `τ_j` of `τ`.
    pub fn eval(&self, tau: HPoint) -> Result<C64> {
        let height = flycatcher_height(tau)?;
        let mut acc = C64::new(0.0, 0.0);
        let mut sign = 1.0;
        for p in &height.orbit[..height.n] {
            acc += self.f_sym(p.value())? * sign;
            sign = -sign;
        }
        Ok(acc + self.h0(height.orbit[height.n])? * sign)
    }
}

/// Root of `g` in `[a, b]` by bisection; `g(a)` and `g(b)` must differ in sign.
fn bisect<G: Fn(f64) -> Result<f64>>(g: G, mut a: f64, mut b: f64) -> Result<f64> {
    let ga = g(a)?;
    let gb = g(b)?;
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if ga.signum() == gb.signum() {
        return Err(HfError::AlgorithmError(format!(
            "no sign change on [{a}, {b}]"
        )));
    }
    let neg_at_a = ga < 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m)?;
        if gm == 0.0 {
            return Ok(m);
        }
        if (gm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// λ-Poisson integral of the evaluator's boundary data at `τ ∈ Ω_0`.
pub fn poisson_lambda_solve(ev: &HarmonicEvaluator, tau: HPoint) -> Result<C64> {
    ev.h0(tau)
}

/// The harmonic extension at any `τ ∈ H`.
pub fn extend_harmonic(ev: &HarmonicEvaluator, tau: HPoint) -> Result<C64> {
    ev.eval(tau)
}

/// Harmonic Fourier coefficients
/// `c_n = e^{π|n|s}/2 ∫_{−1}^{1} e^{−iπnt} h(t + is) dt` by the
/// `m`-point trapezoid rule, all from one set of samples.
pub fn extract_coeffs<H>(h: H, ns: &[i64], s: f64, m: usize) -> Result<Vec<C64>>
where
    H: Fn(HPoint) -> Result<C64> + Sync,
{
    if !(s > 0.0) || m < 2 {
        return Err(HfError::InvalidInput(format!(
            "extraction needs s > 0 and at least 2 nodes, got s = {s}, M = {m}"
        )));
    }
    let step = 2.0 / m as f64;
    let samples = (0..m)
        .into_par_iter()
        .map(|j| h(HPoint::from_parts(-1.0 + j as f64 * step, s)?))
        .collect::<Result<Vec<C64>>>()?;
    Ok(ns
        .iter()
        .map(|&n| {
            let mut acc = C64::new(0.0, 0.0);
            for (j, v) in samples.iter().enumerate() {
                let t = -1.0 + j as f64 * step;
                acc += v * C64::from_polar(1.0, -PI * n as f64 * t);
            }
            acc * (step * 0.5 * (PI * n.abs() as f64 * s).exp())
        })
        .collect())
}

/// A single harmonic Fourier coefficient of the extension.
pub fn extract_coeff(ev: &HarmonicEvaluator, n: i64, s: f64, m: usize) -> Result<C64> {
    Ok(extract_coeffs(|t| ev.eval(t), &[n], s, m)?[0])
}

/// Heights and node count used by [`expand_boundary_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpandOptions {
    pub s: f64,
    pub s_check: f64,
    pub nodes: usize,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        ExpandOptions {
            s: DEFAULT_HEIGHT,
            s_check: CHECK_HEIGHT,
            nodes: DEFAULT_NODES,
        }
    }
}

impl ExpandOptions {
    /// Low extraction heights when `f` extends to `H`, heights above `Ω_0`'s
    /// disks otherwise.
    pub fn for_boundary(f: &BoundaryFunction) -> Self {
        if f.has_extension() {
            Self::default()
        } else {
            ExpandOptions {
                s: SAMPLED_HEIGHT,
                s_check: SAMPLED_CHECK_HEIGHT,
                nodes: DEFAULT_NODES,
            }
        }
    }
}

/// Result of [`expand_boundary`].
#[derive(Clone, Debug)]
pub struct Expansion {
    pub coeffs: HfsCoefficients,
    /// `c_n` for `|n| ≤ N`.
    pub harmonic: BTreeMap<i64, C64>,
    pub options: ExpandOptions,
    /// `max_{|n|≤N} |c_n(s) − c_n(s_check)|`.
    pub invariance: f64,
    /// `max |f(η) − Σ(η)|` over a few points of `T_+`.
    pub boundary_residual: f64,
}

pub fn expand_boundary(f: &BoundaryFunction, n: usize) -> Result<Expansion> {
    let ev = HarmonicEvaluator::new(f.clone())?;
    expand_boundary_with(&ev, n, ExpandOptions::for_boundary(f))
}

pub fn expand_boundary_with(
    ev: &HarmonicEvaluator,
    n: usize,
    opts: ExpandOptions,
) -> Result<Expansion> {
    let n = n as i64;
    let ns: Vec<i64> = (-n..=n).collect();
    let c = extract_coeffs(|t| ev.eval(t), &ns, opts.s, opts.nodes)?;
    let c_check = extract_coeffs(|t| ev.eval(t), &ns, opts.s_check, opts.nodes)?;
    let invariance = c
        .iter()
        .zip(&c_check)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let mut two = HfsCoefficients::zero(Sided::Two);
    let mut harmonic = BTreeMap::new();
    for (&k, &v) in ns.iter().zip(&c) {
        harmonic.insert(k, v);
        if k == 0 {
            two.set_a0(from_c64(v));
        } else {
            two.set_a(k, from_c64(v))?;
        }
    }
    let coeffs = schwarz_transform(&two)?;

    let mut boundary_residual: f64 = 0.0;
    for k in 1..=5 {
        let theta = PI * k as f64 / 6.0;
        let eta = C64::from_polar(1.0, theta);
        let r = ev.boundary().on_semicircle(theta)? - hfs_eval(&coeffs, eta)?;
        boundary_residual = boundary_residual.max(r.norm());
    }
    Ok(Expansion {
        coeffs,
        harmonic,
        options: opts,
        invariance,
        boundary_residual,
    })
}

/// `a_n(f) = (i/(2πn)) ∫_{T_+} λ'(η) λ(η)^{−2} S_n'(1/λ(η)) f(η) dη` on the
/// semicircle path of `table`.
pub fn expand_fast_positive(table: &BiorthoTable, f: &BoundaryFunction, n: usize) -> Result<C64> {
    if n == 0 || n > table.n_max() {
        return Err(HfError::InvalidInput(format!(
            "fast coefficient index {n} outside 1..={}",
            table.n_max()
        )));
    }
    let path = table.path();
    let values = path
        .nodes()
        .par_iter()
        .map(|nd| f.eval_dd(nd.eta))
        .collect::<Result<Vec<Cdd>>>()?;
    let mut acc = Complex::new(Dd::ZERO, Dd::ZERO);
    for (nd, fv) in path.nodes().iter().zip(&values) {
        let inv = Complex::new(Dd::ONE, Dd::ZERO) / nd.lambda;
        acc += nd.d_eta * nd.lambda_prime * inv * inv * nd.ds[n - 1] * *fv;
    }
    let scale = Dd::ONE / (Dd::from_f64(2.0 * n as f64) * Dd::PI);
    // multiply by i/(2πn)
    Ok(to_c64(Complex::new(-(acc.im * scale), acc.re * scale)))
}

/// Compares the fast positive coefficients of `f` with those of its
/// expansion for `n = 1..=n_max`; returns the largest difference or a
/// `ConsistencyError` beyond `tol`.
pub fn fast_path_check(
    table: &BiorthoTable,
    f: &BoundaryFunction,
    exp: &Expansion,
    n_max: usize,
    tol: f64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n in 1..=n_max {
        let fast = expand_fast_positive(table, f, n)?;
        let slow = exp.coeffs.a(n as i64);
        let diff = (fast - slow).norm();
        if diff > tol {
            return Err(HfError::ConsistencyError {
                what: format!("fast and slow a_{n}"),
                a: fast.to_string(),
                b: slow.to_string(),
                diff,
            });
        }
        worst = worst.max(diff);
    }
    Ok(worst)
}
