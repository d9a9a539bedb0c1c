//! The biorthogonal coefficient functions `A_0`, `A_n`, `B_n` as contour
//! integrals over the unit semicircle `T_+`, their pairings with `e_m`,
//! periodization sums and sum-of-four-squares counts.
//!
//! For `n ≥ 1` and real `x`
//! `A_n(x) = (1/4π²n) ∫ S_n(1/λ(η)) (x − η)^{−2} dη` and
//! `B_n(x) = (1/4π²n) ∫ S_n(1/λ(η)) (1 + xη)^{−2} dη`
//! with `η = e^{iθ}` running counterclockwise, while
//! `A_0(x) = (1/2π²) ∫ |λ'|/|λ|² · sin θ/|x − η|² dθ`.
//! Negative indices are conjugates. Quadrature runs in double-double
//! precision; far from the unit circle the kernels are expanded in moments.

use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;

use crate::dd::Dd;
use crate::error::{HfError, Result};
use crate::modular::ModularTables;
use crate::quad::GaussLegendre;
use crate::real::{cabs_f64, cexp, format_f64, to_c64, Cdd, C64};
use crate::snpoly::SnTable;

pub const NODES_PER_PANEL: usize = 32;
/// Bound for the integrands on the excluded end arcs.
pub const CUTOFF_TOL: f64 = 1e-18;
/// Absolute change of the check integrals accepted by panel refinement.
pub const REFINE_TOL: f64 = 1e-11;
const MAX_REFINEMENTS: usize = 6;
const K_POS: usize = 170;

/// Orientation sign of the contour formulas for `A_n` and `B_n`; fixed by
/// the startup check `A_1(0) = 8/π²`.
const ORIENTATION: f64 = 1.0;

fn czero() -> Cdd {
    Complex::new(Dd::ZERO, Dd::ZERO)
}

fn cd(x: f64) -> Cdd {
    Complex::new(Dd::from_f64(x), Dd::ZERO)
}

/// One quadrature node on `T_+` with everything the kernels need.
#[derive(Clone, Debug)]
pub struct PathNode {
    pub theta: Dd,
    pub eta: Cdd,
    /// Quadrature weight for `dη = iη dθ`.
    pub d_eta: Cdd,
    /// Quadrature weight for `dθ`.
    pub d_theta: Dd,
    pub lambda: Cdd,
    pub lambda_prime: Cdd,
    /// `|λ'|/|λ|²`.
    pub rho: Dd,
    /// `S_n(1/λ(η))` for `n = 1..=n_max`.
    pub s: Vec<Cdd>,
    /// `S_n'(1/λ(η))` for `n = 1..=n_max`.
    pub ds: Vec<Cdd>,
}

/// Composite Gauss–Legendre discretization of `θ ∈ [δ, π − δ]`, refined
/// toward both ends.
#[derive(Clone, Debug)]
pub struct SemicirclePath {
    delta: f64,
    kappa: f64,
    panels: Vec<(f64, f64)>,
    nodes: Vec<PathNode>,
}

fn panel_list(delta: f64, kappa: f64) -> Vec<(f64, f64)> {
    let mid = std::f64::consts::FRAC_PI_2;
    let wmax = 0.1 * kappa;
    let mut left = Vec::new();
    let mut a = delta;
    while a < mid {
        let w = (kappa * a * a).min(wmax);
        let mut b = a + w;
        if b > mid || mid - b < 0.25 * w {
            b = mid;
        }
        left.push((a, b));
        a = b;
    }
    let pi = std::f64::consts::PI;
    let mut all = left.clone();
    for &(a, b) in left.iter().rev() {
        all.push((pi - b, pi - a));
    }
    all
}

fn end_size(sn: &SnTable, theta: f64) -> Result<f64> {
    let tables = sn.tables();
    let mut worst: f64 = 0.0;
    for th in [theta, std::f64::consts::PI - theta] {
        let (s, c) = Dd::from_f64(th).sin_cos();
        let lv = tables.lambda_full(Complex::new(c, s))?;
        let w = Complex::new(Dd::ONE, Dd::ZERO) / lv.lambda;
        for n in 1..=sn.n_max() {
            worst = worst.max(cabs_f64(sn.get(n)?.eval(w)));
        }
        let rho = cabs_f64(lv.derivative) * cabs_f64(w) * cabs_f64(w);
        worst = worst.max(rho);
    }
    Ok(worst)
}

/// Largest `δ` with all integrands below [`CUTOFF_TOL`] at `θ = δ` and
/// `θ = π − δ`.
fn choose_cutoff(sn: &SnTable) -> Result<f64> {
    let (mut lo, mut hi) = (0.012, 0.6);
    if end_size(sn, lo)? >= CUTOFF_TOL {
        return Err(HfError::AlgorithmError(
            "no admissible endpoint cutoff above 0.012".into(),
        ));
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if end_size(sn, mid)? < CUTOFF_TOL {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

impl SemicirclePath {
    fn build(sn: &SnTable, delta: f64, kappa: f64) -> Result<Self> {
        let panels = panel_list(delta, kappa);
        let gl: GaussLegendre<Dd> = GaussLegendre::new(NODES_PER_PANEL);
        let mut raw = Vec::with_capacity(panels.len() * NODES_PER_PANEL);
        for &(a, b) in &panels {
            for (t, w) in gl.on(Dd::from_f64(a), Dd::from_f64(b)) {
                raw.push((t, w));
            }
        }
        let tables = sn.tables();
        let nodes = raw
            .par_iter()
            .map(|&(theta, w)| -> Result<PathNode> {
                let (s, c) = theta.sin_cos();
                let eta = Complex::new(c, s);
                let lv = tables.lambda_full(eta)?;
                let inv = Complex::new(Dd::ONE, Dd::ZERO) / lv.lambda;
                let mut sv = Vec::with_capacity(sn.n_max());
                let mut dsv = Vec::with_capacity(sn.n_max());
                for n in 1..=sn.n_max() {
                    let (p, dp) = sn.get(n)?.eval_with_derivative(inv);
                    sv.push(p);
                    dsv.push(dp);
                }
                let ia = crate::real::cabs(inv);
                let rho = crate::real::cabs(lv.derivative) * ia * ia;
                Ok(PathNode {
                    theta,
                    eta,
                    d_eta: Complex::new(Dd::ZERO, w) * eta,
                    d_theta: w,
                    lambda: lv.lambda,
                    lambda_prime: lv.derivative,
                    rho,
                    s: sv,
                    ds: dsv,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SemicirclePath {
            delta,
            kappa,
            panels,
            nodes,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn panels(&self) -> &[(f64, f64)] {
        &self.panels
    }

    pub fn nodes(&self) -> &[PathNode] {
        &self.nodes
    }

    /// `∫ g(η) dη` over the path.
    pub fn integrate_deta<F: Fn(&PathNode) -> Cdd>(&self, g: F) -> Cdd {
        self.nodes
            .iter()
            .fold(czero(), |acc, nd| acc + g(nd) * nd.d_eta)
    }

    /// `∫ g(θ) dθ` over the path.
    pub fn integrate_dtheta<F: Fn(&PathNode) -> Cdd>(&self, g: F) -> Cdd {
        self.nodes.iter().fold(czero(), |acc, nd| {
            let v = g(nd);
            acc + Complex::new(v.re * nd.d_theta, v.im * nd.d_theta)
        })
    }
}

/// Check integrals used to decide whether a path is fine enough.
fn path_checks(path: &SemicirclePath, n_check: usize) -> Vec<Cdd> {
    let mut out = Vec::new();
    out.push(path.integrate_dtheta(|nd| Complex::new(nd.rho, Dd::ZERO)));
    for n in [1, n_check] {
        let nf = Dd::from_f64(n as f64);
        out.push(path.integrate_deta(|nd| {
            let e = cexp(Complex::new(
                -(Dd::PI * nf * nd.eta.im),
                Dd::PI * nf * nd.eta.re,
            ));
            nd.s[n - 1] * e
        }));
        out.push(path.integrate_deta(|nd| nd.s[n - 1] / (nd.eta * nd.eta)));
    }
    out
}

/// Which biorthogonal function to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientFunction {
    A0,
    A(i64),
    B(i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lattice {
    Integers,
    HalfIntegers,
}

/// Number of `(a_1, …, a_4)` in `Z^4` or `(Z + ½)^4` with `Σ a_i² = n`.
pub fn r4_count(n: u64, lattice: Lattice) -> u64 {
    let (target, parity) = match lattice {
        Lattice::Integers => (n as i64, None),
        Lattice::HalfIntegers => (4 * n as i64, Some(1)),
    };
    let bound = (target as f64).sqrt() as i64 + 1;
    let ok = |m: i64| parity.is_none_or(|p| m.rem_euclid(2) == p);
    let vals: Vec<i64> = (-bound..=bound)
        .filter(|&m| ok(m) && m * m <= target)
        .collect();
    let mut count = 0u64;
    for &a in &vals {
        let ra = target - a * a;
        for &b in &vals {
            let rb = ra - b * b;
            if rb < 0 {
                continue;
            }
            for &c in &vals {
                let rc = rb - c * c;
                if rc < 0 {
                    continue;
                }
                let d = (rc as f64).sqrt().round() as i64;
                if d * d == rc {
                    if d == 0 {
                        count += u64::from(ok(0));
                    } else if ok(d) {
                        count += 2;
                    }
                }
            }
        }
    }
    count
}

/// Fast pairing value with an optional direct cross-check.
#[derive(Clone, Copy, Debug)]
pub struct PairingReport {
    pub value: C64,
    pub direct: C64,
    pub tail_bound: f64,
    pub residual: f64,
}

/// `A_0`, `A_n`, `B_n` for `1 ≤ |n| ≤ n_max` backed by one semicircle
/// discretization.
#[derive(Clone, Debug)]
pub struct BiorthoTable {
    sn: SnTable,
    path: SemicirclePath,
    /// `pos[n − 1][k] = ∫ S_n η^k dη`.
    pos: Vec<Vec<Cdd>>,
    /// `neg[n − 1][k] = ∫ S_n η^{−k} dη`.
    neg: Vec<Vec<Cdd>>,
    /// `∫ ρ sin θ cos kθ dθ`.
    a0_moments: Vec<Dd>,
    /// `∫ |S_n| |dη|`, the magnitude scale of the quadrature for `S_n`.
    mass: Vec<f64>,
}

impl BiorthoTable {
    /// Builds the table for `n_max ≥ 1`, refining the path until the check
    /// integrals settle, and verifies `A_1(0) = 8/π²`.
    pub fn new(n_max: usize) -> Result<Self> {
        let sn = SnTable::with_default_order(n_max)?;
        Self::from_sn_table(sn)
    }

    pub fn from_sn_table(sn: SnTable) -> Result<Self> {
        let n_max = sn.n_max();
        let delta = choose_cutoff(&sn)?;
        let n_check = n_max.min(8);
        let mut kappa = 2.0;
        let mut path = SemicirclePath::build(&sn, delta, kappa)?;
        let mut checks = path_checks(&path, n_check);
        let mut change = f64::INFINITY;
        for _ in 0..MAX_REFINEMENTS {
            kappa *= 0.5;
            let finer = SemicirclePath::build(&sn, delta, kappa)?;
            let fc = path_checks(&finer, n_check);
            change = checks
                .iter()
                .zip(&fc)
                .map(|(a, b)| cabs_f64(*a - *b))
                .fold(0.0, f64::max);
            path = finer;
            checks = fc;
            if change < REFINE_TOL {
                break;
            }
        }
        if change >= REFINE_TOL {
            return Err(HfError::ConvergenceError {
                what: "semicircle panel refinement".into(),
                achieved: change,
            });
        }

        let k_neg = 80 + (2.2 * n_max as f64).ceil() as usize + 2;
        let per_n: Vec<(Vec<Cdd>, Vec<Cdd>, f64)> = (1..=n_max)
            .into_par_iter()
            .map(|n| {
                let mut pos = vec![czero(); K_POS + 1];
                let mut neg = vec![czero(); k_neg + 1];
                let mut mass = 0.0;
                for nd in &path.nodes {
                    let base = nd.s[n - 1] * nd.d_eta;
                    mass += cabs_f64(nd.s[n - 1]) * nd.d_theta.to_f64();
                    let inv = nd.eta.conj();
                    let mut p = base;
                    for v in pos.iter_mut() {
                        *v += p;
                        p *= nd.eta;
                    }
                    let mut p = base;
                    for v in neg.iter_mut() {
                        *v += p;
                        p *= inv;
                    }
                }
                (pos, neg, mass)
            })
            .collect();
        let mut a0_moments = vec![Dd::ZERO; K_POS + 1];
        for nd in &path.nodes {
            let base = nd.rho * nd.eta.im * nd.d_theta;
            let mut p = Complex::new(Dd::ONE, Dd::ZERO);
            for v in a0_moments.iter_mut() {
                *v += base * p.re;
                p *= nd.eta;
            }
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut mass = Vec::new();
        for (p, q, m) in per_n {
            pos.push(p);
            neg.push(q);
            mass.push(m);
        }
        let table = BiorthoTable {
            sn,
            path,
            pos,
            neg,
            a0_moments,
            mass,
        };
        table.self_test()?;
        Ok(table)
    }

    fn self_test(&self) -> Result<()> {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let want = 8.0 / pi2;
        let got = self.direct_a(1, 0.0)?;
        if (got - C64::new(want, 0.0)).norm() > 1e-8 {
            return Err(HfError::ConsistencyError {
                what: "A_1(0) orientation check".into(),
                a: got.to_string(),
                b: want.to_string(),
                diff: (got - C64::new(want, 0.0)).norm(),
            });
        }
        Ok(())
    }

    pub fn n_max(&self) -> usize {
        self.sn.n_max()
    }

    pub fn sn_table(&self) -> &SnTable {
        &self.sn
    }

    pub fn tables(&self) -> &ModularTables<Dd> {
        self.sn.tables()
    }

    pub fn path(&self) -> &SemicirclePath {
        &self.path
    }

    /// Rough absolute accuracy of `A_n`, `B_n` values: double-double
    /// roundoff times the magnitude of the integrand.
    pub fn accuracy_estimate(&self, n: usize) -> f64 {
        let m = self
            .mass
            .get(n.max(1) - 1)
            .copied()
            .unwrap_or(f64::INFINITY);
        1e-30 * m.max(1.0)
    }

    fn check_n(&self, n: i64) -> Result<usize> {
        let a = n.unsigned_abs() as usize;
        if a == 0 || a > self.n_max() {
            return Err(HfError::InvalidInput(format!(
                "index {n} outside 1..={} in absolute value",
                self.n_max()
            )));
        }
        Ok(a)
    }

    fn prefactor(n: usize) -> Dd {
        Dd::from_f64(ORIENTATION) / (Dd::from_f64(4.0 * n as f64) * Dd::PI * Dd::PI)
    }

    fn direct_a(&self, n: usize, x: f64) -> Result<C64> {
        let xd = cd(x);
        let v = self.path.integrate_deta(|nd| {
            let d = Complex::new(Dd::ONE, Dd::ZERO) / (xd - nd.eta);
            nd.s[n - 1] * d * d
        });
        Ok(to_c64(v * Self::prefactor(n)))
    }

    fn direct_b(&self, n: usize, x: f64) -> Result<C64> {
        let xd = cd(x);
        let one = cd(1.0);
        let v = self.path.integrate_deta(|nd| {
            let d = one / (one + xd * nd.eta);
            nd.s[n - 1] * d * d
        });
        Ok(to_c64(v * Self::prefactor(n)))
    }

    /// `Σ_k (k + 1) r^k m[k + shift]` in double-double precision.
    fn moment_series(m: &[Cdd], r: f64, shift: usize) -> Cdd {
        let rd = Dd::from_f64(r);
        let mut acc = czero();
        let mut p = Dd::ONE;
        for k in 0..m.len().saturating_sub(shift) {
            let c = p * Dd::from_f64((k + 1) as f64);
            acc += Complex::new(m[k + shift].re * c, m[k + shift].im * c);
            p *= rd;
        }
        acc
    }

    fn a_pos(&self, n: usize, x: f64) -> Result<C64> {
        let ax = x.abs();
        let v = if ax <= 0.25 {
            Self::moment_series(&self.neg[n - 1], x, 2)
        } else if ax >= 2.0 {
            let x2 = Dd::from_f64(x) * Dd::from_f64(x);
            let s = Self::moment_series(&self.pos[n - 1], 1.0 / x, 0);
            Complex::new(s.re / x2, s.im / x2)
        } else {
            return self.direct_a(n, x);
        };
        Ok(to_c64(v * Self::prefactor(n)))
    }

    fn b_pos(&self, n: usize, x: f64) -> Result<C64> {
        let ax = x.abs();
        let v = if ax <= 0.5 {
            Self::moment_series(&self.pos[n - 1], -x, 0)
        } else if ax >= 4.0 {
            let x2 = Dd::from_f64(x) * Dd::from_f64(x);
            let s = Self::moment_series(&self.neg[n - 1], -1.0 / x, 2);
            Complex::new(s.re / x2, s.im / x2)
        } else {
            return self.direct_b(n, x);
        };
        Ok(to_c64(v * Self::prefactor(n)))
    }

    /// `A_n(x)` for `1 ≤ |n| ≤ n_max`.
    pub fn an_eval(&self, n: i64, x: f64) -> Result<C64> {
        let a = self.check_n(n)?;
        let v = self.a_pos(a, x)?;
        Ok(if n > 0 { v } else { v.conj() })
    }

    /// `B_n(x)` for `1 ≤ |n| ≤ n_max`.
    pub fn bn_eval(&self, n: i64, x: f64) -> Result<C64> {
        let a = self.check_n(n)?;
        let v = self.b_pos(a, x)?;
        Ok(if n > 0 { v } else { v.conj() })
    }

    /// `A_0(x)`.
    pub fn a0_eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(HfError::DomainError(format!(
                "A_0 needs a finite argument, got {x}"
            )));
        }
        let ax = x.abs();
        let two_pi2 = Dd::from_f64(2.0) * Dd::PI * Dd::PI;
        let series = |r: f64| -> Dd {
            let rd = Dd::from_f64(r);
            let mut acc = self.a0_moments[0];
            let mut p = Dd::ONE;
            for c in &self.a0_moments[1..] {
                p *= rd;
                acc += Dd::from_f64(2.0) * p * *c;
            }
            acc
        };
        let xd = Dd::from_f64(x);
        let v = if ax <= 0.5 {
            series(x) / (two_pi2 * (Dd::ONE - xd * xd))
        } else if ax >= 2.0 {
            series(1.0 / x) / (two_pi2 * (xd * xd - Dd::ONE))
        } else {
            let s = self.path.integrate_dtheta(|nd| {
                let d = xd - nd.eta.re;
                let den = d * d + nd.eta.im * nd.eta.im;
                Complex::new(nd.rho * nd.eta.im / den, Dd::ZERO)
            });
            s.re / two_pi2
        };
        Ok(v.to_f64())
    }

    pub fn eval(&self, f: CoefficientFunction, x: f64) -> Result<C64> {
        match f {
            CoefficientFunction::A0 | CoefficientFunction::A(0) => {
                Ok(C64::new(self.a0_eval(x)?, 0.0))
            }
            CoefficientFunction::B(0) => Ok(C64::new(0.0, 0.0)),
            CoefficientFunction::A(n) => self.an_eval(n, x),
            CoefficientFunction::B(n) => self.bn_eval(n, x),
        }
    }

    /// `(A_n^+, A_n^−) = (A_n + B_n, A_n − B_n)` at `x`.
    pub fn aplus_aminus(&self, n: i64, x: f64) -> Result<(C64, C64)> {
        if n < 1 {
            return Err(HfError::InvalidInput("A_n^± needs n ≥ 1".into()));
        }
        let a = self.an_eval(n, x)?;
        let b = self.bn_eval(n, x)?;
        Ok((a + b, a - b))
    }

    /// `(A_n(x), B_n(x))` for `n = 1..=n_max` by one pass over the path.
    pub fn eval_all(&self, x: f64) -> Result<(Vec<C64>, Vec<C64>)> {
        let xd = cd(x);
        let one = cd(1.0);
        let nm = self.n_max();
        let mut a = vec![czero(); nm];
        let mut b = vec![czero(); nm];
        for nd in &self.path.nodes {
            let da = one / (xd - nd.eta);
            let db = one / (one + xd * nd.eta);
            let ka = da * da * nd.d_eta;
            let kb = db * db * nd.d_eta;
            for n in 0..nm {
                a[n] += nd.s[n] * ka;
                b[n] += nd.s[n] * kb;
            }
        }
        let scale = |v: Vec<Cdd>| -> Vec<C64> {
            v.into_iter()
                .enumerate()
                .map(|(i, z)| to_c64(z * Self::prefactor(i + 1)))
                .collect()
        };
        Ok((scale(a), scale(b)))
    }

    /// Far-field coefficients `c_p`, `p = 0..`, with
    /// `f(x) = Σ_p c_p x^{−p}` for `|x| ≥ 4`.
    pub fn far_field(&self, f: CoefficientFunction) -> Result<Vec<C64>> {
        match f {
            CoefficientFunction::A0 | CoefficientFunction::A(0) => {
                // (C_0 + 2 Σ C_k x^{−k}) · x^{−2} Σ_j x^{−2j}, all over 2π²
                let k = self.a0_moments.len();
                let mut num = vec![Dd::ZERO; k];
                num[0] = self.a0_moments[0];
                for i in 1..k {
                    num[i] = Dd::from_f64(2.0) * self.a0_moments[i];
                }
                let mut out = vec![Dd::ZERO; k + 2];
                for (i, &c) in num.iter().enumerate() {
                    let mut j = 0;
                    while i + 2 + 2 * j < out.len() {
                        out[i + 2 + 2 * j] += c;
                        j += 1;
                    }
                }
                let two_pi2 = Dd::from_f64(2.0) * Dd::PI * Dd::PI;
                Ok(out
                    .into_iter()
                    .map(|v| C64::new((v / two_pi2).to_f64(), 0.0))
                    .collect())
            }
            CoefficientFunction::B(0) => Ok(vec![C64::new(0.0, 0.0)]),
            CoefficientFunction::A(n) => {
                let a = self.check_n(n)?;
                let pre = Self::prefactor(a);
                let mut out = vec![C64::new(0.0, 0.0); 2];
                for (k, p) in self.pos[a - 1].iter().enumerate() {
                    let v = to_c64(*p * pre) * (k + 1) as f64;
                    out.push(if n > 0 { v } else { v.conj() });
                }
                Ok(out)
            }
            CoefficientFunction::B(n) => {
                let a = self.check_n(n)?;
                let pre = Self::prefactor(a);
                let mut out = vec![C64::new(0.0, 0.0); 2];
                for (k, p) in self.neg[a - 1].iter().enumerate().skip(2) {
                    let j = k - 2;
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let v = to_c64(*p * pre) * ((j + 1) as f64 * sign);
                    out.push(if n > 0 { v } else { v.conj() });
                }
                Ok(out)
            }
        }
    }

    /// `∫ S_n(1/λ(η)) e^{iπmη} dη` over `T_+`, counterclockwise.
    pub fn semicircle_integral(&self, n: usize, m: i64) -> Result<C64> {
        self.check_n(n as i64)?;
        let md = Dd::from_f64(m as f64);
        let v = self.path.integrate_deta(|nd| {
            let e = cexp(Complex::new(
                -(Dd::PI * md * nd.eta.im),
                Dd::PI * md * nd.eta.re,
            ));
            nd.s[n - 1] * e
        });
        Ok(to_c64(v))
    }

    /// `⟨f, e_m⟩ = ∫_R f(x) e^{iπmx} dx` by the residue identity on `T_+`.
    pub fn pairing(&self, f: CoefficientFunction, m: i64) -> Result<C64> {
        let zero = C64::new(0.0, 0.0);
        match f {
            CoefficientFunction::A0 | CoefficientFunction::A(0) => {
                let md = Dd::from_f64(m as f64);
                let v = self.path.integrate_dtheta(|nd| {
                    let y = if m >= 0 { nd.eta.im } else { -nd.eta.im };
                    let e = cexp(Complex::new(-(Dd::PI * md * y), Dd::PI * md * nd.eta.re));
                    Complex::new(e.re * nd.rho, e.im * nd.rho)
                });
                Ok(to_c64(v) / (2.0 * std::f64::consts::PI))
            }
            CoefficientFunction::B(0) => Ok(zero),
            CoefficientFunction::A(n) | CoefficientFunction::B(n) if n < 0 => {
                let flipped = match f {
                    CoefficientFunction::A(_) => CoefficientFunction::A(-n),
                    _ => CoefficientFunction::B(-n),
                };
                Ok(self.pairing(flipped, -m)?.conj())
            }
            CoefficientFunction::A(n) => {
                let a = self.check_n(n)?;
                if m <= 0 {
                    return Ok(zero);
                }
                let s = self.semicircle_integral(a, m)?;
                Ok(-s * (ORIENTATION * m as f64 / (2.0 * a as f64)))
            }
            CoefficientFunction::B(n) => {
                let a = self.check_n(n)?;
                if m <= 0 {
                    return Ok(zero);
                }
                let md = Dd::from_f64(m as f64);
                let v = self.path.integrate_deta(|nd| {
                    let w = Complex::new(Dd::ONE, Dd::ZERO) / nd.eta;
                    // e^{−iπm/η}
                    let e = cexp(Complex::new(Dd::PI * md * w.im, -(Dd::PI * md * w.re)));
                    nd.s[a - 1] * w * w * e
                });
                Ok(-to_c64(v) * (ORIENTATION * m as f64 / (2.0 * a as f64)))
            }
        }
    }

    /// Pairing with a direct cross-check: integrates `f(x) e^{iπmx}` over
    /// `|x| ≤ x_max` and bounds the rest by `sup|g|·2/x_max`, where `g` is
    /// the partner function under `x ↦ −1/x`.
    pub fn pairing_checked(
        &self,
        f: CoefficientFunction,
        m: i64,
        x_max: f64,
    ) -> Result<PairingReport> {
        let value = self.pairing(f, m)?;
        let width = if m == 0 {
            1.0
        } else {
            (2.0 / m.abs() as f64).min(1.0)
        };
        let panels = (2.0 * x_max / width).ceil() as usize;
        let h = 2.0 * x_max / panels as f64;
        let gl: GaussLegendre = GaussLegendre::new(16);
        let pi = std::f64::consts::PI;
        let direct = (0..panels)
            .into_par_iter()
            .map(|i| -> Result<C64> {
                let a = -x_max + i as f64 * h;
                let mut acc = C64::new(0.0, 0.0);
                for (x, w) in gl.on(a, a + h) {
                    let e = C64::from_polar(1.0, pi * m as f64 * x);
                    acc += self.eval(f, x)? * e * w;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<C64>>>()?
            .into_iter()
            .sum::<C64>();
        let partner = match f {
            CoefficientFunction::A(n) => CoefficientFunction::B(n),
            CoefficientFunction::B(n) => CoefficientFunction::A(n),
            CoefficientFunction::A0 => CoefficientFunction::A0,
        };
        let eps = 1.0 / x_max;
        let sup = [0.0, eps, -eps]
            .iter()
            .map(|&v| self.eval(partner, v).map(|z| z.norm()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let tail_bound = 2.0 * sup / x_max;
        let residual = (value - direct).norm();
        if residual > tail_bound + 1e-6 {
            return Err(HfError::ConsistencyError {
                what: format!("pairing of {f:?} with e_{m}"),
                a: value.to_string(),
                b: direct.to_string(),
                diff: residual,
            });
        }
        Ok(PairingReport {
            value,
            direct,
            tail_bound,
            residual,
        })
    }

    /// `Σ_{|j| ≤ J} f(x + 2j)` and the tail bound `C/(2J − |x|)` with `C`
    /// the largest sampled `|f(y)|(1 + y²)`.
    pub fn periodization_sum(
        &self,
        f: CoefficientFunction,
        x: f64,
        j_max: usize,
    ) -> Result<(C64, f64)> {
        if j_max < 10 {
            return Err(HfError::InvalidInput("periodization needs J ≥ 10".into()));
        }
        let j = j_max as i64;
        let vals = (-j..=j)
            .into_par_iter()
            .map(|k| {
                let y = x + 2.0 * k as f64;
                self.eval(f, y).map(|v| (v, v.norm() * (1.0 + y * y)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut sum = C64::new(0.0, 0.0);
        let mut c: f64 = 0.0;
        for (v, w) in vals {
            sum += v;
            c = c.max(w);
        }
        Ok((sum, c / (2.0 * j_max as f64 - x.abs())))
    }

    /// Writes `x, re_A_n, im_A_n, re_B_n, im_B_n` rows after a comment line
    /// with the metadata.
    pub fn write_csv<W: Write>(&self, out: W, n: i64, xs: &[f64]) -> Result<()> {
        let mut out = out;
        writeln!(
            out,
            "# n = {n}, refinement_tolerance = {REFINE_TOL:e}, accuracy_estimate = {:e}",
            self.accuracy_estimate(n.unsigned_abs() as usize)
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "re_A_n", "im_A_n", "re_B_n", "im_B_n"])?;
        for &x in xs {
            let a = self.eval(CoefficientFunction::A(n), x)?;
            let b = self.eval(CoefficientFunction::B(n), x)?;
            w.write_record(&[
                format_f64(x),
                format_f64(a.re),
                format_f64(a.im),
                format_f64(b.re),
                format_f64(b.im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `P(τ, x) = Im τ / (π |x − τ|²)`.
pub fn poisson_kernel(tau: C64, x: f64) -> f64 {
    tau.im / (std::f64::consts::PI * (C64::new(x, 0.0) - tau).norm_sqr())
}
