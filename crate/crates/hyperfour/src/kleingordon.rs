//! Klein-Gordon solutions `U[φ](x, y) = ∫ e^{ixt + iy/t} φ(t) dt`, the
//! interpolating basis on the lattice-cross, transfer operators,
//! periodization and the Goursat compatibility kernel.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biortho::{BiorthoTable, CoefficientFunction};
use crate::error::{HfError, Result};
use crate::quad::{cubic_interp, fourier_tail, hurwitz_zeta, GaussLegendre};
use crate::real::{format_f64, C64};

const PI: f64 = std::f64::consts::PI;

/// Default truncation `X` of the real-line integral.
pub const DEFAULT_TRUNCATION: f64 = 100.0;
/// Largest number of quadrature nodes a single evaluation may use.
pub const NODE_BUDGET: usize = 10_000_000;
const NODES_PER_PANEL: usize = 16;
/// Smallest admissible node count of a [`GridFunction`].
pub const MIN_GRID_NODES: usize = 64;

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Finite linear combination `a0·A_0 + Σ a_n A_n + Σ b_n B_n` over `n ≠ 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Combination {
    pub a0: C64,
    pub a: BTreeMap<i64, C64>,
    pub b: BTreeMap<i64, C64>,
}

impl Combination {
    pub fn single(f: CoefficientFunction) -> Self {
        let mut c = Combination::default();
        let one = C64::new(1.0, 0.0);
        match f {
            CoefficientFunction::A0 | CoefficientFunction::A(0) => c.a0 = one,
            CoefficientFunction::B(0) => {}
            CoefficientFunction::A(n) => {
                c.a.insert(n, one);
            }
            CoefficientFunction::B(n) => {
                c.b.insert(n, one);
            }
        }
        c
    }

    pub fn terms(&self) -> Vec<(CoefficientFunction, C64)> {
        let mut out = Vec::new();
        if self.a0 != czero() {
            out.push((CoefficientFunction::A0, self.a0));
        }
        out.extend(
            self.a
                .iter()
                .filter(|(_, v)| **v != czero())
                .map(|(&n, &v)| (CoefficientFunction::A(n), v)),
        );
        out.extend(
            self.b
                .iter()
                .filter(|(_, v)| **v != czero())
                .map(|(&n, &v)| (CoefficientFunction::B(n), v)),
        );
        out
    }

    /// The density `φ(−1/v)/v²`, which exchanges `A_n` and `B_n`.
    pub fn inverted(&self) -> Self {
        Combination {
            a0: self.a0,
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    pub fn largest_index(&self) -> u64 {
        self.a
            .keys()
            .chain(self.b.keys())
            .map(|n| n.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, table: &BiorthoTable, t: f64) -> Result<C64> {
        let mut acc = czero();
        for (f, c) in self.terms() {
            acc += table.eval(f, t)? * c;
        }
        Ok(acc)
    }

    /// Coefficients of `Σ_p c_p t^{−p}`, valid for `|t| ≥ 4`.
    pub fn far_field(&self, table: &BiorthoTable) -> Result<Vec<C64>> {
        let mut out: Vec<C64> = Vec::new();
        for (f, c) in self.terms() {
            let ff = table.far_field(f)?;
            if out.len() < ff.len() {
                out.resize(ff.len(), czero());
            }
            for (o, v) in out.iter_mut().zip(ff) {
                *o += v * c;
            }
        }
        Ok(out)
    }
}

/// A uniformly sampled function on `[−1, 1]` with cubic interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<C64>,
}

impl GridFunction {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.len() < MIN_GRID_NODES {
            return Err(HfError::InvalidInput(format!(
                "grid functions need at least {MIN_GRID_NODES} nodes, got {}",
                values.len()
            )));
        }
        let m = values.len() - 1;
        let nodes = (0..=m).map(|i| -1.0 + 2.0 * i as f64 / m as f64).collect();
        Ok(GridFunction { nodes, values })
    }

    pub fn from_fn<F: Fn(f64) -> C64>(n: usize, f: F) -> Result<Self> {
        let m = n.max(2) - 1;
        Self::new(
            (0..=m)
                .map(|i| f(-1.0 + 2.0 * i as f64 / m as f64))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Interpolated value on `[−1, 1]` and zero outside.
    pub fn eval(&self, t: f64) -> C64 {
        if !(-1.0..=1.0).contains(&t) {
            return czero();
        }
        cubic_interp(&self.nodes, &self.values, t)
    }

    pub fn abs(&self) -> Self {
        GridFunction {
            nodes: self.nodes.clone(),
            values: self
                .values
                .iter()
                .map(|v| C64::new(v.norm(), 0.0))
                .collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

pub type DensityFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// The density `φ` of a mixed exponential solution.
#[derive(Clone)]
pub enum Density {
    Biortho(Combination),
    /// `envelope` bounds `|φ(t)|(1 + t²)`.
    Callable {
        f: DensityFn,
        envelope: f64,
    },
    /// Supported on `[−1, 1]`.
    Grid(GridFunction),
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Biortho(c) => write!(f, "Biortho({c:?})"),
            Density::Callable { envelope, .. } => write!(f, "Callable {{ envelope: {envelope} }}"),
            Density::Grid(g) => write!(f, "Grid({} nodes)", g.len()),
        }
    }
}

/// `U[φ]` together with what is needed to evaluate it.
#[derive(Clone, Debug)]
pub struct WaveFunction {
    density: Density,
    table: Option<Arc<BiorthoTable>>,
}

/// Value of `U[φ](x, y)` with a bound on the neglected part and the number
/// of density evaluations spent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KgValue {
    pub value: C64,
    pub tail_bound: f64,
    pub nodes: usize,
}

/// Axis of the lattice-cross.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl WaveFunction {
    pub fn biortho(table: Arc<BiorthoTable>, c: Combination) -> Result<Self> {
        let n_max = table.n_max() as u64;
        if c.largest_index() > n_max || c.a.contains_key(&0) || c.b.contains_key(&0) {
            return Err(HfError::InvalidInput(format!(
                "combination indices must satisfy 1 ≤ |n| ≤ {n_max}"
            )));
        }
        Ok(WaveFunction {
            density: Density::Biortho(c),
            table: Some(table),
        })
    }

    pub fn callable<F: Fn(f64) -> C64 + Send + Sync + 'static>(f: F, envelope: f64) -> Self {
        WaveFunction {
            density: Density::Callable {
                f: Arc::new(f),
                envelope,
            },
            table: None,
        }
    }

    pub fn grid(g: GridFunction) -> Self {
        WaveFunction {
            density: Density::Grid(g),
            table: None,
        }
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn table(&self) -> Option<&Arc<BiorthoTable>> {
        self.table.as_ref()
    }

    /// `φ(t)`.
    pub fn phi(&self, t: f64) -> Result<C64> {
        match &self.density {
            Density::Biortho(c) => c.eval(self.biortho_table()?, t),
            Density::Callable { f, .. } => Ok(f(t)),
            Density::Grid(g) => Ok(g.eval(t)),
        }
    }

    fn biortho_table(&self) -> Result<&BiorthoTable> {
        self.table
            .as_deref()
            .ok_or_else(|| HfError::InvalidInput("density has no coefficient table".into()))
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<C64> {
        Ok(kg_eval(self, x, y, DEFAULT_TRUNCATION)?.value)
    }

    /// `u(πm, 0)` for `axis = X` and `u(0, πm)` for `axis = Y` through the
    /// semicircle pairings; only biorthogonal densities qualify.
    pub fn lattice_value(&self, axis: Axis, m: i64) -> Result<C64> {
        let c = match &self.density {
            Density::Biortho(c) => c,
            _ => {
                return Err(HfError::InvalidInput(
                    "lattice values by pairing need a biorthogonal density".into(),
                ))
            }
        };
        let table = self.biortho_table()?;
        let (comb, freq) = match axis {
            Axis::X => (c.clone(), m),
            Axis::Y => (c.inverted(), -m),
        };
        let mut acc = czero();
        for (f, w) in comb.terms() {
            acc += table.pairing(f, freq)? * w;
        }
        Ok(acc)
    }

    /// Writes `x,y,re_u,im_u` rows for the tensor grid `xs × ys`.
    pub fn write_grid_csv<W: Write>(&self, out: W, xs: &[f64], ys: &[f64]) -> Result<()> {
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
            .collect();
        let vals = pts
            .par_iter()
            .map(|&(x, y)| self.eval(x, y))
            .collect::<Result<Vec<C64>>>()?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "re_u", "im_u"])?;
        for ((x, y), u) in pts.iter().zip(vals) {
            w.write_record(&[
                format_f64(*x),
                format_f64(*y),
                format_f64(u.re),
                format_f64(u.im),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `∫_{lo}^{hi} e^{iat + ib/t} g(t) dt` on Gauss–Legendre panels spanning at
/// most two periods of the phase, assuming `|t| ≥ t_min` on the interval.
fn oscillatory_piece<G>(
    g: &G,
    a: f64,
    b: f64,
    lo: f64,
    hi: f64,
    t_min: f64,
    budget: &mut usize,
) -> Result<C64>
where
    G: Fn(f64) -> Result<C64> + Sync,
{
    if hi <= lo {
        return Ok(czero());
    }
    let freq = a.abs() + b.abs() / (t_min * t_min);
    let width = if freq > 0.0 {
        (4.0 * PI / freq).min(1.0)
    } else {
        1.0
    };
    let panels = ((hi - lo) / width).ceil();
    let needed = panels * NODES_PER_PANEL as f64;
    if needed > *budget as f64 {
        return Err(HfError::ResolutionError(format!(
            "resolving e^{{i({a} t + {b}/t)}} on [{lo}, {hi}] needs {needed:e} nodes"
        )));
    }
    *budget -= needed as usize;
    let panels = panels as usize;
    let h = (hi - lo) / panels as f64;
    let gl: GaussLegendre = GaussLegendre::new(NODES_PER_PANEL);
    (0..panels)
        .into_par_iter()
        .map(|i| -> Result<C64> {
            let p = lo + i as f64 * h;
            let mut acc = czero();
            for (t, w) in gl.on(p, p + h) {
                acc += g(t)? * C64::from_polar(w, a * t + b / t);
            }
            Ok(acc)
        })
        .sum()
}

/// `∫_{|t|>X} e^{iat + ib/t} Σ_p c_p t^{−p} dt` with a truncation estimate.
fn far_tail(c: &[C64], a: f64, b: f64, x0: f64) -> Result<(C64, f64)> {
    let mut total = czero();
    let mut last = 0.0;
    for side in [1.0, -1.0] {
        // t = side·s, s > X: e^{i side a s} e^{i side b/s} Σ_p c_p side^p s^{−p}
        let bb = side * b;
        let mut d = vec![czero(); c.len()];
        for (p, &cp) in c.iter().enumerate() {
            if cp == czero() {
                continue;
            }
            let sp = if p % 2 == 0 { cp } else { cp * side };
            let mut e = C64::new(1.0, 0.0);
            for (k, dk) in d.iter_mut().skip(p).enumerate() {
                if k > 0 {
                    e *= C64::new(0.0, bb) / k as f64;
                }
                *dk += sp * e;
                if e.norm() < 1e-40 {
                    break;
                }
            }
        }
        for (p, dp) in d.iter().enumerate().skip(2) {
            let scale = dp.norm() * x0.powf(1.0 - p as f64);
            if scale == 0.0 {
                continue;
            }
            total += *dp * fourier_tail(side * a, x0, p as f64)?;
            last = scale;
        }
    }
    Ok((total, last))
}

/// `U[φ](x, y)` truncated to `|t| ≤ X` (extended where the tail expansion
/// needs `|ω|X ≥ 8`), with analytic tails for biorthogonal densities.
pub fn kg_eval(w: &WaveFunction, x: f64, y: f64, truncation: f64) -> Result<KgValue> {
    if !(truncation >= 100.0) {
        return Err(HfError::InvalidInput(format!(
            "truncation X = {truncation} must be at least 100"
        )));
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(HfError::InvalidInput(
            "evaluation point must be finite".into(),
        ));
    }
    let mut budget = NODE_BUDGET;
    let reach = |freq: f64| -> f64 {
        if freq == 0.0 {
            truncation
        } else {
            truncation.max(8.0 / freq.abs())
        }
    };
    match &w.density {
        Density::Biortho(c) => {
            // t = −1/v maps |t| < 1 onto |v| > 1 with density φ(−1/v)/v²
            let table = w.biortho_table()?;
            let mut value = czero();
            let mut bound = 0.0;
            for (comb, a, b) in [(c.clone(), x, y), (c.inverted(), -y, -x)] {
                if comb.terms().is_empty() {
                    continue;
                }
                let xr = reach(a);
                let g = |t: f64| comb.eval(table, t);
                value += oscillatory_piece(&g, a, b, 1.0, xr, 1.0, &mut budget)?;
                value += oscillatory_piece(&g, a, b, -xr, -1.0, 1.0, &mut budget)?;
                let (tail, est) = far_tail(&comb.far_field(table)?, a, b, xr)?;
                value += tail;
                bound += est;
            }
            Ok(KgValue {
                value,
                tail_bound: bound,
                nodes: NODE_BUDGET - budget,
            })
        }
        Density::Callable { f, envelope } => {
            let g = |t: f64| Ok(f(t));
            let xr = reach(x);
            let mut value = oscillatory_piece(&g, x, y, 1.0, xr, 1.0, &mut budget)?;
            value += oscillatory_piece(&g, x, y, -xr, -1.0, 1.0, &mut budget)?;
            let mut bound = 2.0 * envelope / xr;
            let (inner, inner_bound) = inner_integral(&|t| f(t), x, y, truncation, &mut budget)?;
            value += inner;
            bound += inner_bound;
            Ok(KgValue {
                value,
                tail_bound: bound,
                nodes: NODE_BUDGET - budget,
            })
        }
        Density::Grid(gf) => {
            let (value, tail_bound) =
                inner_integral(&|t| gf.eval(t), x, y, truncation, &mut budget)?;
            Ok(KgValue {
                value,
                tail_bound,
                nodes: NODE_BUDGET - budget,
            })
        }
    }
}

/// `∫_{−1}^{1} e^{ixt + iy/t} φ(t) dt`, directly for `y = 0` and otherwise
/// through `t = −1/v` with the leading tail `φ(0) ∫_{|v|>X} e^{−iyv} v^{−2} dv`.
fn inner_integral<F>(
    phi: &F,
    x: f64,
    y: f64,
    truncation: f64,
    budget: &mut usize,
) -> Result<(C64, f64)>
where
    F: Fn(f64) -> C64 + Sync,
{
    if y == 0.0 {
        let g = |t: f64| Ok(phi(t));
        return Ok((oscillatory_piece(&g, x, 0.0, -1.0, 1.0, 1.0, budget)?, 0.0));
    }
    let psi = |v: f64| Ok(phi(-1.0 / v) / (v * v));
    let xr = truncation.max(8.0 / y.abs());
    let mut value = oscillatory_piece(&psi, -y, -x, 1.0, xr, 1.0, budget)?;
    value += oscillatory_piece(&psi, -y, -x, -xr, -1.0, 1.0, budget)?;
    let p0 = phi(0.0);
    value += p0 * (fourier_tail(-y, xr, 2.0)? + fourier_tail(y, xr, 2.0)?);
    let h = 1e-4;
    let dp0 = (phi(h) - phi(-h)) / (2.0 * h);
    let bound = 2.0 * (dp0.norm() + x.abs() * p0.norm()) / (y.abs() * xr * xr);
    Ok((value, bound))
}

/// Interpolating solution `u_{(n,0)} = U[A_n]` (axis `X`) or
/// `u_{(0,n)} = U[B_{−n}]` (axis `Y`); index 0 gives `U[A_0]` on both axes.
pub fn kg_interp_solution(table: Arc<BiorthoTable>, n: i64, axis: Axis) -> Result<WaveFunction> {
    let f = match (n, axis) {
        (0, _) => CoefficientFunction::A0,
        (n, Axis::X) => CoefficientFunction::A(n),
        (n, Axis::Y) => CoefficientFunction::B(-n),
    };
    WaveFunction::biortho(table, Combination::single(f))
}

/// `φ = α_0 A_0 + Σ_{n≠0} (α_n A_n + β_n B_{−n})`, so that
/// `u(πm, 0) = α_m` and `u(0, πn) = β_n`.
pub fn kg_interpolate(
    table: Arc<BiorthoTable>,
    alpha: &BTreeMap<i64, C64>,
    beta: &BTreeMap<i64, C64>,
) -> Result<WaveFunction> {
    let n_max = table.n_max() as u64;
    if let Some(n) = alpha
        .keys()
        .chain(beta.keys())
        .find(|n| n.unsigned_abs() > n_max)
    {
        return Err(HfError::InvalidInput(format!(
            "lattice index {n} outside |n| ≤ {n_max}"
        )));
    }
    if beta.contains_key(&0) {
        return Err(HfError::InvalidInput(
            "β_0 would prescribe u(0, 0) twice; use α_0".into(),
        ));
    }
    let mut c = Combination::default();
    for (&n, &v) in alpha {
        if n == 0 {
            c.a0 = v;
        } else {
            c.a.insert(n, v);
        }
    }
    for (&n, &v) in beta {
        c.b.insert(-n, v);
    }
    WaveFunction::biortho(table, c)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Real(f64),
    Pair([f64; 2]),
    Parts { re: f64, im: f64 },
}

impl From<RawScalar> for C64 {
    fn from(r: RawScalar) -> C64 {
        match r {
            RawScalar::Real(x) => C64::new(x, 0.0),
            RawScalar::Pair([re, im]) => C64::new(re, im),
            RawScalar::Parts { re, im } => C64::new(re, im),
        }
    }
}

#[derive(Deserialize)]
struct RawLattice {
    #[serde(default)]
    alpha: BTreeMap<i64, RawScalar>,
    #[serde(default)]
    beta: BTreeMap<i64, RawScalar>,
}

#[derive(Serialize)]
struct LatticeOut {
    alpha: BTreeMap<i64, [f64; 2]>,
    beta: BTreeMap<i64, [f64; 2]>,
}

/// Prescribed lattice-cross values `u(πm, 0) = α_m`, `u(0, πn) = β_n`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LatticeData {
    pub alpha: BTreeMap<i64, C64>,
    pub beta: BTreeMap<i64, C64>,
}

impl LatticeData {
    /// Parses `{"alpha": {"0": 1.0, "2": [re, im]}, "beta": {...}}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawLattice = serde_json::from_str(s)?;
        Ok(LatticeData {
            alpha: raw.alpha.into_iter().map(|(k, v)| (k, v.into())).collect(),
            beta: raw.beta.into_iter().map(|(k, v)| (k, v.into())).collect(),
        })
    }

    pub fn to_json_string(&self) -> Result<String> {
        let conv = |m: &BTreeMap<i64, C64>| m.iter().map(|(&k, v)| (k, [v.re, v.im])).collect();
        let out = LatticeOut {
            alpha: conv(&self.alpha),
            beta: conv(&self.beta),
        };
        Ok(serde_json::to_string_pretty(&out)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }

    pub fn solution(&self, table: Arc<BiorthoTable>) -> Result<WaveFunction> {
        kg_interpolate(table, &self.alpha, &self.beta)
    }
}

/// Transfer operators on the inverse branches `t ↦ 1/(2j − t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TransferKind {
    /// `Σ_{j≠0} e^{2πijω} (2j − t)^{−2} f(1/(2j − t))`
    Omega(f64),
    /// `Σ_{j≠0} (2j − t)^{−2−k} f(1/(2j − t))`
    K(u32),
    /// `Σ_{j≠0} |2j − t|^{−2−k} f(1/(2j − t))`
    AbsK(u32),
}

impl TransferKind {
    fn exponent(self) -> i32 {
        match self {
            TransferKind::Omega(_) => 2,
            TransferKind::K(k) | TransferKind::AbsK(k) => 2 + k as i32,
        }
    }

    fn weight(self, j: i64, t: f64) -> C64 {
        let d = 2.0 * j as f64 - t;
        match self {
            TransferKind::Omega(w) => C64::from_polar(1.0, 2.0 * PI * j as f64 * w) / (d * d),
            TransferKind::K(k) => C64::new(d.powi(-2 - k as i32), 0.0),
            TransferKind::AbsK(k) => C64::new(d.abs().powi(-2 - k as i32), 0.0),
        }
    }

    /// `Σ_{|j|>J}` of the weights, when it has a closed form.
    fn weight_tail(self, t: f64, j_max: usize) -> Option<f64> {
        let s = self.exponent();
        let sf = s as f64;
        let right = hurwitz_zeta(sf, j_max as f64 + 1.0 - t / 2.0);
        let left = hurwitz_zeta(sf, j_max as f64 + 1.0 + t / 2.0);
        let scale = 2f64.powi(-s);
        match self {
            TransferKind::Omega(w) if w.fract() == 0.0 => Some(scale * (right + left)),
            TransferKind::Omega(_) => None,
            TransferKind::K(_) => Some(scale * (right + if s % 2 == 0 { left } else { -left })),
            TransferKind::AbsK(_) => Some(scale * (right + left)),
        }
    }
}

/// Value of a transfer operator and the bound
/// `sup|f| · Σ_{|j|>J} (2|j| − 1)^{−2−k}` on the truncated part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferValue {
    pub value: C64,
    pub tail_bound: f64,
}

/// Applies a transfer operator to a grid function at `t ∈ (−1, 1)`.
pub fn transfer_apply(
    kind: TransferKind,
    f: &GridFunction,
    t: f64,
    j_max: usize,
) -> Result<TransferValue> {
    transfer_apply_fn(kind, |s| Ok(f.eval(s)), f.sup_norm(), t, j_max)
}

/// Applies a transfer operator to any function bounded by `sup` on
/// `[−1, 1]`. Where the weight tail has a closed form the value includes
/// `f(0)` times that tail.
pub fn transfer_apply_fn<F>(
    kind: TransferKind,
    f: F,
    sup: f64,
    t: f64,
    j_max: usize,
) -> Result<TransferValue>
where
    F: Fn(f64) -> Result<C64>,
{
    if !(t.abs() < 1.0) {
        return Err(HfError::DomainError(format!(
            "transfer operators need |t| < 1, got {t}"
        )));
    }
    if j_max < 100 {
        return Err(HfError::InvalidInput(format!(
            "transfer sums need J ≥ 100, got {j_max}"
        )));
    }
    let mut value = czero();
    for j in 1..=j_max as i64 {
        for jj in [j, -j] {
            let d = 2.0 * jj as f64 - t;
            value += kind.weight(jj, t) * f(1.0 / d)?;
        }
    }
    if let Some(tail) = kind.weight_tail(t, j_max) {
        value += f(0.0)? * tail;
    }
    let s = kind.exponent() as f64;
    let tail_bound = sup * 2.0 * 2f64.powf(-s) * hurwitz_zeta(s, j_max as f64 + 0.5);
    Ok(TransferValue { value, tail_bound })
}

/// `Σ_{|j|≤J} ψ(t + 2j)` and the bound `C Σ_{|j|>J} (2|j| − |t|)^{−2}` for
/// `|ψ(s)| ≤ C/(1 + s²)`.
pub fn periodize<F: Fn(f64) -> Result<C64> + Sync>(
    psi: F,
    t: f64,
    j_max: usize,
    envelope: f64,
) -> Result<(C64, f64)> {
    let j = j_max as i64;
    let sum = (-j..=j)
        .into_par_iter()
        .map(|k| psi(t + 2.0 * k as f64))
        .sum::<Result<C64>>()?;
    let a = j_max as f64 + 1.0 - t.abs() / 2.0;
    Ok((sum, envelope * 0.5 * hurwitz_zeta(2.0, a)))
}

/// `J_1(x, y) = Σ_k (−1)^k x^{k+1} y^k / (k! (k+1)!)`, summed with
/// compensation until the terms drop below `1e−18`.
pub fn j1(x: f64, y: f64) -> Result<f64> {
    if (x * y).abs() > 1e3 {
        return Err(HfError::InvalidInput(format!(
            "J_1 needs |xy| ≤ 1000, got {}",
            x * y
        )));
    }
    let xy = x * y;
    let mut term = x;
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut k = 0.0;
    loop {
        let t = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
        k += 1.0;
        term *= -xy / (k * (k + 1.0));
        if term.abs() < 1e-18 && k > xy.abs().sqrt() {
            break;
        }
    }
    Ok(sum + comp)
}

/// Both sides of `u(0, y) = u(0, 0) − ∫_0^∞ J_1(−y, t) u(t, 0) dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoursatReport {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
}

/// Evaluates the Goursat compatibility identity at `y ∈ [−5, 0]` with the
/// `t`-integral cut at `t_max`.
pub fn goursat_check(w: &WaveFunction, y: f64, t_max: f64) -> Result<GoursatReport> {
    if !(-5.0..=0.0).contains(&y) {
        return Err(HfError::InvalidInput(format!(
            "Goursat check needs y ∈ [−5, 0], got {y}"
        )));
    }
    if !(t_max > 0.0) || (y * t_max).abs() > 1e3 {
        return Err(HfError::InvalidInput(format!(
            "invalid cut t_max = {t_max}"
        )));
    }
    let u00 = w.eval(0.0, 0.0)?;
    let lhs = if y == 0.0 { u00 } else { w.eval(0.0, y)? };
    let panels = (2.0 * t_max).ceil() as usize;
    let h = t_max / panels as f64;
    let gl: GaussLegendre = GaussLegendre::new(NODES_PER_PANEL);
    let integral = if y == 0.0 {
        czero()
    } else {
        (0..panels)
            .into_par_iter()
            .map(|i| -> Result<C64> {
                let a = i as f64 * h;
                let mut acc = czero();
                for (t, wt) in gl.on(a, a + h) {
                    acc += w.eval(t, 0.0)? * (wt * j1(-y, t)?);
                }
                Ok(acc)
            })
            .sum::<Result<C64>>()?
    };
    let rhs = u00 - integral;
    Ok(GoursatReport {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
    })
}

/// Central-difference estimate of `|u_xy + u|` at `(x, y)` with step `h`.
pub fn pde_residual(w: &WaveFunction, x: f64, y: f64, h: f64) -> Result<f64> {
    let u = |a: f64, b: f64| w.eval(a, b);
    let uxy =
        (u(x + h, y + h)? - u(x + h, y - h)? - u(x - h, y + h)? + u(x - h, y - h)?) / (4.0 * h * h);
    Ok((uxy + u(x, y)?).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn table() -> Arc<BiorthoTable> {
        static T: OnceLock<Arc<BiorthoTable>> = OnceLock::new();
        T.get_or_init(|| Arc::new(BiorthoTable::new(8).unwrap()))
            .clone()
    }

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn gaussian_fourier_transform() {
        let w = WaveFunction::callable(|t| C64::new((-t * t).exp(), 0.0), 1.0);
        let v = kg_eval(&w, 2.0, 0.0, 100.0).unwrap();
        let want = PI.sqrt() * (-1.0f64).exp();
        assert!((v.value - want).norm() < 1e-12, "{}", v.value);
        assert!(v.tail_bound <= 0.02 + 1e-15);
    }

    #[test]
    fn grid_density_transform() {
        let g = GridFunction::from_fn(129, |t| C64::new(1.0 - t * t, 0.0)).unwrap();
        let w = WaveFunction::grid(g);
        for x in [0.5f64, 3.0, 7.0] {
            let want = 4.0 * (x.sin() - x * x.cos()) / (x * x * x);
            let v = kg_eval(&w, x, 0.0, 100.0).unwrap().value;
            assert!((v - want).norm() < 1e-12, "x = {x}: {v} vs {want}");
        }
        assert!(GridFunction::new(vec![one(); 10]).is_err());
    }

    #[test]
    fn direct_quadrature_at_lattice_points() {
        let u = kg_interp_solution(table(), 2, Axis::X).unwrap();
        let a = kg_eval(&u, 2.0 * PI, 0.0, 100.0).unwrap();
        assert!((a.value - 1.0).norm() < 1e-3, "{}", a.value);
        assert!(u.eval(PI, 0.0).unwrap().norm() < 1e-3);
        assert!(u.eval(0.0, -PI).unwrap().norm() < 1e-3);
    }

    #[test]
    fn mean_value_vanishes_for_even_indices() {
        for n in [2, 4] {
            let u = kg_interp_solution(table(), n, Axis::X).unwrap();
            for x in [100.0, 400.0] {
                let v = kg_eval(&u, 0.0, 0.0, x).unwrap().value;
                assert!(v.norm() < 1e-10, "n = {n}, X = {x}: {v}");
            }
        }
    }

    #[test]
    fn kronecker_property_on_the_fast_path() {
        let t = table();
        let u00 = kg_interp_solution(t.clone(), 0, Axis::X).unwrap();
        assert!((u00.lattice_value(Axis::X, 0).unwrap() - 1.0).norm() < 1e-12);
        let u03 = kg_interp_solution(t.clone(), 3, Axis::Y).unwrap();
        assert!((u03.lattice_value(Axis::Y, 3).unwrap() - 1.0).norm() < 1e-7);
        for n in 1..=5 {
            let u = kg_interp_solution(t.clone(), n, Axis::X).unwrap();
            for m in -5..=5 {
                let want = if m == n { 1.0 } else { 0.0 };
                assert!(
                    (u.lattice_value(Axis::X, m).unwrap() - want).norm() < 1e-7,
                    "n={n} m={m}"
                );
                assert!(
                    u.lattice_value(Axis::Y, m).unwrap().norm() < 1e-7,
                    "n={n} m={m}"
                );
            }
        }
    }

    #[test]
    fn interpolation_from_lattice_data() {
        let t = table();
        let alpha = BTreeMap::from([(2, one())]);
        let beta = BTreeMap::from([(3, one())]);
        let u = kg_interpolate(t.clone(), &alpha, &BTreeMap::new()).unwrap();
        assert!((u.lattice_value(Axis::X, 2).unwrap() - 1.0).norm() < 1e-7);
        assert!(u.lattice_value(Axis::X, 1).unwrap().norm() < 1e-7);
        assert!(u.lattice_value(Axis::Y, 1).unwrap().norm() < 1e-7);
        let v = kg_interpolate(t.clone(), &BTreeMap::new(), &beta).unwrap();
        assert!((v.lattice_value(Axis::Y, 3).unwrap() - 1.0).norm() < 1e-7);
        assert!(v.lattice_value(Axis::X, 1).unwrap().norm() < 1e-7);
        let z = kg_interpolate(t.clone(), &BTreeMap::new(), &BTreeMap::new()).unwrap();
        assert_eq!(z.eval(1.0, -2.0).unwrap(), czero());
        let too_big = BTreeMap::from([(9, one())]);
        assert!(matches!(
            kg_interpolate(t, &too_big, &BTreeMap::new()),
            Err(HfError::InvalidInput(_))
        ));
    }

    #[test]
    fn interpolating_solutions_are_real() {
        let u = kg_interp_solution(table(), 5, Axis::X).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let v = u.eval(-2.0 + i as f64, -2.0 + j as f64).unwrap();
                assert!(v.im.abs() < 1e-3, "({i}, {j}): {v}");
            }
        }
    }

    #[test]
    fn klein_gordon_equation_holds() {
        let u = kg_interp_solution(table(), 2, Axis::X).unwrap();
        let r = pde_residual(&u, 1.0, -1.0, 1e-3).unwrap();
        assert!(r < 1e-2, "residual {r}");
    }

    #[test]
    fn transfer_operator_identities() {
        let ones = GridFunction::from_fn(256, |_| one()).unwrap();
        let v = transfer_apply(TransferKind::Omega(0.0), &ones, 1.0 - 1e-9, 100).unwrap();
        assert!(
            (v.value.re - (PI * PI / 4.0 - 1.0)).abs() < 1e-6,
            "{}",
            v.value
        );
        assert!(matches!(
            transfer_apply(TransferKind::K(0), &ones, 1.0, 100),
            Err(HfError::DomainError(_))
        ));

        let f = GridFunction::from_fn(256, |t| C64::new(1.0 - t * t, 0.0)).unwrap();
        let gl: GaussLegendre = GaussLegendre::new(48);
        let mut int_t0 = 0.0;
        let mut int_t2 = 0.0;
        for (t, w) in gl.on(-1.0, 1.0) {
            int_t0 += w * transfer_apply(TransferKind::Omega(0.0), &f, t, 200)
                .unwrap()
                .value
                .re;
            int_t2 += w * transfer_apply(TransferKind::K(2), &f, t, 200)
                .unwrap()
                .value
                .norm();
        }
        assert!((int_t0 - 4.0 / 3.0).abs() < 1e-6, "{int_t0}");
        assert!(int_t2 <= 4.0 / 15.0 + 1e-6, "{int_t2}");

        let g = GridFunction::from_fn(128, |t| C64::from_polar(1.0 + t, 3.0 * t)).unwrap();
        let ga = g.abs();
        for k in 0..20 {
            let t = -0.95 + 0.1 * k as f64;
            let lhs = transfer_apply(TransferKind::Omega(0.3), &g, t, 100)
                .unwrap()
                .value
                .norm();
            let rhs = transfer_apply(TransferKind::Omega(0.0), &ga, t, 100)
                .unwrap()
                .value
                .re;
            assert!(lhs <= rhs + 1e-12);
            let lk = transfer_apply(TransferKind::K(1), &g, t, 100)
                .unwrap()
                .value
                .norm();
            let rk = transfer_apply(TransferKind::AbsK(1), &ga, t, 100)
                .unwrap()
                .value
                .re;
            assert!(lk <= rk + 1e-12);
        }
    }

    #[test]
    fn aplus_aminus_fixed_points() {
        let t = table();
        let x = 0.3;
        let rhs = C64::from_polar(0.5, -2.0 * PI * x);
        let plus = |s: f64| Ok(t.aplus_aminus(2, s)?.0);
        let minus = |s: f64| Ok(t.aplus_aminus(2, s)?.1);
        let tp = transfer_apply_fn(TransferKind::Omega(0.0), plus, 1.0, x, 100).unwrap();
        let tm = transfer_apply_fn(TransferKind::Omega(0.0), minus, 1.0, x, 100).unwrap();
        let (ap, am) = t.aplus_aminus(2, x).unwrap();
        assert!(
            (ap + tp.value - rhs).norm() < 1e-3,
            "{}",
            (ap + tp.value - rhs).norm()
        );
        assert!(
            (am - tm.value - rhs).norm() < 1e-3,
            "{}",
            (am - tm.value - rhs).norm()
        );
    }

    #[test]
    fn periodizations() {
        let t = table();
        let (s, b) =
            periodize(|x| Ok(C64::new(1.0 / (1.0 + x * x), 0.0)), 0.0, 10_000, 1.0).unwrap();
        let want = PI / 2.0 / (PI / 2.0).tanh();
        assert!((s.re - want).abs() <= b && b < 1e-4, "{s} {want} {b}");
        let (s, _) = periodize(|x| Ok(C64::new(t.a0_eval(x)?, 0.0)), 0.3, 10_000, 1.0).unwrap();
        assert!((s - 0.5).norm() < 1e-3, "{s}");
        let (s, _) = periodize(|x| t.bn_eval(1, x), 0.3, 10_000, 1.0).unwrap();
        assert!(s.norm() < 1e-3, "{s}");
    }

    #[test]
    fn goursat_identity() {
        assert_eq!(j1(2.5, 0.0).unwrap(), 2.5);
        assert!(j1(10.0, 200.0).is_err());
        let w = WaveFunction::callable(|t| C64::new((-t * t).exp(), 0.0), 1.0);
        let r0 = goursat_check(&w, 0.0, 20.0).unwrap();
        assert_eq!(r0.residual, 0.0);
        let r = goursat_check(&w, -1.0, 20.0).unwrap();
        assert!(r.residual < 1e-2, "{r:?}");
    }

    #[test]
    fn lattice_json_round_trip() {
        let d = LatticeData::from_json_str(
            r#"{"alpha":{"0":1.0,"2":[0.5,-0.25]},"beta":{"3":{"re":2,"im":1}}}"#,
        )
        .unwrap();
        assert_eq!(d.alpha[&2], C64::new(0.5, -0.25));
        assert_eq!(d.beta[&3], C64::new(2.0, 1.0));
        let back = LatticeData::from_json_str(&d.to_json_string().unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn node_budget_is_enforced() {
        let w = WaveFunction::callable(|t| C64::new(1.0 / (1.0 + t * t), 0.0), 1.0);
        assert!(matches!(
            kg_eval(&w, 1e9, 0.0, 1e4),
            Err(HfError::ResolutionError(_))
        ));
        assert!(kg_eval(&w, 1.0, 0.0, 10.0).is_err());
    }
}
