//! Quadrature building blocks: Gauss–Legendre rules in any [`Real`]
//! precision, adaptive Gauss–Kronrod integration of complex-valued functions,
//! oscillatory tails on half-lines and the Hurwitz zeta function.

use num_complex::Complex;

use crate::error::{HfError, Result};
use crate::real::{Real, C64};

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<R: Real = f64> {
    pub nodes: Vec<R>,
    pub weights: Vec<R>,
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre<R: Real>(n: usize, x: R) -> (R, R) {
    let one = R::one();
    let mut p0 = one;
    let mut p1 = x;
    for k in 2..=n {
        let kf = R::from_f64(k as f64);
        let p2 = ((R::from_f64(2.0) * kf - one) * x * p1 - (kf - one) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = R::from_f64(n as f64);
    let dp = nf * (x * p1 - p0) / (x * x - one);
    (p1, dp)
}

impl<R: Real> GaussLegendre<R> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Legendre rule needs at least two nodes");
        let mut nodes = vec![R::zero(); n];
        let mut weights = vec![R::zero(); n];
        let half = n.div_ceil(2);
        for i in 0..half {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = R::from_f64(guess);
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs().to_f64() <= R::epsilon() * 4.0 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = R::from_f64(2.0) / ((R::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = R::zero();
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: R, b: R) -> impl Iterator<Item = (R, R)> + '_ {
        let half = (b - a) * R::from_f64(0.5);
        let mid = (a + b) * R::from_f64(0.5);
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }

    /// Composite rule of a complex integrand over the given panels.
    pub fn integrate<F>(&self, panels: &[(R, R)], mut f: F) -> Complex<R>
    where
        F: FnMut(R) -> Complex<R>,
    {
        let mut acc = Complex::new(R::zero(), R::zero());
        for &(a, b) in panels {
            for (x, w) in self.on(a, b) {
                let v = f(x);
                acc += Complex::new(v.re * w, v.im * w);
            }
        }
        acc
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Integral {
    pub value: C64,
    pub error: f64,
}

/// Globally adaptive 15-point Gauss–Kronrod integration over `[a, b]` with
/// optional interior breakpoints.
pub fn adaptive_gk<F: FnMut(f64) -> C64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Integral> {
    let mut pts = vec![a];
    let mut bp: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a.min(b) && x < a.max(b))
        .collect();
    bp.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if b < a {
        bp.reverse();
    }
    pts.extend(bp);
    pts.push(b);
    let mut intervals: Vec<(f64, f64, C64, f64)> = pts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: C64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) {
            return Ok(Integral {
                value: total,
                error: err,
            });
        }
        if intervals.len() >= max_intervals {
            return Err(HfError::ConvergenceError {
                what: format!("adaptive quadrature on [{a}, {b}]"),
                achieved: err,
            });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            return Err(HfError::ConvergenceError {
                what: format!("adaptive quadrature interval collapsed near {mid}"),
                achieved: err,
            });
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// `∫_X^∞ e^{iωx} x^{−p} dx` for `X > 0` and `p > 1`.
///
/// For `ω = 0` the power integral is exact. Otherwise the integration by
/// parts expansion in `1/(ωX)` is summed up to its smallest term, which
/// requires `|ω|X ≥ 8`.
pub fn fourier_tail(omega: f64, x0: f64, p: f64) -> Result<C64> {
    if !(x0 > 0.0) || !(p > 1.0) {
        return Err(HfError::InvalidInput(format!(
            "fourier tail needs X > 0 and p > 1, got X = {x0}, p = {p}"
        )));
    }
    if omega == 0.0 {
        return Ok(C64::new(x0.powf(1.0 - p) / (p - 1.0), 0.0));
    }
    if omega.abs() * x0 < 8.0 {
        return Err(HfError::ResolutionError(format!(
            "oscillatory tail with |omega| X = {} is not in the asymptotic regime",
            omega.abs() * x0
        )));
    }
    let iwx = C64::new(0.0, omega * x0);
    let lead = -C64::from_polar(1.0, omega * x0) * x0.powf(-p) / C64::new(0.0, omega);
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = f64::INFINITY;
    for j in 0..200 {
        let next = term * (p + j as f64) / iwx;
        let m = next.norm();
        if m >= last || m < 1e-18 * sum.norm() {
            if m < last {
                sum += next;
            }
            break;
        }
        last = m;
        term = next;
        sum += term;
    }
    Ok(lead * sum)
}

const BERNOULLI_2K: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Hurwitz zeta `ζ(s, a) = Σ_{k≥0} (k + a)^{−s}` for `s > 1`, `a > 0`.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    let shift = if a < 12.0 {
        (12.0 - a).ceil() as usize
    } else {
        0
    };
    let mut head = 0.0;
    for k in 0..shift {
        head += (a + k as f64).powf(-s);
    }
    let b = a + shift as f64;
    let mut sum = b.powf(1.0 - s) / (s - 1.0) + 0.5 * b.powf(-s);
    // rising factorial s (s+1) ... (s+2k-2) over (2k)!
    let mut fact = s;
    let mut pow = b.powf(-s - 1.0);
    let mut denom = 2.0;
    for (k, b2k) in BERNOULLI_2K.iter().enumerate() {
        sum += b2k / denom * fact * pow;
        let k2 = 2.0 * (k as f64 + 1.0);
        fact *= (s + k2 - 1.0) * (s + k2);
        pow /= b * b;
        denom *= (k2 + 1.0) * (k2 + 2.0);
    }
    head + sum
}

/// Four-point Lagrange interpolation on increasing nodes `xs`, using the
/// stencil nearest to `x`. Requires at least four nodes.
pub fn cubic_interp(xs: &[f64], ys: &[C64], x: f64) -> C64 {
    let n = xs.len();
    debug_assert!(n >= 4 && ys.len() == n);
    let i = xs.partition_point(|&v| v <= x);
    let start = i.saturating_sub(2).min(n - 4);
    let mut acc = C64::new(0.0, 0.0);
    for j in start..start + 4 {
        let mut w = 1.0;
        for k in start..start + 4 {
            if k != j {
                w *= (x - xs[k]) / (xs[j] - xs[k]);
            }
        }
        acc += ys[j] * w;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let g: GaussLegendre = GaussLegendre::new(8);
        let s: f64 = g.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-15);
        let v = g.integrate(&[(0.0, 1.0)], |x| C64::new(x.powi(15), 0.0));
        assert!((v.re - 1.0 / 16.0).abs() < 1e-16);
    }

    #[test]
    fn double_double_rule_reaches_full_precision() {
        let g: GaussLegendre<Dd> = GaussLegendre::new(32);
        let v = g.integrate(&[(Dd::ZERO, Dd::ONE)], |x| Complex::new(x.exp(), Dd::ZERO));
        let exact = Dd::ONE.exp() - Dd::ONE;
        assert!((v.re - exact).abs().to_f64() < 1e-30);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let r = adaptive_gk(
            |x| C64::new(1e-3 / (x * x + 1e-6), 0.0),
            -1.0,
            1.0,
            &[0.0],
            1e-13,
            1e-13,
            500,
        )
        .unwrap();
        let exact = 2.0 * (1e3f64).atan();
        assert!((r.value.re - exact).abs() < 1e-11);
    }

    #[test]
    fn oscillatory_tail_matches_closed_form() {
        // ∫_X^∞ e^{iωx} x^{-2} dx against a long direct quadrature
        let (w, x0) = (3.0, 10.0);
        let tail = fourier_tail(w, x0, 2.0).unwrap();
        let g: GaussLegendre = GaussLegendre::new(20);
        let panels: Vec<(f64, f64)> = (0..40_000)
            .map(|k| (x0 + 0.5 * k as f64, x0 + 0.5 * (k + 1) as f64))
            .collect();
        let end = x0 + 20_000.0;
        let head = g.integrate(&panels, |x| C64::from_polar(1.0, w * x) / (x * x));
        let rest = fourier_tail(w, end, 2.0).unwrap();
        assert!((tail - head - rest).norm() < 1e-12);
        assert_eq!(fourier_tail(0.0, 2.0, 3.0).unwrap(), C64::new(0.125, 0.0));
        assert!(fourier_tail(1e-6, 1.0, 2.0).is_err());
    }

    #[test]
    fn hurwitz_zeta_reduces_to_riemann() {
        let z2 = hurwitz_zeta(2.0, 1.0);
        assert!((z2 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14);
        let z3 = hurwitz_zeta(3.0, 1.0);
        assert!((z3 - 1.202_056_903_159_594_3).abs() < 1e-14);
        // ζ(2, 1/2) = 4ζ(2) − ... = π²/2
        assert!((hurwitz_zeta(2.0, 0.5) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-13);
    }
}
