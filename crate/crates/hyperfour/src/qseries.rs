//! Truncated Laurent series in the nome `q = e^{iπτ}`.
//!
//! A [`NomeSeries`] stores `coeffs[k]` as the coefficient of
//! `q^{min_order + k}` for `k = 0..=T`, so the series is exact modulo
//! `q^{min_order + T + 1}`. Fractional leading powers such as the `q^{1/4}`
//! in front of `θ10` are carried in a separate [`Monomial`] prefactor and are
//! never folded into the integer-indexed coefficients.

use num_complex::Complex;

use crate::error::{HfError, Result};
use crate::real::{cabs_f64, cexp, cpow, Real};

/// `scale · q^exponent`, where `q^e` means `e^{iπτe}` when evaluated through
/// [`NomeSeries::eval_tau`] and the principal branch when evaluated at `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial<R: Real> {
    pub scale: Complex<R>,
    pub exponent: Complex<R>,
}

impl<R: Real> Monomial<R> {
    pub fn one() -> Self {
        Monomial {
            scale: Complex::new(R::one(), R::zero()),
            exponent: Complex::new(R::zero(), R::zero()),
        }
    }

    pub fn is_one(&self) -> bool {
        self.scale.re == R::one()
            && self.scale.im == R::zero()
            && self.exponent.re == R::zero()
            && self.exponent.im == R::zero()
    }

    fn mul(&self, o: &Monomial<R>) -> Monomial<R> {
        Monomial {
            scale: self.scale * o.scale,
            exponent: self.exponent + o.exponent,
        }
    }

    fn close_to(&self, o: &Monomial<R>) -> bool {
        cabs_f64(self.scale - o.scale) <= 1e-14 * cabs_f64(self.scale).max(1.0)
            && cabs_f64(self.exponent - o.exponent) <= 1e-14
    }
}

/// A value produced by series evaluation together with a truncation estimate.
#[derive(Clone, Copy, Debug)]
pub struct SeriesValue<R: Real> {
    pub value: Complex<R>,
    /// Geometric-majorant estimate of the omitted tail.
    pub tail_bound: f64,
}

#[derive(Clone, Debug)]
pub struct NomeSeries<R: Real = f64> {
    min_order: i64,
    coeffs: Vec<Complex<R>>,
    prefactor: Monomial<R>,
}

fn czero<R: Real>() -> Complex<R> {
    Complex::new(R::zero(), R::zero())
}

fn cone<R: Real>() -> Complex<R> {
    Complex::new(R::one(), R::zero())
}

fn is_zero<R: Real>(z: &Complex<R>) -> bool {
    z.re == R::zero() && z.im == R::zero()
}

impl<R: Real> NomeSeries<R> {
    /// Builds a series from `coeffs[k]` = coefficient of `q^{min_order+k}`.
    pub fn new(min_order: i64, coeffs: Vec<Complex<R>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(HfError::InvalidSeries(
                "a series needs at least one coefficient".into(),
            ));
        }
        Ok(NomeSeries {
            min_order,
            coeffs,
            prefactor: Monomial::one(),
        })
    }

    /// Builds a series with real coefficients.
    pub fn from_real(min_order: i64, coeffs: &[f64]) -> Result<Self> {
        Self::new(
            min_order,
            coeffs
                .iter()
                .map(|&x| Complex::new(R::from_f64(x), R::zero()))
                .collect(),
        )
    }

    pub fn constant(value: Complex<R>, order: usize) -> Self {
        let mut coeffs = vec![czero(); order + 1];
        coeffs[0] = value;
        NomeSeries {
            min_order: 0,
            coeffs,
            prefactor: Monomial::one(),
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(cone(), order)
    }

    /// The monomial `q^k` known to `order` further terms.
    pub fn q_power(k: i64, order: usize) -> Self {
        let mut s = Self::one(order);
        s.min_order = k;
        s
    }

    pub fn with_prefactor(mut self, prefactor: Monomial<R>) -> Self {
        self.prefactor = prefactor;
        self
    }

    pub fn min_order(&self) -> i64 {
        self.min_order
    }

    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Highest absolute power of `q` whose coefficient is known.
    pub fn max_order(&self) -> i64 {
        self.min_order + self.truncation_order() as i64
    }

    pub fn coeffs(&self) -> &[Complex<R>] {
        &self.coeffs
    }

    pub fn prefactor(&self) -> &Monomial<R> {
        &self.prefactor
    }

    /// Coefficient of `q^k`, or `None` when `k` lies beyond the known order.
    pub fn coeff(&self, k: i64) -> Option<Complex<R>> {
        if k > self.max_order() {
            None
        } else if k < self.min_order {
            Some(czero())
        } else {
            Some(self.coeffs[(k - self.min_order) as usize])
        }
    }

    /// Drops terms so that at most `order + 1` coefficients remain.
    pub fn truncate(&self, order: usize) -> Self {
        let mut s = self.clone();
        s.coeffs.truncate(order + 1);
        s
    }

    /// Strips exactly vanishing leading coefficients.
    pub fn normalized(&self) -> Result<Self> {
        let lead = self
            .coeffs
            .iter()
            .position(|z| !is_zero(z))
            .ok_or_else(|| HfError::InvalidSeries("series is identically zero".into()))?;
        Ok(NomeSeries {
            min_order: self.min_order + lead as i64,
            coeffs: self.coeffs[lead..].to_vec(),
            prefactor: self.prefactor.clone(),
        })
    }

    pub fn scale(&self, s: Complex<R>) -> Self {
        NomeSeries {
            min_order: self.min_order,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
            prefactor: self.prefactor.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex::new(-R::one(), R::zero()))
    }

    /// Converts the coefficient field, e.g. from double-double to `f64`.
    pub fn cast<S: Real>(&self) -> NomeSeries<S> {
        use crate::real::cast_c;
        NomeSeries {
            min_order: self.min_order,
            coeffs: self.coeffs.iter().map(|&c| cast_c(c)).collect(),
            prefactor: Monomial {
                scale: cast_c(self.prefactor.scale),
                exponent: cast_c(self.prefactor.exponent),
            },
        }
    }

    /// Cauchy product; the result is known to the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Self {
        let t = self.truncation_order().min(other.truncation_order());
        let mut out = vec![czero(); t + 1];
        for (i, a) in self.coeffs.iter().take(t + 1).enumerate() {
            if is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(t + 1 - i).enumerate() {
                out[i + j] += *a * *b;
            }
        }
        let mut s = NomeSeries {
            min_order: self.min_order + other.min_order,
            coeffs: out,
            prefactor: self.prefactor.mul(&other.prefactor),
        };
        s.fold_prefactor();
        s
    }

    /// Sum of two series with matching prefactors.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.prefactor.close_to(&other.prefactor) {
            return Err(HfError::InvalidSeries(
                "cannot add series with different monomial prefactors".into(),
            ));
        }
        let lo = self.min_order.min(other.min_order);
        let hi = self.max_order().min(other.max_order());
        if hi < lo {
            return Err(HfError::InvalidSeries(
                "sum has no provably known coefficient".into(),
            ));
        }
        let coeffs = (lo..=hi)
            .map(|k| self.coeff(k).unwrap() + other.coeff(k).unwrap())
            .collect();
        Ok(NomeSeries {
            min_order: lo,
            coeffs,
            prefactor: self.prefactor.clone(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Multiplicative inverse.
    pub fn inv(&self) -> Result<Self> {
        let a = self.normalized()?;
        let t = a.truncation_order();
        let a0inv = cone::<R>() / a.coeffs[0];
        let mut b = vec![czero(); t + 1];
        b[0] = a0inv;
        for n in 1..=t {
            let mut s: Complex<R> = czero();
            for k in 1..=n {
                s += a.coeffs[k] * b[n - k];
            }
            b[n] = czero::<R>() - s * a0inv;
        }
        let prefactor = Monomial {
            scale: cone::<R>() / a.prefactor.scale,
            exponent: -a.prefactor.exponent,
        };
        Ok(NomeSeries {
            min_order: -a.min_order,
            coeffs: b,
            prefactor,
        })
    }

    /// Quotient `self / other`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    /// Coefficients re-indexed from `q^0`, padding below `min_order` with zeros.
    fn from_zero_order(&self) -> Result<Vec<Complex<R>>> {
        if self.min_order < 0 {
            return Err(HfError::InvalidSeries(
                "negative powers of q are not allowed here".into(),
            ));
        }
        let mut v = vec![czero(); self.min_order as usize];
        v.extend_from_slice(&self.coeffs);
        Ok(v)
    }

    /// Formal exponential; a constant term is split off as a scalar factor.
    pub fn exp(&self) -> Result<Self> {
        if !self.prefactor.is_one() {
            return Err(HfError::InvalidSeries(
                "exp of a series with a monomial prefactor".into(),
            ));
        }
        let a = self.from_zero_order()?;
        let t = a.len() - 1;
        let mut b = vec![czero(); t + 1];
        b[0] = cone();
        for n in 1..=t {
            let mut s: Complex<R> = czero();
            for k in 1..=n {
                s += a[k] * b[n - k] * R::from_f64(k as f64);
            }
            b[n] = s / R::from_f64(n as f64);
        }
        let c0 = cexp(a[0]);
        Ok(NomeSeries {
            min_order: 0,
            coeffs: b.into_iter().map(|z| z * c0).collect(),
            prefactor: Monomial::one(),
        })
    }

    /// Formal logarithm of a series with constant term 1.
    pub fn log(&self) -> Result<Self> {
        if !self.prefactor.is_one() {
            return Err(HfError::InvalidSeries(
                "log of a series with a monomial prefactor".into(),
            ));
        }
        let a = self.normalized()?;
        if a.min_order != 0 || cabs_f64(a.coeffs[0] - cone()) > 1e-12 {
            return Err(HfError::InvalidSeries(
                "log needs a series of the form 1 + O(q)".into(),
            ));
        }
        let t = a.truncation_order();
        let mut b = vec![czero(); t + 1];
        for n in 1..=t {
            let mut s: Complex<R> = czero();
            for k in 1..n {
                s += b[k] * a.coeffs[n - k] * R::from_f64(k as f64);
            }
            b[n] = a.coeffs[n] - s / R::from_f64(n as f64);
        }
        Ok(NomeSeries {
            min_order: 0,
            coeffs: b,
            prefactor: Monomial::one(),
        })
    }

    /// Power `self^alpha` as `exp(alpha · log)` of the normalized series;
    /// the leading monomial is raised with the principal branch.
    pub fn pow(&self, alpha: Complex<R>) -> Result<Self> {
        let a = self.normalized()?;
        let c0 = a.coeffs[0];
        let unit = NomeSeries {
            min_order: 0,
            coeffs: a.coeffs.iter().map(|&z| z / c0).collect(),
            prefactor: Monomial::one(),
        };
        let b = unit.log()?.scale(alpha).exp()?.coeffs;
        let lead = cpow(c0, alpha);
        let mono_exp = alpha * R::from_f64(a.min_order as f64);
        let prefactor = Monomial {
            scale: cpow(a.prefactor.scale, alpha),
            exponent: a.prefactor.exponent * alpha + mono_exp,
        };
        let mut s = NomeSeries {
            min_order: 0,
            coeffs: b.into_iter().map(|z| z * lead).collect(),
            prefactor,
        };
        s.fold_prefactor();
        Ok(s)
    }

    /// Moves an integral prefactor exponent into `min_order`.
    fn fold_prefactor(&mut self) {
        let e = self.prefactor.exponent;
        let re = e.re.to_f64();
        let k = re.round();
        if e.im.to_f64().abs() < 1e-12 && (re - k).abs() < 1e-12 && k != 0.0 {
            self.min_order += k as i64;
            self.prefactor.exponent = czero();
        } else if e.im.to_f64().abs() < 1e-12 && (re - k).abs() < 1e-12 {
            self.prefactor.exponent = czero();
        }
    }

    /// Formal derivative `d/dq`; the prefactor must be trivial.
    pub fn derivative(&self) -> Result<Self> {
        if !self.prefactor.is_one() {
            return Err(HfError::InvalidSeries(
                "derivative of a series with a monomial prefactor".into(),
            ));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * R::from_f64((self.min_order + k as i64) as f64))
            .collect();
        Ok(NomeSeries {
            min_order: self.min_order - 1,
            coeffs,
            prefactor: Monomial::one(),
        })
    }

    fn horner(&self, q: Complex<R>) -> Complex<R> {
        let mut acc: Complex<R> = czero();
        for c in self.coeffs.iter().rev() {
            acc = acc * q + *c;
        }
        acc
    }

    fn tail_estimate(&self, r: f64) -> f64 {
        let t = self.truncation_order();
        let start = t.saturating_sub(3);
        let mags: Vec<f64> = self.coeffs[start..].iter().map(|c| cabs_f64(*c)).collect();
        let cmax = mags.iter().cloned().fold(0.0, f64::max);
        if cmax == 0.0 {
            return 0.0;
        }
        let mut rho: f64 = 1.0;
        for w in mags.windows(2) {
            if w[0] > 0.0 {
                rho = rho.max(w[1] / w[0]);
            }
        }
        let x = rho * r;
        if x >= 1.0 {
            f64::INFINITY
        } else {
            cmax * r.powi(t as i32) * x / (1.0 - x)
        }
    }

    /// Evaluates the truncated series at a nome value `q` with `|q| < 1`.
    pub fn eval(&self, q: Complex<R>) -> Result<SeriesValue<R>> {
        let r = cabs_f64(q);
        if r >= 1.0 {
            return Err(HfError::DomainError(format!("|q| = {r} >= 1")));
        }
        if r == 0.0 && (self.min_order < 0 || !self.prefactor.is_one()) {
            return Err(HfError::DomainError("negative power of q at q = 0".into()));
        }
        let mut v = self.horner(q);
        let shift = if self.min_order >= 0 {
            pow_int(q, self.min_order as u64)
        } else {
            cone::<R>() / pow_int(q, (-self.min_order) as u64)
        };
        v = v * shift;
        let mut scale_mag = cabs_f64(shift);
        if !self.prefactor.is_one() {
            let p = self.prefactor.scale * cpow(q, self.prefactor.exponent);
            scale_mag *= cabs_f64(p);
            v = v * p;
        }
        Ok(SeriesValue {
            value: v,
            tail_bound: self.tail_estimate(r) * scale_mag,
        })
    }

    /// Evaluates at `q = e^{iπτ}`, interpreting the prefactor exponent as
    /// `e^{iπτ·exponent}` without branch ambiguity.
    pub fn eval_tau(&self, tau: Complex<R>) -> Result<SeriesValue<R>> {
        if tau.im <= R::zero() {
            return Err(HfError::DomainError("Im tau must be positive".into()));
        }
        let pi = R::pi();
        let ipt = Complex::new(-tau.im * pi, tau.re * pi);
        let q = cexp(ipt);
        let r = cabs_f64(q);
        let mut v = self.horner(q);
        let shift = cexp(ipt * R::from_f64(self.min_order as f64));
        v = v * shift;
        let mut scale_mag = cabs_f64(shift);
        if !self.prefactor.is_one() {
            let p = self.prefactor.scale * cexp(ipt * self.prefactor.exponent);
            scale_mag *= cabs_f64(p);
            v = v * p;
        }
        Ok(SeriesValue {
            value: v,
            tail_bound: self.tail_estimate(r) * scale_mag,
        })
    }
}

fn pow_int<R: Real>(q: Complex<R>, mut e: u64) -> Complex<R> {
    let mut base = q;
    let mut acc = cone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}
