//! Principal-part polynomials `S_n`: the unique degree `n` polynomial with
//! `S_n(0) = 0` such that `e^{−iπnτ} − S_n(1/λ(τ))` stays bounded as
//! `Im τ → ∞`, together with that bounded remainder `R_n`.

use num_complex::Complex;

use crate::dd::Dd;
use crate::error::{HfError, Result};
use crate::modular::{ModularTables, DEFAULT_TABLE_ORDER};
use crate::qseries::NomeSeries;
use crate::real::{cabs_f64, cast_c, from_c64, to_c64, Cdd, Real, C64};

#[derive(Clone, Debug)]
pub struct SnPolynomial {
    n: usize,
    /// `coeffs[k − 1]` is the coefficient of `w^k`.
    coeffs: Vec<Cdd>,
}

impl SnPolynomial {
    pub fn from_coeffs(coeffs: Vec<Cdd>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(HfError::InvalidInput(
                "S_n needs at least one coefficient".into(),
            ));
        }
        Ok(SnPolynomial {
            n: coeffs.len(),
            coeffs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Cdd] {
        &self.coeffs
    }

    /// Coefficient of `w^k` as `f64`; zero for `k = 0` or `k > n`.
    pub fn coeff(&self, k: usize) -> C64 {
        if k == 0 || k > self.n {
            C64::new(0.0, 0.0)
        } else {
            to_c64(self.coeffs[k - 1])
        }
    }

    pub fn eval<R: Real>(&self, w: Complex<R>) -> Complex<R> {
        self.eval_with_derivative(w).0
    }

    /// `(S_n(w), S_n'(w))` by Horner's scheme.
    pub fn eval_with_derivative<R: Real>(&self, w: Complex<R>) -> (Complex<R>, Complex<R>) {
        let zero = Complex::new(R::zero(), R::zero());
        let mut p = zero;
        let mut dp = zero;
        for c in self.coeffs.iter().rev() {
            dp = dp * w + p;
            p = p * w + cast_c::<Dd, R>(*c);
        }
        // the loop built Σ s_k w^{k−1}; one more factor of w finishes S_n
        (p * w, dp * w + p)
    }

    /// `Σ |s_k| r^k`, a bound for `|S_n(w)|` on `|w| ≤ r`.
    pub fn majorant(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * r + cabs_f64(*c);
        }
        acc * r
    }

    /// Copy with `s_k` replaced by `s_k + delta`.
    pub fn perturbed(&self, k: usize, delta: f64) -> Self {
        let mut p = self.clone();
        if k >= 1 && k <= self.n {
            p.coeffs[k - 1].re += Dd::from_f64(delta);
        }
        p
    }
}

/// `S_1, …, S_{n_max}` with their remainder series, built once in
/// double-double precision.
#[derive(Clone, Debug)]
pub struct SnTable {
    tables: ModularTables<Dd>,
    inv_lambda_powers: Vec<NomeSeries<Dd>>,
    polys: Vec<SnPolynomial>,
    remainders: Vec<NomeSeries<Dd>>,
}

/// Coefficients of `q^{−n} − S(1/λ)` at the orders `−n..=max_order` of the
/// given powers of `1/λ`.
fn residual_vector(poly: &[Cdd], n: usize, powers: &[NomeSeries<Dd>]) -> Vec<Cdd> {
    let t = powers[0].truncation_order();
    let zero = Complex::new(Dd::ZERO, Dd::ZERO);
    let mut res = vec![zero; t + 1];
    res[0] = Complex::new(Dd::ONE, Dd::ZERO);
    for (k, s) in poly.iter().enumerate() {
        let k = k + 1;
        let pk = &powers[k - 1];
        for (j, c) in pk.coeffs().iter().enumerate() {
            let idx = n - k + j;
            if idx > t {
                break;
            }
            res[idx] -= *s * *c;
        }
    }
    res
}

impl SnTable {
    /// Builds `S_1..S_{n_max}` from nome tables of the given order, which
    /// must be at least `n_max + 8`.
    pub fn build(n_max: usize, order: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(HfError::InvalidInput("n_max must be at least 1".into()));
        }
        if order < n_max + 8 {
            return Err(HfError::InvalidSeries(format!(
                "table order {order} is too small for S_{n_max}; need at least {}",
                n_max + 8
            )));
        }
        let tables: ModularTables<Dd> = ModularTables::build(order)?;
        let w = tables.lambda.inv()?;
        let mut powers = vec![w.clone()];
        for _ in 1..n_max {
            let next = powers.last().unwrap().mul(&w);
            powers.push(next);
        }
        let mut polys = Vec::with_capacity(n_max);
        let mut remainders = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let (p, r) = Self::eliminate(n, &powers)?;
            polys.push(p);
            remainders.push(r);
        }
        Ok(SnTable {
            tables,
            inv_lambda_powers: powers,
            polys,
            remainders,
        })
    }

    /// Table with the default order, enlarged when `n_max` needs more.
    pub fn with_default_order(n_max: usize) -> Result<Self> {
        Self::build(n_max, DEFAULT_TABLE_ORDER.max(n_max + 8))
    }

    fn eliminate(n: usize, powers: &[NomeSeries<Dd>]) -> Result<(SnPolynomial, NomeSeries<Dd>)> {
        let t = powers[0].truncation_order();
        let zero = Complex::new(Dd::ZERO, Dd::ZERO);
        let mut res = vec![zero; t + 1];
        res[0] = Complex::new(Dd::ONE, Dd::ZERO);
        let mut s = vec![zero; n];
        for k in (1..=n).rev() {
            let pk = &powers[k - 1];
            if pk.min_order() != -(k as i64) {
                return Err(HfError::AlgorithmError(format!(
                    "(1/λ)^{k} has pole order {} instead of {k}",
                    -pk.min_order()
                )));
            }
            let sk = res[n - k] / pk.coeffs()[0];
            s[k - 1] = sk;
            for (j, c) in pk.coeffs().iter().enumerate() {
                let idx = n - k + j;
                if idx > t {
                    break;
                }
                res[idx] -= sk * *c;
            }
        }
        let rem = NomeSeries::new(0, res[n..].to_vec())?;
        Ok((SnPolynomial { n, coeffs: s }, rem))
    }

    pub fn n_max(&self) -> usize {
        self.polys.len()
    }

    pub fn tables(&self) -> &ModularTables<Dd> {
        &self.tables
    }

    pub fn get(&self, n: usize) -> Result<&SnPolynomial> {
        if n == 0 || n > self.polys.len() {
            return Err(HfError::InvalidInput(format!(
                "S_{n} is outside the table range 1..={}",
                self.polys.len()
            )));
        }
        Ok(&self.polys[n - 1])
    }

    /// Remainder series `R_n(q) = q^{−n} − S_n(1/λ)` in nonnegative powers.
    pub fn remainder_series(&self, n: usize) -> Result<&NomeSeries<Dd>> {
        self.get(n)?;
        Ok(&self.remainders[n - 1])
    }

    /// Coefficients of `q^{−n} − S(1/λ)` at orders `−n..=−1` for an arbitrary
    /// candidate polynomial `S` of degree at most `n`.
    pub fn principal_part(&self, poly: &SnPolynomial, n: usize) -> Result<Vec<Cdd>> {
        if poly.n() > n || n > self.inv_lambda_powers.len() {
            return Err(HfError::InvalidInput(
                "candidate degree exceeds the available powers of 1/λ".into(),
            ));
        }
        let res = residual_vector(poly.coeffs(), n, &self.inv_lambda_powers);
        Ok(res[..n].to_vec())
    }

    /// `R_n(λ(τ)) = e^{−iπnτ'} − S_n(1/λ(τ'))`, where `τ'` is the
    /// representative of `τ` in the closure of `D_2Θ`.
    pub fn remainder(&self, n: usize, tau: C64) -> Result<C64> {
        Ok(self.remainder_with_error(n, tau)?.0)
    }

    /// The remainder together with an estimate of its absolute error.
    pub fn remainder_with_error(&self, n: usize, tau: C64) -> Result<(C64, f64)> {
        let poly = self.get(n)?;
        let t: Cdd = ModularTables::<Dd>::reduce_to_d2theta(from_c64(tau))?;
        let pi = Dd::PI;
        let nn = Dd::from_f64(n as f64);
        // e^{−iπnτ} = exp(πn Im τ − iπn Re τ)
        let e = crate::real::cexp(Complex::new(pi * nn * t.im, -(pi * nn * t.re)));
        let big = cabs_f64(e);

        let lam = self.tables.lambda_full(t)?;
        let w = Complex::new(Dd::ONE, Dd::ZERO) / lam.lambda;
        let direct = e - poly.eval(w);
        let direct_err = 1e-30 * (big + poly.majorant(cabs_f64(w))).max(1.0);

        let q = crate::modular::nome(t);
        if cabs_f64(q) < 0.5 {
            let sv = self.remainders[n - 1].eval(q)?;
            let series_err = sv.tail_bound + 1e-30 * big;
            if series_err < direct_err {
                return Ok((to_c64(sv.value), series_err));
            }
        }
        Ok((to_c64(direct), direct_err))
    }
}
