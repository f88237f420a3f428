//! Truncated formal power series over exact rationals or multiprecision complex numbers.

use crate::error::{Error, Result};
use rug::{Complex, Rational};
use std::fmt;

/// Coefficient ring for [`TruncatedSeries`].
///
/// Constructors take `&self` as a template so that the complex backend can
/// carry its working precision along.
pub trait Coeff: Clone + fmt::Debug + PartialEq {
    fn zero_like(&self) -> Self;
    fn from_i64_like(&self, v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul_int(&self, k: i64) -> Self;
    fn div_int(&self, k: i64) -> Self;
    /// exp of a constant term; `None` when the result leaves the ring.
    fn exp_const(&self) -> Option<Self>;
    /// Principal log of a constant term; `None` when the result leaves the ring.
    fn ln_const(&self) -> Option<Self>;

    fn one_like(&self) -> Self {
        self.from_i64_like(1)
    }
}

impl Coeff for Rational {
    fn zero_like(&self) -> Self {
        Rational::new()
    }
    fn from_i64_like(&self, v: i64) -> Self {
        Rational::from(v)
    }
    fn is_zero(&self) -> bool {
        self.cmp0().is_eq()
    }
    fn add(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn div(&self, o: &Self) -> Self {
        Rational::from(self / o)
    }
    fn neg(&self) -> Self {
        Rational::from(-self)
    }
    fn mul_int(&self, k: i64) -> Self {
        Rational::from(self * k)
    }
    fn div_int(&self, k: i64) -> Self {
        Rational::from(self / k)
    }
    fn exp_const(&self) -> Option<Self> {
        self.is_zero().then(|| Rational::from(1))
    }
    fn ln_const(&self) -> Option<Self> {
        (*self == 1).then(Rational::new)
    }
}

impl Coeff for Complex {
    fn zero_like(&self) -> Self {
        Complex::new(self.prec())
    }
    fn from_i64_like(&self, v: i64) -> Self {
        Complex::with_val(self.prec(), v)
    }
    fn is_zero(&self) -> bool {
        self.real().is_zero() && self.imag().is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Complex::with_val(self.prec(), self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Complex::with_val(self.prec(), self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Complex::with_val(self.prec(), self * o)
    }
    fn div(&self, o: &Self) -> Self {
        Complex::with_val(self.prec(), self / o)
    }
    fn neg(&self) -> Self {
        Complex::with_val(self.prec(), -self)
    }
    fn mul_int(&self, k: i64) -> Self {
        Complex::with_val(self.prec(), self * k)
    }
    fn div_int(&self, k: i64) -> Self {
        Complex::with_val(self.prec(), self / k)
    }
    fn exp_const(&self) -> Option<Self> {
        Some(self.clone().exp())
    }
    fn ln_const(&self) -> Option<Self> {
        (!Coeff::is_zero(self)).then(|| self.clone().ln())
    }
}

/// Power series c_0 + c_1 z + ... + c_N z^N, exact modulo z^{N+1}.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<C> {
    coeffs: Vec<C>,
}

pub type RationalSeries = TruncatedSeries<Rational>;
pub type ComplexSeries = TruncatedSeries<Complex>;

impl<C: Coeff> TruncatedSeries<C> {
    /// Builds a series of the given order, padding with zeros or truncating.
    /// `coeffs` must be non-empty (the first entry is the zero template).
    pub fn new(mut coeffs: Vec<C>, order: usize) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least one coefficient");
        let z = coeffs[0].zero_like();
        coeffs.resize(order + 1, z);
        Self { coeffs }
    }

    pub fn zero_from(like: &C, order: usize) -> Self {
        Self::new(vec![like.zero_like()], order)
    }

    pub fn constant(c: C, order: usize) -> Self {
        Self::new(vec![c], order)
    }

    /// The series z.
    pub fn identity_from(like: &C, order: usize) -> Self {
        Self::new(vec![like.zero_like(), like.one_like()], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &C {
        &self.coeffs[k]
    }

    fn zero_c(&self) -> C {
        self.coeffs[0].zero_like()
    }

    pub fn with_order(&self, order: usize) -> Self {
        Self::new(self.coeffs.clone(), order)
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.order() != o.order() {
            return Err(Error::OrderMismatch(self.order(), o.order()));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(Self { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect() })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(Self { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub(b)).collect() })
    }

    pub fn neg(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(Coeff::neg).collect() }
    }

    pub fn scale(&self, c: &C) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a.mul(c)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let n = self.order();
        let mut out = vec![self.zero_c(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs[..=n - i].iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Ok(Self { coeffs: out })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let d0 = &o.coeffs[0];
        if d0.is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let n = self.order();
        let mut q: Vec<C> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..=k {
                acc = acc.sub(&o.coeffs[j].mul(&q[k - j]));
            }
            q.push(acc.div(d0));
        }
        Ok(Self { coeffs: q })
    }

    /// Formal derivative; the result has order N−1 (order 0 stays 0).
    pub fn derivative(&self) -> Self {
        let n = self.order();
        if n == 0 {
            return Self::zero_from(&self.coeffs[0], 0);
        }
        let coeffs = (1..=n).map(|k| self.coeffs[k].mul_int(k as i64)).collect();
        Self { coeffs }
    }

    /// Antiderivative with zero constant term; the result has order N+1.
    pub fn integral(&self) -> Self {
        let mut coeffs = vec![self.zero_c()];
        coeffs.extend(self.coeffs.iter().enumerate().map(|(k, c)| c.div_int(k as i64 + 1)));
        Self { coeffs }
    }

    /// exp(s). The rational backend only represents s(0) = 0.
    pub fn exp(&self) -> Result<Self> {
        let e0 = self.coeffs[0].exp_const().ok_or(Error::Unrepresentable("exp of a nonzero rational"))?;
        let n = self.order();
        let mut e = vec![e0];
        for k in 1..=n {
            let mut acc = self.zero_c();
            for j in 1..=k {
                acc = acc.add(&self.coeffs[j].mul_int(j as i64).mul(&e[k - j]));
            }
            e.push(acc.div_int(k as i64));
        }
        Ok(Self { coeffs: e })
    }

    /// Principal log(s). Needs s(0) ≠ 0; the rational backend needs s(0) = 1.
    pub fn log(&self) -> Result<Self> {
        let s0 = &self.coeffs[0];
        if s0.is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let l0 = s0.ln_const().ok_or(Error::Unrepresentable("log of a rational other than 1"))?;
        let n = self.order();
        let mut l = vec![l0];
        for k in 1..=n {
            let mut acc = self.coeffs[k].mul_int(k as i64);
            for j in 1..k {
                acc = acc.sub(&l[j].mul_int(j as i64).mul(&self.coeffs[k - j]));
            }
            l.push(acc.div(s0).div_int(k as i64));
        }
        Ok(Self { coeffs: l })
    }

    /// self ∘ inner by Horner's rule; inner(0) must be 0.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.check(inner)?;
        if !inner.coeffs[0].is_zero() {
            return Err(Error::NonzeroInnerConstant);
        }
        let n = self.order();
        let mut acc = Self::constant(self.coeffs[n].clone(), n);
        for k in (0..n).rev() {
            acc = acc.mul(inner)?;
            acc.coeffs[0] = acc.coeffs[0].add(&self.coeffs[k]);
        }
        Ok(acc)
    }

    /// Compositional inverse by Newton iteration on f(g) = z.
    pub fn reverse(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonzeroInnerConstant);
        }
        let n = self.order();
        if n == 0 {
            return Ok(self.clone());
        }
        let f1 = &self.coeffs[1];
        if f1.is_zero() {
            return Err(Error::ZeroLinearTerm);
        }
        let df = self.derivative();
        let mut g = Self::new(vec![self.zero_c(), f1.one_like().div(f1)], 1);
        let mut m = 1;
        while m < n {
            m = (2 * m).min(n);
            g = g.with_order(m);
            let f = self.with_order(m);
            let fg = f.compose(&g)?;
            let dfg = df.with_order(m).compose(&g)?;
            let resid = fg.sub(&Self::identity_from(&g.coeffs[0], m))?;
            g = g.sub(&resid.div(&dfg)?)?;
        }
        Ok(g)
    }

    /// Evaluates the truncated polynomial at `x`.
    pub fn eval(&self, x: &C) -> C {
        let mut acc = self.zero_c();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }
}

impl RationalSeries {
    pub fn from_i64s(v: &[i64], order: usize) -> Self {
        let mut c: Vec<Rational> = v.iter().map(|&x| Rational::from(x)).collect();
        if c.is_empty() {
            c.push(Rational::new());
        }
        Self::new(c, order)
    }

    /// Series from exponential-generating coefficients: c_k = v_k / k!.
    pub fn from_egf(v: &[Rational], order: usize) -> Self {
        let mut fact = Rational::from(1);
        let mut out = Vec::with_capacity(v.len());
        for (k, x) in v.iter().enumerate() {
            if k > 0 {
                fact *= k as u32;
            }
            out.push(Rational::from(x / &fact));
        }
        if out.is_empty() {
            out.push(Rational::new());
        }
        Self::new(out, order)
    }

    /// k!·c_k for each k.
    pub fn egf_coeffs(&self) -> Vec<Rational> {
        let mut fact = Rational::from(1);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact *= k as u32;
                }
                Rational::from(c * &fact)
            })
            .collect()
    }

    pub fn to_complex(&self, prec: u32) -> ComplexSeries {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|c| Complex::with_val(prec, c)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: &[i64], n: usize) -> RationalSeries {
        RationalSeries::from_i64s(v, n)
    }

    fn q(p: i64, d: i64) -> Rational {
        Rational::from((p, d))
    }

    #[test]
    fn difference_of_squares() {
        let p = r(&[1, 1], 5).mul(&r(&[1, -1], 5)).unwrap();
        assert_eq!(p, r(&[1, 0, -1], 5));
    }

    #[test]
    fn geometric() {
        let g = r(&[1], 7).div(&r(&[1, -1], 7)).unwrap();
        assert!(g.coeffs().iter().all(|c| *c == 1));
    }

    #[test]
    fn q_over_q_minus() {
        // (1+z)^2/(1-z)^2 by hand long division
        let g = r(&[1, 2, 1], 6).div(&r(&[1, -2, 1], 6)).unwrap();
        assert_eq!(g, r(&[1, 4, 8, 12, 16, 20, 24], 6));
    }

    #[test]
    fn div_by_zero_constant() {
        assert_eq!(r(&[1], 3).div(&r(&[0, 1], 3)), Err(Error::ZeroConstantTerm));
    }

    #[test]
    fn log_geometric() {
        let g = r(&[1], 8).div(&r(&[1, -1], 8)).unwrap();
        let l = g.log().unwrap();
        for k in 1..=8 {
            assert_eq!(*l.coeff(k), q(1, k as i64));
        }
        assert!(l.coeff(0).is_zero());
    }

    #[test]
    fn exp_z() {
        let e = r(&[0, 1], 6).exp().unwrap();
        let mut f = 1i64;
        for k in 0..=6 {
            if k > 0 {
                f *= k as i64;
            }
            assert_eq!(*e.coeff(k), q(1, f));
        }
    }

    #[test]
    fn exp_of_nonzero_rational_constant_is_refused() {
        assert!(matches!(r(&[1, 1], 3).exp(), Err(Error::Unrepresentable(_))));
        assert!(matches!(r(&[2, 1], 3).log(), Err(Error::Unrepresentable(_))));
        assert_eq!(r(&[0, 1], 3).log(), Err(Error::ZeroConstantTerm));
    }

    #[test]
    fn artanh_from_log_ratio() {
        // a=b=1: (1/4) log((1+z)^2/(1-z)^2) = artanh z
        let ratio = r(&[1, 2, 1], 9).div(&r(&[1, -2, 1], 9)).unwrap();
        let f = ratio.log().unwrap().scale(&q(1, 4));
        for k in 0..=9 {
            let want = if k % 2 == 1 { q(1, k as i64) } else { q(0, 1) };
            assert_eq!(*f.coeff(k), want);
        }
        // its reverse is tanh z
        let t = f.reverse().unwrap();
        assert_eq!(*t.coeff(3), q(-1, 3));
        assert_eq!(*t.coeff(5), q(2, 15));
    }

    #[test]
    fn compose_substitution() {
        let g = r(&[1], 8).div(&r(&[1, -1], 8)).unwrap();
        let s = g.compose(&r(&[0, 0, 1], 8)).unwrap();
        for k in 0..=8 {
            assert_eq!(*s.coeff(k), if k % 2 == 0 { 1 } else { 0 });
        }
        assert_eq!(g.compose(&r(&[1, 1], 8)), Err(Error::NonzeroInnerConstant));
    }

    #[test]
    fn bell_numbers() {
        let n = 4;
        let inner = r(&[0, 1], n).exp().unwrap().sub(&r(&[1], n)).unwrap();
        let b = r(&[0, 1], n).exp().unwrap().compose(&inner).unwrap();
        let bell: Vec<i64> = b.egf_coeffs().iter().map(|c| c.to_f64() as i64).collect();
        assert_eq!(bell, vec![1, 1, 2, 5, 15]);
    }

    #[test]
    fn catalan_reversion() {
        let g = r(&[0, 1, -1], 6).reverse().unwrap();
        assert_eq!(g, r(&[0, 1, 1, 2, 5, 14, 42], 6));
        assert_eq!(g.reverse().unwrap(), r(&[0, 1, -1], 6));
        assert_eq!(r(&[0, 0, 1], 4).reverse(), Err(Error::ZeroLinearTerm));
    }

    #[test]
    fn complex_backend_log_of_constant() {
        let s = r(&[2, 1], 5).to_complex(128);
        let l = s.log().unwrap();
        let e = l.exp().unwrap();
        for k in 0..=5 {
            let d = Complex::with_val(128, e.coeff(k) - s.coeff(k));
            assert!(d.abs().real().to_f64() < 1e-30);
        }
    }

    #[test]
    fn derivative_and_integral() {
        let s = r(&[5, 1, 2, 3], 3);
        assert_eq!(s.derivative(), r(&[1, 4, 9], 2));
        assert_eq!(s.derivative().integral(), r(&[0, 1, 2, 3], 3));
    }
}
