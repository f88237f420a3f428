//! The Sheffer family generated by Q(z)^x Q(−z)^{1−x} for quadratic Q.

use crate::combinat::{stirling_triangle, StirlingKind};
use crate::error::{Error, Result};
use crate::riordan::{ExpRiordan, Triangle};
use crate::series::RationalSeries;
use rug::ops::Pow;
use rug::{Complex, Rational};
use serde::Serialize;

/// Series order used for an `nmax`-row computation.
pub fn default_order(nmax: usize) -> usize {
    2 * nmax + 2
}

/// Quadratic Q, either (1+az)(1+bz) or (z1−z)(z2−z).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum QuadraticQ {
    Ab {
        #[serde(serialize_with = "crate::fmt::ser_rational")]
        a: Rational,
        #[serde(serialize_with = "crate::fmt::ser_rational")]
        b: Rational,
    },
    Roots {
        #[serde(serialize_with = "crate::fmt::ser_rational")]
        z1: Rational,
        #[serde(serialize_with = "crate::fmt::ser_rational")]
        z2: Rational,
    },
}

impl QuadraticQ {
    /// Integer (a, b) form with a, b > 0.
    pub fn ab(a: i64, b: i64) -> Result<Self> {
        if a <= 0 || b <= 0 {
            return Err(Error::Invalid(format!("need a, b > 0, got ({a}, {b})")));
        }
        Ok(Self::Ab { a: a.into(), b: b.into() })
    }

    /// Rational (a, b) form; only a + b ≠ 0 is required.
    pub fn ab_rational(a: Rational, b: Rational) -> Result<Self> {
        if Rational::from(&a + &b).cmp0().is_eq() {
            return Err(Error::Invalid("Q'(0) = a + b must be nonzero".into()));
        }
        Ok(Self::Ab { a, b })
    }

    /// Root form with z2 > z1 > 0.
    pub fn roots(z1: Rational, z2: Rational) -> Result<Self> {
        if z1.cmp0().is_le() || z2 <= z1 {
            return Err(Error::Invalid(format!("need z2 > z1 > 0, got ({z1}, {z2})")));
        }
        Ok(Self::Roots { z1, z2 })
    }

    /// Coefficients (Q(0), Q'(0), Q''(0)/2).
    pub fn poly(&self) -> [Rational; 3] {
        match self {
            Self::Ab { a, b } => [Rational::from(1), Rational::from(a + b), Rational::from(a * b)],
            Self::Roots { z1, z2 } => [Rational::from(z1 * z2), -Rational::from(z1 + z2), Rational::from(1)],
        }
    }

    /// (a, b), failing on the root form.
    pub fn ab_params(&self) -> Result<(&Rational, &Rational)> {
        match self {
            Self::Ab { a, b } => Ok((a, b)),
            Self::Roots { .. } => Err(Error::Invalid("operation needs the (a, b) form".into())),
        }
    }

    /// (z1, z2), failing on the (a, b) form.
    pub fn root_params(&self) -> Result<(&Rational, &Rational)> {
        match self {
            Self::Roots { z1, z2 } => Ok((z1, z2)),
            Self::Ab { .. } => Err(Error::Invalid("operation needs the (z1, z2) form".into())),
        }
    }

    /// Q(sz) as a series of the given order.
    pub fn series(&self, sign: i64, order: usize) -> RationalSeries {
        let [c0, c1, c2] = self.poly();
        RationalSeries::new(vec![c0, c1 * sign, c2], order.max(2)).with_order(order)
    }

    /// ln(Q(z)/Q(−z)).
    pub fn log_ratio(&self, order: usize) -> Result<RationalSeries> {
        self.series(1, order).div(&self.series(-1, order))?.log()
    }
}

/// Polynomial in x with exact rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolyInX {
    #[serde(serialize_with = "crate::fmt::ser_rationals")]
    coeffs: Vec<Rational>,
}

impl PolyInX {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.cmp0().is_eq()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64s(v: &[i64]) -> Self {
        Self::new(v.iter().map(|&c| Rational::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_complex(&self, x: &Complex) -> Complex {
        let mut acc = Complex::new(x.prec());
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// p(1 − x).
    pub fn reflect(&self) -> Self {
        // Horner with the linear polynomial 1 − x
        let mut acc: Vec<Rational> = vec![];
        for c in self.coeffs.iter().rev() {
            let mut next = vec![Rational::new(); acc.len() + 1];
            for (k, a) in acc.iter().enumerate() {
                next[k] += a;
                next[k + 1] -= a;
            }
            next[0] += c;
            acc = next;
        }
        Self::new(acc)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| Rational::from(c * s)).collect())
    }

    /// Converts falling-factorial coefficients Σ c_k (x)_k to the power basis.
    pub fn from_falling(c: &[Rational]) -> Self {
        let s = stirling_triangle(StirlingKind::FirstUnsigned, c.len().saturating_sub(1));
        let mut out = vec![Rational::new(); c.len()];
        for (k, ck) in c.iter().enumerate() {
            for (j, sj) in s[k].iter().enumerate() {
                let term = Rational::from(ck * sj);
                if (k + j) % 2 == 0 {
                    out[j] += term;
                } else {
                    out[j] -= term;
                }
            }
        }
        Self::new(out)
    }

    /// Coefficients in the falling-factorial basis.
    pub fn to_falling(&self) -> Vec<Rational> {
        let n = self.coeffs.len();
        let s = stirling_triangle(StirlingKind::Second, n.saturating_sub(1));
        let mut out = vec![Rational::new(); n];
        for (j, cj) in self.coeffs.iter().enumerate() {
            for (k, sk) in s[j].iter().enumerate() {
                out[k] += Rational::from(cj * sk);
            }
        }
        out
    }
}

/// Coefficient matrix A = [Q(−z), ln(Q(z)/Q(−z))]; row n holds H_n.
pub fn coefficient_matrix(q: &QuadraticQ, nmax: usize) -> Result<ExpRiordan> {
    let order = default_order(nmax);
    ExpRiordan::build(&q.series(-1, order), &q.log_ratio(order)?, nmax)
}

/// Â = [Q(z), ln(Q(z)/Q(−z))].
pub fn coefficient_matrix_hat(q: &QuadraticQ, nmax: usize) -> Result<ExpRiordan> {
    let order = default_order(nmax);
    ExpRiordan::build(&q.series(1, order), &q.log_ratio(order)?, nmax)
}

/// H_n(x).
pub fn h_poly(q: &QuadraticQ, n: usize) -> Result<PolyInX> {
    Ok(PolyInX::new(coefficient_matrix(q, n)?.entries()[n].clone()))
}

/// H_0..=H_nmax.
pub fn h_polys(q: &QuadraticQ, nmax: usize) -> Result<Vec<PolyInX>> {
    Ok(coefficient_matrix(q, nmax)?.entries().iter().map(|r| PolyInX::new(r.clone())).collect())
}

fn two_sum(q: &QuadraticQ) -> Result<Rational> {
    let (a, b) = q.ab_params()?;
    Ok(Rational::from(a + b) * 2u32)
}

/// Â = L_Q·D with D = [1, 2(a+b)z] diagonal and L_Q unit lower triangular.
pub fn lq_decomposition(q: &QuadraticQ, nmax: usize) -> Result<(ExpRiordan, ExpRiordan)> {
    let s = two_sum(q)?;
    let order = default_order(nmax);
    let f = q.log_ratio(order)?.scale(&Rational::from(s.recip_ref()));
    let lq = ExpRiordan::build(&q.series(1, order), &f, nmax)?;
    let d = ExpRiordan::build(&RationalSeries::from_i64s(&[1], order), &RationalSeries::new(vec![Rational::new(), s], order), nmax)?;
    Ok((lq, d))
}

/// Both sides of [x^k]H_n = (−1)^{n+k}(2a+2b)^k q_{n,k}.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffRelation {
    pub holds: bool,
    pub lhs: Rational,
    pub rhs: Rational,
}

pub fn coeff_relation_check(q: &QuadraticQ, n: usize, k: usize) -> Result<CoeffRelation> {
    if k > n {
        return Err(Error::Invalid(format!("need k ≤ n, got k={k}, n={n}")));
    }
    let s = two_sum(q)?;
    let lhs = coefficient_matrix(q, n)?.entry(n, k);
    let (lq, _) = lq_decomposition(q, n)?;
    let mut rhs = lq.entry(n, k) * Rational::from(s.pow(k as i32));
    if (n + k) % 2 == 1 {
        rhs = -rhs;
    }
    Ok(CoeffRelation { holds: lhs == rhs, lhs, rhs })
}

/// C = [Q(−z), Q(z)/Q(−z) − 1].
pub fn c_matrix(q: &QuadraticQ, nmax: usize) -> Result<ExpRiordan> {
    q.ab_params()?;
    let order = default_order(nmax);
    let f = q.series(1, order).div(&q.series(-1, order))?.sub(&RationalSeries::from_i64s(&[1], order))?;
    ExpRiordan::build(&q.series(-1, order), &f, nmax)
}

/// c_{n,0..=n}: coefficients of H_n in the falling-factorial basis.
pub fn falling_factorial_coeffs(q: &QuadraticQ, n: usize) -> Result<Vec<Rational>> {
    Ok(c_matrix(q, n)?.entries()[n].clone())
}

/// c_{n,k} from the three-term recurrence and its initial values.
pub fn c_recurrence(q: &QuadraticQ, nmax: usize) -> Result<Triangle> {
    let (a, b) = q.ab_params()?;
    let s = Rational::from(a + b);
    let p = Rational::from(a * b);
    let mut c: Triangle = (0..=nmax).map(|n| vec![Rational::new(); n + 1]).collect();
    c[0][0] = Rational::from(1);
    if nmax >= 1 {
        c[1][0] = -s.clone();
        c[1][1] = Rational::from(&s * 2u32);
    }
    if nmax >= 2 {
        c[2][0] = Rational::from(&p * 2u32);
    }
    for n in 2..=nmax {
        for k in 1..=n {
            let mut v = Rational::from(&s * 2u32) * &c[n - 1][k - 1];
            if k < n {
                v += Rational::from((n + k - 2) as u32) * &s * &c[n - 1][k];
            }
            if k + 2 <= n {
                let w = Rational::from((n - 1) as i64 * (n as i64 + 2 * k as i64 - 4));
                v -= w * &p * &c[n - 2][k];
            }
            c[n][k] = v;
        }
    }
    Ok(c)
}

/// Leading coefficient (2(a+b))^n of H_n in the (a, b) form.
pub fn leading_coeff(q: &QuadraticQ, n: usize) -> Result<Rational> {
    Ok(two_sum(q)?.pow(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: i64) -> Rational {
        Rational::from(v)
    }

    #[test]
    fn printed_low_polynomials() {
        for (a, b) in [(1, 1), (1, 2), (2, 3)] {
            let q = QuadraticQ::ab(a, b).unwrap();
            let h = h_polys(&q, 3).unwrap();
            let s = a + b;
            assert_eq!(h[0], PolyInX::from_i64s(&[1]));
            assert_eq!(h[1], PolyInX::from_i64s(&[-s, 2 * s]));
            assert_eq!(h[2], PolyInX::from_i64s(&[2 * a * b, -4 * s * s, 4 * s * s]));
            let c = 4 * s * s * s;
            assert_eq!(h[3], PolyInX::from_i64s(&[0, c, -3 * c, 2 * c]));
        }
    }

    #[test]
    fn lq_row_four_for_unit_pair() {
        let (lq, d) = lq_decomposition(&QuadraticQ::ab(1, 1).unwrap(), 4).unwrap();
        let row: Vec<Rational> = lq.entries()[4].clone();
        assert_eq!(row, [0, 16, 20, 8, 1].map(r));
        for n in 0..=4 {
            assert_eq!(d.entry(n, n), r(4i64.pow(n as u32)));
        }
    }

    #[test]
    fn hat_is_lq_times_d() {
        let q = QuadraticQ::ab(2, 3).unwrap();
        let (lq, d) = lq_decomposition(&q, 7).unwrap();
        let hat = coefficient_matrix_hat(&q, 7).unwrap();
        assert_eq!(lq.rmul(&d).unwrap().entries(), hat.entries());
    }

    #[test]
    fn coefficient_relation_examples() {
        let q = QuadraticQ::ab(2, 3).unwrap();
        let c = coeff_relation_check(&q, 2, 0).unwrap();
        assert!(c.holds);
        assert_eq!(c.lhs, 12);
        let c = coeff_relation_check(&q, 3, 1).unwrap();
        assert!(c.holds);
        assert_eq!(c.lhs, 4 * 125);
    }

    #[test]
    fn c_matrix_rows() {
        let q = QuadraticQ::ab(1, 2).unwrap();
        let c = c_matrix(&q, 4).unwrap();
        assert_eq!(c.entries()[1], vec![r(-3), r(6)]);
        assert_eq!(c.entries()[3], vec![r(0), r(0), r(12 * 27), r(8 * 27)]);
        assert_eq!(c.entry(4, 2), r(48 * 9 * 7));
    }

    #[test]
    fn falling_basis_round_trip() {
        let q = QuadraticQ::ab(1, 2).unwrap();
        for n in 0..=6 {
            let h = h_poly(&q, n).unwrap();
            let c = falling_factorial_coeffs(&q, n).unwrap();
            assert_eq!(PolyInX::from_falling(&c), h);
            assert_eq!(h.to_falling()[..], c[..h.coeffs().len()]);
        }
        // n = 2 at x = 5 against (x)_k evaluated directly
        let c = falling_factorial_coeffs(&q, 2).unwrap();
        let direct = c[0].clone() + c[1].clone() * 5 + c[2].clone() * 20;
        assert_eq!(h_poly(&q, 2).unwrap().eval(&r(5)), direct);
    }

    #[test]
    fn recurrence_matches_c_matrix() {
        let q = QuadraticQ::ab(1, 3).unwrap();
        let c = c_matrix(&q, 12).unwrap();
        assert_eq!(&c_recurrence(&q, 12).unwrap(), c.entries());
    }

    #[test]
    fn root_form_is_scaled_ab_form() {
        let (z1, z2) = (r(2), r(5));
        let qz = QuadraticQ::roots(z1.clone(), z2.clone()).unwrap();
        let qab = QuadraticQ::ab_rational(Rational::from((-1, 2)), Rational::from((-1, 5))).unwrap();
        let az = coefficient_matrix(&qz, 8).unwrap();
        let aab = coefficient_matrix(&qab, 8).unwrap();
        for n in 0..=8 {
            for k in 0..=n {
                assert_eq!(az.entry(n, k), aab.entry(n, k) * r(10));
            }
        }
    }

    #[test]
    fn reflection_of_linear() {
        let p = PolyInX::from_i64s(&[3, 2]);
        assert_eq!(p.reflect(), PolyInX::from_i64s(&[5, -2]));
    }

    #[test]
    fn validity_gates() {
        assert!(QuadraticQ::ab(0, 1).is_err());
        assert!(QuadraticQ::roots(r(3), r(1)).is_err());
        assert!(QuadraticQ::roots(r(1), r(1)).is_err());
        assert!(QuadraticQ::ab_rational(r(1), r(-1)).is_err());
        let qz = QuadraticQ::roots(r(1), r(3)).unwrap();
        assert!(lq_decomposition(&qz, 3).is_err());
    }
}
