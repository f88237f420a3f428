//! Exponential Riordan matrices [g, f] over the rationals.

use crate::error::{Error, Result};
use crate::series::RationalSeries;
use rug::{Integer, Rational};

/// Dense lower-triangular table; row n holds entries 0..=n.
pub type Triangle = Vec<Vec<Rational>>;

/// n! as a rational.
pub fn factorial(n: usize) -> Rational {
    Rational::from(Integer::from(Integer::factorial(n as u32)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpRiordan {
    g: RationalSeries,
    f: RationalSeries,
    entries: Triangle,
}

impl ExpRiordan {
    /// Materializes rows 0..=size of [g, f]: b_{n,k} = n!·[z^n] g f^k / k!.
    pub fn build(g: &RationalSeries, f: &RationalSeries, size: usize) -> Result<Self> {
        if g.coeff(0).is_zero() {
            return Err(Error::Invalid("g(0) must be nonzero".into()));
        }
        if !f.coeff(0).is_zero() {
            return Err(Error::Invalid("f(0) must vanish".into()));
        }
        if f.order() == 0 || f.coeff(1).is_zero() {
            return Err(Error::Invalid("f'(0) must be nonzero".into()));
        }
        if g.order() < size || f.order() < size {
            return Err(Error::Invalid(format!("series order below matrix size {size}")));
        }
        let g = g.with_order(size);
        let f = f.with_order(size);
        let mut entries: Triangle = (0..=size).map(|n| vec![Rational::new(); n + 1]).collect();
        let mut col = g.clone();
        for k in 0..=size {
            for (n, row) in entries.iter_mut().enumerate().skip(k) {
                row[k] = Rational::from(col.coeff(n) * &factorial(n));
            }
            col = col.mul(&f)?.scale(&Rational::from((1, k as i64 + 1)));
        }
        Ok(Self { g, f, entries })
    }

    pub fn identity(size: usize) -> Self {
        Self::build(&RationalSeries::from_i64s(&[1], size), &RationalSeries::from_i64s(&[0, 1], size), size).expect("[1, z] is proper")
    }

    pub fn size(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn g(&self) -> &RationalSeries {
        &self.g
    }

    pub fn f(&self) -> &RationalSeries {
        &self.f
    }

    pub fn entries(&self) -> &Triangle {
        &self.entries
    }

    pub fn entry(&self, n: usize, k: usize) -> Rational {
        if k > n {
            Rational::new()
        } else {
            self.entries[n][k].clone()
        }
    }

    /// [g, f]·[h, ℓ] = [g·h(f), ℓ(f)].
    pub fn rmul(&self, o: &Self) -> Result<Self> {
        if self.size() != o.size() {
            return Err(Error::OrderMismatch(self.size(), o.size()));
        }
        let g = self.g.mul(&o.g.compose(&self.f)?)?;
        let f = o.f.compose(&self.f)?;
        Self::build(&g, &f, self.size())
    }

    /// [g, f]^{-1} = [1/g(f̄), f̄].
    pub fn rinv(&self) -> Result<Self> {
        let n = self.size();
        let fbar = self.f.reverse()?;
        let g = RationalSeries::from_i64s(&[1], n).div(&self.g.compose(&fbar)?)?;
        Self::build(&g, &fbar, n)
    }

    /// Production matrix from the horizontal pair c = (g'/g)∘f̄, r = f'∘f̄.
    ///
    /// The result is N×N for a matrix of size N, which is exactly what
    /// rows 0..=N of A determine.
    pub fn horizontal_pair(&self) -> Result<ProductionMatrix> {
        let n = self.size();
        if n == 0 {
            return Ok(ProductionMatrix { entries: vec![], c: vec![], r: vec![] });
        }
        let fbar = self.f.reverse()?.with_order(n - 1);
        let dg = self.g.derivative();
        let c = dg.div(&self.g.with_order(n - 1))?.compose(&fbar)?;
        let r = self.f.derivative().compose(&fbar)?;
        let c: Vec<Rational> = c.coeffs().to_vec();
        let r: Vec<Rational> = r.coeffs().to_vec();
        let mut entries = vec![vec![Rational::new(); n]; n];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, p) in row.iter_mut().enumerate().take((i + 2).min(n)) {
                let mut v = Rational::new();
                if j <= i {
                    v += &c[i - j];
                }
                if j >= 1 {
                    v += Rational::from(&r[i + 1 - j] * j as u32);
                }
                *p = v * factorial(i) / factorial(j);
            }
        }
        Ok(ProductionMatrix { entries, c, r })
    }

    /// P = A^{-1}·U·A truncated to N×N, computed by plain matrix algebra.
    pub fn production_by_linear_algebra(&self) -> Result<Vec<Vec<Rational>>> {
        let n = self.size();
        let inv = tri_inverse(&self.entries)?;
        let mut out = vec![vec![Rational::new(); n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, p) in row.iter_mut().enumerate() {
                let mut s = Rational::new();
                for k in j.saturating_sub(1)..=i {
                    // (U A)_{k,j} = a_{k+1,j}
                    let a = self.entry(k + 1, j);
                    if a.cmp0().is_ne() {
                        s += Rational::from(&inv[i][k] * &a);
                    }
                }
                *p = s;
            }
        }
        Ok(out)
    }

    /// Checks A·P = U·A on rows 0..N−1.
    pub fn stieltjes_holds(&self, p: &ProductionMatrix) -> bool {
        let n = self.size();
        if p.size() != n {
            return false;
        }
        (0..n).all(|i| {
            (0..=(i + 1).min(n)).all(|k| {
                let mut s = Rational::new();
                for j in k.saturating_sub(1)..=i {
                    if k < n {
                        s += Rational::from(&self.entries[i][j] * &p.entries[j][k]);
                    } else if j + 1 == k {
                        // column N of P is outside the truncation; its only
                        // contribution to row i is p_{i,i+1} = r_0 i!/(i+1)!·(i+1)
                        s += Rational::from(&self.entries[i][j] * &p.r[0]);
                    }
                }
                s == self.entry(i + 1, k)
            })
        })
    }

    /// Regenerates rows 1..=N from row 0 through a_{n+1,k} = Σ_i a_{n,i} p_{i,k}.
    pub fn row_recurrence(&self, p: &ProductionMatrix) -> Result<Self> {
        let n = self.size();
        if p.size() != n {
            return Err(Error::OrderMismatch(p.size(), n));
        }
        let mut entries: Triangle = vec![vec![self.entries[0][0].clone()]];
        for m in 0..n {
            let prev = &entries[m];
            let mut row = vec![Rational::new(); m + 2];
            for (k, out) in row.iter_mut().enumerate() {
                for (i, a) in prev.iter().enumerate().skip(k.saturating_sub(1)) {
                    *out += Rational::from(a * &p.get(i, k));
                }
            }
            entries.push(row);
        }
        Ok(Self { g: self.g.clone(), f: self.f.clone(), entries })
    }

    /// Ordinary conjugate E·A·E^{-1}: a_{n,k} = (k!/n!)·b_{n,k}.
    pub fn conjugate_ordinary(&self) -> Triangle {
        self.entries
            .iter()
            .enumerate()
            .map(|(n, row)| row.iter().enumerate().map(|(k, b)| Rational::from(b * &factorial(k)) / factorial(n)).collect())
            .collect()
    }

    /// Inverse of [`conjugate_ordinary`](Self::conjugate_ordinary) on a bare table.
    pub fn from_ordinary(t: &Triangle) -> Triangle {
        t.iter().enumerate().map(|(n, row)| row.iter().enumerate().map(|(k, a)| Rational::from(a * &factorial(n)) / factorial(k)).collect()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductionMatrix {
    /// Dense square table; p_{i,j} = 0 for j > i+1.
    pub entries: Vec<Vec<Rational>>,
    /// Ordinary coefficients of c(z).
    pub c: Vec<Rational>,
    /// Ordinary coefficients of r(z).
    pub r: Vec<Rational>,
}

impl ProductionMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// p_{i,j} from the pair, valid beyond the stored square where the pair allows.
    pub fn get(&self, i: usize, j: usize) -> Rational {
        if i < self.size() && j < self.size() {
            return self.entries[i][j].clone();
        }
        if j == i + 1 && !self.r.is_empty() {
            return self.r[0].clone() * Rational::from(j as u32) * factorial(i) / factorial(j);
        }
        Rational::new()
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().flatten().all(|p| *p.denom() == 1)
    }

    /// Integer entries, or an error if some entry is fractional.
    pub fn to_integers(&self) -> Result<Vec<Vec<Integer>>> {
        if !self.is_integral() {
            return Err(Error::Invalid("production matrix has non-integer entries".into()));
        }
        Ok(self.entries.iter().map(|row| row.iter().map(|p| p.numer().clone()).collect()).collect())
    }
}

/// Literal product of two lower-triangular tables of equal size.
pub fn tri_mul(a: &Triangle, b: &Triangle) -> Triangle {
    (0..a.len())
        .map(|n| {
            (0..=n)
                .map(|k| {
                    let mut s = Rational::new();
                    for j in k..=n {
                        s += Rational::from(&a[n][j] * &b[j][k]);
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Inverse of a lower-triangular table by forward substitution.
pub fn tri_inverse(a: &Triangle) -> Result<Triangle> {
    let n = a.len();
    let mut inv: Triangle = (0..n).map(|i| vec![Rational::new(); i + 1]).collect();
    for i in 0..n {
        if a[i][i].cmp0().is_eq() {
            return Err(Error::Invalid("singular triangular matrix".into()));
        }
        inv[i][i] = Rational::from(a[i][i].recip_ref());
        for j in (0..i).rev() {
            let mut s = Rational::new();
            for k in j..i {
                s += Rational::from(&a[i][k] * &inv[k][j]);
            }
            inv[i][j] = -s / &a[i][i];
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[i64], n: usize) -> RationalSeries {
        RationalSeries::from_i64s(v, n)
    }

    fn exp_series(scale: i64, n: usize) -> RationalSeries {
        s(&[0, scale], n).exp().unwrap()
    }

    fn binom(n: usize, k: usize) -> Rational {
        Rational::from(Integer::from(Integer::binomial_u(n as u32, k as u32)))
    }

    fn pascal(n: usize) -> ExpRiordan {
        ExpRiordan::build(&exp_series(1, n), &s(&[0, 1], n), n).unwrap()
    }

    #[test]
    fn identity_is_identity() {
        let i = ExpRiordan::identity(5);
        for n in 0..=5 {
            for k in 0..=n {
                assert_eq!(i.entry(n, k), if n == k { 1 } else { 0 });
            }
        }
    }

    #[test]
    fn pascal_entries() {
        let p = pascal(8);
        for n in 0..=8 {
            for k in 0..=n {
                assert_eq!(p.entry(n, k), binom(n, k));
            }
        }
    }

    #[test]
    fn pascal_squared_and_inverse() {
        let p = pascal(8);
        let p2 = p.rmul(&p).unwrap();
        let lit = tri_mul(p.entries(), p.entries());
        assert_eq!(p2.entries(), &lit);
        for n in 0..=8 {
            for k in 0..=n {
                assert_eq!(p2.entry(n, k), binom(n, k) * Rational::from(Integer::from(1) << (n - k) as u32));
            }
        }
        let inv = p.rinv().unwrap();
        for n in 0..=8 {
            for k in 0..=n {
                let sign = if (n - k) % 2 == 0 { 1 } else { -1 };
                assert_eq!(inv.entry(n, k), binom(n, k) * sign);
            }
        }
        assert_eq!(p.rmul(&ExpRiordan::identity(8)).unwrap(), p);
    }

    #[test]
    fn rejects_improper() {
        assert!(ExpRiordan::build(&s(&[0, 1], 3), &s(&[0, 1], 3), 3).is_err());
        assert!(ExpRiordan::build(&s(&[1], 3), &s(&[1, 1], 3), 3).is_err());
        assert!(ExpRiordan::build(&s(&[1], 3), &s(&[0, 0, 1], 3), 3).is_err());
    }

    #[test]
    fn pascal_production_is_bidiagonal() {
        let p = pascal(7);
        let pm = p.horizontal_pair().unwrap();
        assert_eq!(pm.c[0], 1);
        assert!(pm.c[1..].iter().all(|c| c.cmp0().is_eq()));
        assert_eq!(pm.r[0], 1);
        for i in 0..7 {
            for j in 0..7 {
                let want = if j == i || j == i + 1 { 1 } else { 0 };
                assert_eq!(pm.entries[i][j], want, "p[{i}][{j}]");
            }
        }
        assert!(p.stieltjes_holds(&pm));
        assert_eq!(p.production_by_linear_algebra().unwrap(), pm.entries);
        assert_eq!(p.row_recurrence(&pm).unwrap().entries(), p.entries());
    }

    #[test]
    fn ordinary_conjugation_round_trip() {
        let p = pascal(6);
        let o = p.conjugate_ordinary();
        assert_eq!(&ExpRiordan::from_ordinary(&o), p.entries());
        // [1, c z] conjugates to diag(1, c, c^2, ...)
        let d = ExpRiordan::build(&s(&[1], 5), &s(&[0, 6], 5), 5).unwrap().conjugate_ordinary();
        for n in 0..=5 {
            for k in 0..=n {
                let want = if n == k { Rational::from(6i64.pow(n as u32)) } else { Rational::new() };
                assert_eq!(d[n][k], want);
            }
        }
    }

    #[test]
    fn tri_inverse_round_trip() {
        let p = pascal(5);
        let inv = tri_inverse(p.entries()).unwrap();
        assert_eq!(&tri_mul(&inv, p.entries()), ExpRiordan::identity(5).entries());
    }
}
