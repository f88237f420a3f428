//! Stirling numbers, the marked generating tree, and weighted lattice paths.

use crate::error::{Error, Result};
use crate::riordan::{ExpRiordan, ProductionMatrix, Triangle};
use crate::series::RationalSeries;
use crate::sheffer::{PolyInX, QuadraticQ};
use rug::{Integer, Rational};
use serde::Serialize;
use std::collections::BTreeMap;

/// Deepest level the explicit tree expansion will build.
pub const MAX_TREE_DEPTH: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StirlingKind {
    Second,
    /// s(n,k) with sign (−1)^{n−k}, so that (x)_n = Σ s(n,k) x^k.
    FirstSigned,
    /// Number of permutations of n elements with k cycles.
    FirstUnsigned,
}

/// Rows 0..=nmax of the chosen Stirling triangle.
pub fn stirling_triangle(kind: StirlingKind, nmax: usize) -> Vec<Vec<Integer>> {
    let mut t: Vec<Vec<Integer>> = vec![vec![Integer::from(1)]];
    for n in 1..=nmax {
        let prev = &t[n - 1];
        let at = |k: usize| prev.get(k).cloned().unwrap_or_default();
        let row = (0..=n)
            .map(|k| {
                let left = if k == 0 { Integer::new() } else { at(k - 1) };
                match kind {
                    StirlingKind::Second => left + at(k) * k as u32,
                    StirlingKind::FirstUnsigned => left + at(k) * (n - 1) as u32,
                    StirlingKind::FirstSigned => left - at(k) * (n - 1) as u32,
                }
            })
            .collect();
        t.push(row);
    }
    t
}

/// A single Stirling number; zero when k > n.
pub fn stirling(n: usize, k: usize, kind: StirlingKind) -> Integer {
    if k > n {
        return Integer::new();
    }
    stirling_triangle(kind, n)[n][k].clone()
}

/// [1, e^z − 1], whose entries are S(n,k).
pub fn stirling_second_matrix(size: usize) -> ExpRiordan {
    let ez = RationalSeries::from_i64s(&[0, 1], size).exp().expect("exp of z");
    let f = ez.sub(&RationalSeries::from_i64s(&[1], size)).expect("same order");
    ExpRiordan::build(&RationalSeries::from_i64s(&[1], size), &f, size).expect("proper")
}

/// [1, ln(1+z)], whose entries are the signed s(n,k).
pub fn stirling_first_matrix(size: usize) -> ExpRiordan {
    let f = RationalSeries::from_i64s(&[1, 1], size).log().expect("log of 1+z");
    ExpRiordan::build(&RationalSeries::from_i64s(&[1], size), &f, size).expect("proper")
}

/// Node counts at one level of the marked generating tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarkedLevel {
    pub level: usize,
    pub unmarked: BTreeMap<usize, u64>,
    pub marked: BTreeMap<usize, u64>,
}

impl MarkedLevel {
    /// μ_n(k) − μ_n(k̄), i.e. the count after annihilation.
    pub fn net(&self, k: usize) -> i128 {
        let u = self.unmarked.get(&k).copied().unwrap_or(0) as i128;
        let m = self.marked.get(&k).copied().unwrap_or(0) as i128;
        u - m
    }

    pub fn total(&self) -> u64 {
        self.unmarked.values().chain(self.marked.values()).sum()
    }
}

/// Expands the tree rooted at (0) level by level, keeping every node.
///
/// Node (k) has |p_{k,j}| children labelled j, carrying the parent's mark
/// when p_{k,j} > 0 and the opposite mark when p_{k,j} < 0.
pub fn tree_levels(p: &ProductionMatrix, depth: usize) -> Result<Vec<MarkedLevel>> {
    if depth > MAX_TREE_DEPTH {
        return Err(Error::Invalid(format!("explicit tree depth is capped at {MAX_TREE_DEPTH}")));
    }
    if depth > p.size() {
        return Err(Error::Invalid(format!("production matrix of size {} cannot reach depth {depth}", p.size())));
    }
    // parents above the last level carry labels below `depth`
    let rules: Vec<Vec<(usize, i64)>> = (0..depth)
        .map(|k| {
            (0..=k + 1)
                .map(|j| (j, p.get(k, j)))
                .filter(|(_, v)| v.cmp0().is_ne())
                .map(|(j, v)| {
                    if *v.denom() != 1 {
                        return Err(Error::Invalid(format!("production entry p_{{{k},{j}}} = {v} is not an integer")));
                    }
                    v.numer().to_i64().map(|v| (j, v)).ok_or_else(|| Error::Invalid("production entry exceeds i64".into()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut nodes: Vec<(u8, bool)> = vec![(0, false)];
    let mut levels = vec![count(0, &nodes)];
    for level in 1..=depth {
        let mut next = Vec::new();
        for &(k, marked) in &nodes {
            for &(j, v) in &rules[k as usize] {
                let child = (j as u8, marked ^ (v < 0));
                next.extend(std::iter::repeat(child).take(v.unsigned_abs() as usize));
            }
        }
        nodes = next;
        levels.push(count(level, &nodes));
    }
    Ok(levels)
}

fn count(level: usize, nodes: &[(u8, bool)]) -> MarkedLevel {
    let mut unmarked = BTreeMap::new();
    let mut marked = BTreeMap::new();
    for &(k, m) in nodes {
        *if m { &mut marked } else { &mut unmarked }.entry(k as usize).or_insert(0) += 1;
    }
    MarkedLevel { level, unmarked, marked }
}

/// Rows R_0..=R_nmax of R_i = R_{i−1}·P with R_0 = (1, 0, ...).
pub fn vector_recurrence(p: &ProductionMatrix, nmax: usize) -> Triangle {
    let mut rows: Triangle = vec![vec![Rational::from(1)]];
    for i in 1..=nmax {
        let prev = &rows[i - 1];
        let row = (0..=i)
            .map(|k| {
                let mut s = Rational::new();
                for (j, r) in prev.iter().enumerate().skip(k.saturating_sub(1)) {
                    s += Rational::from(r * &p.get(j, k));
                }
                s
            })
            .collect();
        rows.push(row);
    }
    rows
}

/// σ(n,k) table of weighted lattice paths.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathTable {
    #[serde(serialize_with = "crate::fmt::ser_triangle")]
    pub sigma: Triangle,
}

impl PathTable {
    pub fn get(&self, n: usize, k: usize) -> Rational {
        self.sigma.get(n).and_then(|r| r.get(k)).cloned().unwrap_or_default()
    }
}

/// Sums path weights with steps U, H, H² weighted by their arrival point (n, k):
/// ω(U) = 2(a+b), ω(H) = (n+k−2)(a+b), ω(H²) = −(n−1)(n+2k−4)ab.
pub fn lattice_sigma(q: &QuadraticQ, nmax: usize) -> Result<PathTable> {
    let (a, b) = q.ab_params()?;
    let s = Rational::from(a + b);
    let ab = Rational::from(a * b);
    let up = Rational::from(&s * 2u32);
    let mut t: Triangle = (0..=nmax).map(|n| vec![Rational::new(); n + 1]).collect();
    t[0][0] = Rational::from(1);
    for n in 1..=nmax {
        for k in 0..=n {
            let mut v = Rational::new();
            if k >= 1 {
                v += Rational::from(&up * &t[n - 1][k - 1]);
            }
            if k < n {
                v += Rational::from(n as i64 + k as i64 - 2) * &s * &t[n - 1][k];
            }
            if n >= 2 && k + 2 <= n {
                v -= Rational::from((n as i64 - 1) * (n as i64 + 2 * k as i64 - 4)) * &ab * &t[n - 2][k];
            }
            t[n][k] = v;
        }
    }
    Ok(PathTable { sigma: t })
}

/// [x^k]H_n = Σ_i (−1)^{i+k} σ(n,i) s(i,k) with unsigned s.
pub fn hn_from_sigma(q: &QuadraticQ, n: usize) -> Result<PolyInX> {
    let t = lattice_sigma(q, n)?;
    Ok(PolyInX::from_falling(&t.sigma[n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sheffer::{c_matrix, h_poly, lq_decomposition};

    fn set_partitions(n: usize, k: usize) -> u64 {
        // restricted growth strings
        fn go(i: usize, n: usize, used: usize, k: usize) -> u64 {
            if i == n {
                return (used == k) as u64;
            }
            (0..=used.min(k - 1)).map(|b| go(i + 1, n, used.max(b + 1), k)).sum()
        }
        go(0, n, 0, k)
    }

    fn cycles(perm: &[usize]) -> usize {
        let mut seen = vec![false; perm.len()];
        let mut c = 0;
        for s in 0..perm.len() {
            if !seen[s] {
                c += 1;
                let mut i = s;
                while !seen[i] {
                    seen[i] = true;
                    i = perm[i];
                }
            }
        }
        c
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = vec![];
        for p in permutations(n - 1) {
            for i in 0..n {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn stirling_brute_force() {
        assert_eq!(stirling(4, 2, StirlingKind::Second), 7);
        assert_eq!(set_partitions(4, 2), 7);
        for n in 1..=6 {
            for k in 1..=n {
                assert_eq!(stirling(n, k, StirlingKind::Second), set_partitions(n, k));
                let c = permutations(n).iter().filter(|p| cycles(p) == k).count();
                assert_eq!(stirling(n, k, StirlingKind::FirstUnsigned), c);
            }
            assert_eq!(stirling(n, n, StirlingKind::Second), 1);
            assert_eq!(stirling(n, 1, StirlingKind::Second), 1);
        }
        assert_eq!(stirling(4, 2, StirlingKind::FirstUnsigned), 11);
        assert_eq!(stirling(4, 2, StirlingKind::FirstSigned), 11);
        assert_eq!(stirling(4, 3, StirlingKind::FirstSigned), -6);
        assert_eq!(stirling(2, 5, StirlingKind::Second), 0);
    }

    #[test]
    fn stirling_matrices_are_inverse() {
        let a = stirling_second_matrix(12);
        let b = stirling_first_matrix(12);
        assert_eq!(a.rmul(&b).unwrap(), ExpRiordan::identity(12));
        let s2 = stirling_triangle(StirlingKind::Second, 12);
        let s1 = stirling_triangle(StirlingKind::FirstSigned, 12);
        for n in 0..=12 {
            for k in 0..=n {
                assert_eq!(a.entry(n, k), s2[n][k]);
                assert_eq!(b.entry(n, k), s1[n][k]);
            }
        }
    }

    #[test]
    fn powers_in_falling_basis() {
        for n in 0..=10 {
            let mut c = vec![Rational::new(); n + 1];
            for (k, s) in stirling_triangle(StirlingKind::Second, n)[n].iter().enumerate() {
                c[k] = Rational::from(s);
            }
            let mut want = vec![Rational::new(); n + 1];
            want[n] = Rational::from(1);
            assert_eq!(PolyInX::from_falling(&c), PolyInX::new(want));
        }
    }

    #[test]
    fn tree_small_levels() {
        let q = QuadraticQ::ab(1, 1).unwrap();
        let (lq, _) = lq_decomposition(&q, 8).unwrap();
        let p = lq.horizontal_pair().unwrap();
        let lv = tree_levels(&p, 2).unwrap();
        assert_eq!(lv[0].net(0), 1);
        assert_eq!(lv[0].total(), 1);
        assert_eq!([lv[2].net(0), lv[2].net(1), lv[2].net(2)], [2, 4, 1]);
        assert!(tree_levels(&p, 9).is_err());
    }

    #[test]
    fn tree_matches_lq_for_one_two() {
        let q = QuadraticQ::ab(1, 2).unwrap();
        let (lq, _) = lq_decomposition(&q, 6).unwrap();
        let p = lq.horizontal_pair().unwrap();
        for lv in tree_levels(&p, 5).unwrap() {
            for k in 0..=lv.level {
                assert_eq!(Rational::from(lv.net(k)), lq.entry(lv.level, k));
            }
        }
    }

    #[test]
    fn sigma_examples() {
        let q = QuadraticQ::ab(2, 3).unwrap();
        let t = lattice_sigma(&q, 4).unwrap();
        assert_eq!(t.get(1, 1), 10);
        assert_eq!(t.get(2, 0), 12);
        assert_eq!(t.get(3, 2), 12 * 125);
        assert_eq!(t.get(0, 0), 1);
        assert_eq!(t.get(2, 5), 0);
        assert_eq!(&t.sigma, c_matrix(&q, 4).unwrap().entries());
    }

    #[test]
    fn hn_reconstruction() {
        let q = QuadraticQ::ab(3, 1).unwrap();
        for n in 0..=10 {
            assert_eq!(hn_from_sigma(&q, n).unwrap(), h_poly(&q, n).unwrap());
        }
    }
}
