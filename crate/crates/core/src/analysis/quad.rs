//! Gauss–Legendre rules at arbitrary precision.

use rug::float::Constant;
use rug::{Complex, Float};

/// Nodes and weights on [−1, 1], nodes in increasing order.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

/// (P_m(x), P_{m−1}(x)) by the three-term recurrence.
fn legendre(m: usize, x: &Float) -> (Float, Float) {
    let p = x.prec();
    let mut prev = Float::with_val(p, 1);
    let mut cur = x.clone();
    for k in 1..m {
        let next = (Float::with_val(p, x * &cur) * (2 * k + 1) as u32 - Float::with_val(p, &prev * k as u32)) / (k + 1) as u32;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn legendre_f64(m: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0, x);
    for k in 1..m {
        let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

impl GaussLegendre {
    pub fn new(m: usize, prec: u32) -> Self {
        assert!(m >= 1);
        let half = m / 2;
        let mut pos = Vec::with_capacity(half);
        for i in 0..half {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (pm, pm1) = legendre_f64(m, x);
                let d = m as f64 * (x * pm - pm1) / (x * x - 1.0);
                let dx = pm / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let mut xf = Float::with_val(prec, x);
            let tiny = Float::with_val(prec, Float::i_exp(1, 4 - prec as i32));
            let mut weight = Float::new(prec);
            for _ in 0..64 {
                let (pm, pm1) = legendre(m, &xf);
                let x2m1 = Float::with_val(prec, xf.square_ref()) - 1u32;
                let d = (Float::with_val(prec, &xf * &pm) - pm1) * m as u32 / &x2m1;
                let dx = Float::with_val(prec, &pm / &d);
                xf -= &dx;
                weight = Float::with_val(prec, 2u32) / (-x2m1 * Float::with_val(prec, d.square_ref()));
                if dx.abs() <= tiny {
                    break;
                }
            }
            pos.push((xf, weight));
        }
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for (x, w) in &pos {
            nodes.push(Float::with_val(prec, -x));
            weights.push(w.clone());
        }
        if m % 2 == 1 {
            let zero = Float::new(prec);
            let (_, pm1) = legendre(m, &zero);
            let d = Float::with_val(prec, -&pm1) * m as u32;
            nodes.push(zero);
            weights.push(Float::with_val(prec, 2u32) / Float::with_val(prec, d.square_ref()));
        }
        for (x, w) in pos.into_iter().rev() {
            nodes.push(x);
            weights.push(w);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∫_a^b f(x) dx on a real panel; also returns Σ|w f|.
    pub fn panel_real<F: FnMut(&Float) -> Complex>(&self, a: &Float, b: &Float, mut f: F) -> (Complex, Float) {
        let p = a.prec();
        let half = Float::with_val(p, b - a) / 2u32;
        let mid = Float::with_val(p, b + a) / 2u32;
        let mut sum = Complex::new(p);
        let mut mag = Float::new(p);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let at = Float::with_val(p, &half * x) + &mid;
            let v = f(&at) * Float::with_val(p, &half * w);
            mag += Float::with_val(p, v.abs_ref());
            sum += v;
        }
        (sum, mag)
    }

    /// ∫ f(z) dz along the straight segment a → b; also returns Σ|w f dz|.
    pub fn panel_complex<F: FnMut(&Complex) -> Complex>(&self, a: &Complex, b: &Complex, mut f: F) -> (Complex, Float) {
        let p = a.prec().0;
        let half = Complex::with_val(p, b - a) / 2u32;
        let mid = Complex::with_val(p, b + a) / 2u32;
        let mut sum = Complex::new(p);
        let mut mag = Float::new(p);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let at = Complex::with_val(p, &half * x) + &mid;
            let v = f(&at) * Complex::with_val(p, &half * w);
            mag += Float::with_val(p, v.abs_ref());
            sum += v;
        }
        (sum, mag)
    }
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    #[test]
    fn integrates_polynomials_exactly() {
        let g = GaussLegendre::new(7, 200);
        let sum: Float = g.weights.iter().fold(Float::new(200), |acc, w| acc + w);
        assert!((sum - 2u32).abs().to_f64() < 1e-55);
        // ∫ x^12 = 2/13 needs degree 13 ≤ 2·7−1
        let mut s = Float::new(200);
        for (x, w) in g.nodes.iter().zip(&g.weights) {
            s += Float::with_val(200, x.pow(12u32)) * w;
        }
        let err = (s - Float::with_val(200, 2u32) / 13u32).abs().to_f64();
        assert!(err < 1e-55, "{err}");
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        for m in [1, 2, 5, 40] {
            let g = GaussLegendre::new(m, 128);
            assert_eq!(g.len(), m);
            for i in 0..m {
                let s = Float::with_val(128, &g.nodes[i] + &g.nodes[m - 1 - i]);
                assert!(s.abs().to_f64() < 1e-35);
                if i > 0 {
                    assert!(g.nodes[i] > g.nodes[i - 1]);
                }
            }
        }
    }

    #[test]
    fn exponential_on_a_panel() {
        let g = GaussLegendre::new(30, 256);
        let a = Float::with_val(256, 0);
        let b = Float::with_val(256, 2);
        let (v, _) = g.panel_real(&a, &b, |x| Complex::with_val(256, (x.clone().exp(), 0)));
        let exact = Float::with_val(256, 2).exp() - 1u32;
        assert!((Float::with_val(256, v.real() - exact)).abs().to_f64() < 1e-60);
    }
}
