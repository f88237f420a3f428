//! Asymptotic approximants for I₂(n,t): saddle point, boundary layers near T
//! and T1, and the small-t form; plus g(ζ).

use super::contour::descent_entry_direction;
use super::critical::{Branch, CriticalData, Layer, Regime};
use super::gamma::log_gamma;
use super::quad::{pi, GaussLegendre};
use crate::error::{Error, Result};
use rug::ops::Pow;
use rug::{Complex, Float};
use serde::Serialize;

/// Numeric stand-ins for the "≪" conditions. All are scale factors on the
/// asymptotic windows and can be changed per call.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Gates {
    /// Upper bound on (ln n/√n) / (|φ_zz|^{3/2} t²).
    pub saddle: f64,
    /// Small-t window is 0 < t ≤ smallt·ln⁴n/n.
    pub smallt: f64,
    /// Layer window is layer_lower·n^{−2/3} ≤ |t − t_c| ≤ layer_upper·ln²n·n^{−2/3}.
    pub layer_lower: f64,
    pub layer_upper: f64,
}

impl Default for Gates {
    fn default() -> Self {
        Self { saddle: 4.0, smallt: 10.0, layer_lower: 1.0, layer_upper: 1.0 }
    }
}

#[derive(Clone, Debug)]
pub struct SaddleApprox {
    /// +√(2π)ψ e^{−nφ}/√(nφ_zz) with the principal square root.
    pub plus: Complex,
    pub minus: Complex,
    /// 2πψ² e^{−2nφ}/(nφ_zz), free of the sign ambiguity.
    pub squared: Complex,
    pub zeta: Complex,
    pub gate_value: f64,
}

/// Saddle gate quantity (ln n/√n) / (|φ_zz(ζ₁,t)|^{3/2} t²).
pub fn saddle_gate_value(cd: &CriticalData, n: u32, t: f64) -> Result<f64> {
    let zeta = cd.zeta(t, Branch::One)?;
    let ev = cd.phi_eval(&zeta, t)?;
    let a2 = Float::with_val(cd.prec(), ev.dz2.abs_ref()).to_f64();
    let nf = n as f64;
    Ok(nf.ln() / nf.sqrt() / (a2.powf(1.5) * t * t))
}

pub fn saddle_approx(cd: &CriticalData, n: u32, t: f64, gates: &Gates) -> Result<SaddleApprox> {
    if !(t > 0.0 && t < cd.t_end()) {
        return Err(Error::OutOfWindow(format!("saddle estimate needs 0 < t < T = {}, got {t}", cd.t_end())));
    }
    let gate_value = saddle_gate_value(cd, n, t)?;
    if !(gate_value <= gates.saddle) {
        return Err(Error::OutOfWindow(format!("saddle gate (ln n/√n)/(|φ_zz|^1.5 t²) = {gate_value:.3} exceeds {} at n = {n}, t = {t}", gates.saddle)));
    }
    let p = cd.prec();
    let zeta = cd.zeta(t, Branch::One)?;
    let ev = cd.phi_eval(&zeta, t)?;
    let e = (-Complex::with_val(p, &ev.value * n)).exp();
    let nphi2 = Complex::with_val(p, &ev.dz2 * n);
    let root2pi = Float::with_val(p, pi(p) * 2u32).sqrt();
    let plus = Complex::with_val(p, &ev.psi * &e) * &root2pi / nphi2.clone().sqrt();
    let minus = Complex::with_val(p, -&plus);
    let squared = Complex::with_val(p, ev.psi.square_ref()) * Complex::with_val(p, e.square_ref()) * Float::with_val(p, pi(p) * 2u32) / nphi2;
    Ok(SaddleApprox { plus, minus, squared, zeta, gate_value })
}

/// Sign branch closer to the contour value, with the ratio contour/approx.
pub fn pick_sign(contour: &Complex, approx: &SaddleApprox) -> (i8, Complex) {
    let p = contour.prec().0;
    let rp = Complex::with_val(p, contour / &approx.plus);
    let dist = |r: &Complex| Float::with_val(p, Complex::with_val(p, r - 1u32).abs_ref()).to_f64();
    let rm = Complex::with_val(p, -&rp);
    if dist(&rp) <= dist(&rm) {
        (1, rp)
    } else {
        (-1, rm)
    }
}

/// Local cubic curve y² = (Λ/6)u²(3s − u) in the closed form through r(y).
#[derive(Clone, Debug)]
pub struct LayerCurve {
    /// √|t − t_c|.
    pub s: Float,
    /// K³ φ_zzz(ζ_c, t_c).
    pub lambda: Complex,
    pub a: Complex,
    pub b: Complex,
}

impl LayerCurve {
    pub fn new(s: Float, lambda: Complex) -> Self {
        let p = s.prec();
        let three_s = Float::with_val(p, &s * 3u32);
        let den = Complex::with_val(p, lambda.sqrt_ref()) * Float::with_val(p, three_s.sqrt().pow(3u32));
        let a = -(Complex::with_val(p, (Float::with_val(p, 6).sqrt(), 0)) / den);
        let b = Complex::with_val(p, &lambda * &s) / 2u32;
        Self { s, lambda, a, b }
    }

    /// Scaled offset u(y) = (ζ − z(y))/K, with u(0) = 0.
    pub fn u(&self, y: &Float) -> Complex {
        let p = self.s.prec();
        let a2 = Complex::with_val(p, self.a.square_ref());
        let y2 = Float::with_val(p, y.square_ref());
        let inner = Complex::with_val(p, &a2 * Float::with_val(p, &y2 * 27u32)) * &a2 - Complex::with_val(p, &a2 * 4u32);
        let root27 = Float::with_val(p, 27).sqrt();
        let r3 = Complex::with_val(p, &a2 * Float::with_val(p, &y2 * 27u32)) - 2u32 + inner.sqrt() * Float::with_val(p, y * &root27);
        let r = cbrt_cut_positive(&r3);
        let c2 = Float::with_val(p, 2).cbrt();
        let q = Complex::with_val(p, &r / &c2) + Complex::with_val(p, &c2 / &r) - 1u32;
        -(q * &self.s)
    }

    /// |y² − (Λ/6)u²(3s − u)| relative to the size of its terms.
    pub fn residual(&self, y: &Float) -> f64 {
        let p = self.s.prec();
        let u = self.u(y);
        let three_s = Float::with_val(p, &self.s * 3u32);
        let rhs = Complex::with_val(p, &self.lambda / 6u32) * Complex::with_val(p, u.square_ref()) * (Complex::with_val(p, -&u) + &three_s);
        let y2 = Float::with_val(p, y.square_ref());
        let diff = Complex::with_val(p, &rhs - &y2);
        let scale = Float::with_val(p, rhs.abs_ref()) + &y2;
        if scale.is_zero() {
            return 0.0;
        }
        (Float::with_val(p, diff.abs_ref()) / scale).to_f64()
    }

    /// (√(3s−u) − s/√(3s−u))^{−1}, times the sign making it the true du/dy
    /// scaled by √6√Λ/4 on this branch of the curve.
    fn slope(&self, y: &Float, u: &Complex) -> Complex {
        let p = self.s.prec();
        let three_s = Float::with_val(p, &self.s * 3u32);
        let root = (Complex::with_val(p, -u) + &three_s).sqrt();
        let f = (Complex::with_val(p, &root - Complex::with_val(p, &self.s / &root))).recip();
        // the unsquared relation holds with either sign of y; pick the one this point is on
        let lin = Complex::with_val(p, self.lambda.sqrt_ref()) / Float::with_val(p, 6).sqrt() * u * &root;
        let agree = Complex::with_val(p, &lin * y).real().is_sign_positive();
        if agree {
            f
        } else {
            -f
        }
    }
}

/// Cube root with the cut on [0, ∞), argument taken in (0, 2π).
fn cbrt_cut_positive(w: &Complex) -> Complex {
    let p = w.prec().0;
    let modulus = Float::with_val(p, w.abs_ref()).cbrt();
    let mut arg = Float::with_val(p, w.arg_ref());
    if arg.is_sign_negative() || arg.is_zero() {
        arg += Float::with_val(p, pi(p) * 2u32);
    }
    let (sin, cos) = (arg / 3u32).sin_cos(Float::new(p));
    Complex::with_val(p, (cos * &modulus, sin * &modulus))
}

#[derive(Clone, Debug)]
pub struct LayerApprox {
    pub value: Complex,
    pub layer: Layer,
    /// K with ζ₁(t) − ζ_c ≈ K√|t − t_c|.
    pub constant: Complex,
    pub curve: LayerCurve,
    /// Integration range in y from the |u| cutoff.
    pub y_range: (f64, f64),
    /// False when the descent geometry could not be traced and the y-order is used as is.
    pub oriented: bool,
}

pub fn layer_gate(n: u32, gap: f64, gates: &Gates) -> bool {
    let nf = n as f64;
    let lo = gates.layer_lower * nf.powf(-2.0 / 3.0);
    let hi = gates.layer_upper * nf.ln().powi(2) * nf.powf(-2.0 / 3.0);
    gap >= lo && gap <= hi
}

/// Main term of I₂ from the local cubic at a degenerate point.
pub fn boundary_layer_approx(cd: &CriticalData, n: u32, t: f64, layer: Layer, gates: &Gates) -> Result<LayerApprox> {
    let p = cd.prec();
    let (tc, gap) = match layer {
        Layer::AtT => (cd.t.clone(), cd.t_end() - t),
        Layer::AtT1Minus | Layer::AtT1Plus => {
            if cd.regime != Regime::TIsT2 {
                return Err(Error::OutOfWindow("T1 layers need the T = T2 regime".into()));
            }
            let t1 = cd.t1.to_f64();
            let gap = if layer == Layer::AtT1Minus { t1 - t } else { t - t1 };
            (cd.t1.clone(), gap)
        }
    };
    if !(t > 0.0 && t < cd.t_end()) || !layer_gate(n, gap, gates) {
        return Err(Error::OutOfWindow(format!("t = {t} is outside the {layer:?} layer window at n = {n}")));
    }
    let k = cd.layer_constant(layer);
    let zeta_c = match layer {
        Layer::AtT => cd.zeta_end(),
        _ => cd.zeta_t1(),
    };
    let ev_c = cd.phi_eval_c(&zeta_c, &Complex::with_val(p, (&tc, 0)));
    let lambda = Complex::with_val(p, k.clone().pow(3u32)) * &ev_c.dz3;
    let s = Float::with_val(p, gap).sqrt();
    let curve = LayerCurve::new(s, lambda.clone());

    let zeta = cd.zeta(t, Branch::One)?;
    let ev = cd.phi_eval(&zeta, t)?;
    let nf = n as f64;
    let cutoff = 7.0 * nf.ln() / nf.cbrt();
    let find = |sign: f64| -> f64 {
        let absu = |y: f64| Float::with_val(p, curve.u(&Float::with_val(p, sign * y)).abs_ref()).to_f64();
        let mut hi = 1.0 / nf.sqrt();
        while absu(hi) < cutoff && hi < 1e6 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if absu(mid) < cutoff {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        sign * 0.5 * (lo + hi)
    };
    let (ya, yb) = (find(-1.0), find(1.0));

    // e^{−ny²} is below 2^{−p} past |y| = ycut
    let ycut = ((p as f64 + 20.0) * std::f64::consts::LN_2 / nf).sqrt();
    let unit = 1.0 / nf.sqrt();
    let mut marks = vec![ya.max(-ycut)];
    let mut m = -(ycut / unit).floor();
    while m * unit < yb.min(ycut) {
        if m * unit > marks[marks.len() - 1] {
            marks.push(m * unit);
        }
        m += 1.0;
    }
    marks.push(yb.min(ycut));
    let gl = GaussLegendre::new(24, p);
    let mut integral = Complex::new(p);
    for w in marks.windows(2) {
        let (a, b) = (Float::with_val(p, w[0]), Float::with_val(p, w[1]));
        let (v, _) = gl.panel_real(&a, &b, |y| {
            let u = curve.u(y);
            let g = Float::with_val(p, y.square_ref()) * n;
            curve.slope(y, &u) * (-g).exp()
        });
        integral += v;
    }
    // z(y) = ζ − K u(y); Γ₂ runs from the side that descends to (0, z1)
    let (orient, oriented) = match descent_entry_direction(cd, n, t) {
        Ok((dx, dy)) => {
            let probe = |y: f64| {
                let u = curve.u(&Float::with_val(p, y));
                let off = Complex::with_val(p, -&k) * u;
                off.real().to_f64() * dx + off.imag().to_f64() * dy
            };
            let h = 0.5 / nf.sqrt();
            (if probe(-h) >= probe(h) { 1 } else { -1 }, true)
        }
        Err(_) => (1, false),
    };
    let kc = Complex::with_val(p, &k * -4i32) * &ev_c.psi * (-Complex::with_val(p, &ev.value * n)).exp() / (Float::with_val(p, 6).sqrt() * lambda.sqrt());
    let mut value = kc * integral;
    if orient < 0 {
        value = -value;
    }
    Ok(LayerApprox { value, layer, constant: k, curve, y_range: (ya, yb), oriented })
}

/// Small-t gate: 0 < t ≤ smallt·ln⁴n/n.
pub fn smallt_gate(n: u32, t: f64, gates: &Gates) -> bool {
    let nf = n as f64;
    t > 0.0 && t <= gates.smallt * nf.ln().powi(4) / nf
}

/// −i(e^{nπt}+e^{−nπt}) z1^{−(n−1)} 2^{½−int} (z2−z1)^{½+int} (z2+z1)^{½−int}
/// Γ(3/2+int) e^{−(3/2+int) ln n}, assembled in log form.
pub fn smallt_approx(cd: &CriticalData, n: u32, t: f64, gates: &Gates) -> Result<Complex> {
    if !smallt_gate(n, t, gates) {
        return Err(Error::OutOfWindow(format!("t = {t} is outside the small-t window at n = {n}")));
    }
    smallt_formula(cd, n, t)
}

/// The small-t expression without the gate.
pub fn smallt_formula(cd: &CriticalData, n: u32, t: f64) -> Result<Complex> {
    let p = cd.prec();
    let nt = Float::with_val(p, t) * n;
    let a = Complex::with_val(p, (0.5, &nt));
    let abar = Complex::with_val(p, (0.5, -nt.clone()));
    let pnt = Float::with_val(p, &nt * pi(p));
    // ln(e^{x} + e^{−x}) = x + ln(1 + e^{−2x})
    let cosh_ln = Float::with_val(p, &pnt + Float::with_val(p, Float::with_val(p, &pnt * -2i32).exp() + 1u32).ln());
    let mut l = Complex::with_val(p, (cosh_ln, 0));
    l -= Float::with_val(p, cd.z1.clone().ln()) * (n - 1);
    l += Complex::with_val(p, &abar * Float::with_val(p, 2).ln());
    l += Complex::with_val(p, &a * Float::with_val(p, &cd.z2 - &cd.z1).ln());
    l += Complex::with_val(p, &abar * Float::with_val(p, &cd.z2 + &cd.z1).ln());
    let g = Complex::with_val(p, &a + 1u32);
    l += log_gamma(&g)?;
    l -= g * Float::with_val(p, n).ln();
    Ok(l.exp() * Complex::with_val(p, (0, -1)))
}

/// g(ζ) = 2πψ²(ζ) e^{−2nφ(ζ,t(ζ))} / (nφ_zz(ζ,t(ζ))), t(ζ) from the critical-point relation.
pub fn g_zeta(cd: &CriticalData, n: u32, zeta: &Complex) -> Result<Complex> {
    let p = zeta.prec().0;
    let z2 = Complex::with_val(p, zeta.square_ref());
    let ab = Float::with_val(p, &cd.z1 * &cd.z2);
    let tol = 1e-12 * cd.z2.to_f64();
    let near = |w: &Complex, c: &Float| Float::with_val(p, Complex::with_val(p, w - c).abs_ref()).to_f64() < tol;
    let zero = Float::new(p);
    let bad = [&zero, &cd.z1, &cd.z2].iter().any(|c| near(zeta, c) || near(&Complex::with_val(p, -zeta), c))
        || Float::with_val(p, Complex::with_val(p, &z2 - &ab).abs_ref()).to_f64() < tol * cd.z2.to_f64();
    if bad {
        return Err(Error::Invalid(format!("ζ = {} is at a pole of g", zeta.to_string_radix(10, Some(10)))));
    }
    let t = cd.t_of_zeta(zeta);
    let ev = cd.phi_eval_c(zeta, &t);
    if Float::with_val(p, ev.dz2.abs_ref()).to_f64() < 1e-12 {
        return Err(Error::Invalid("φ_zz vanishes at ζ".into()));
    }
    let e = (-Complex::with_val(p, &ev.value * (2 * n))).exp();
    let num = Complex::with_val(p, ev.psi.square_ref()) * e * Float::with_val(p, pi(p) * 2u32);
    Ok(num / Complex::with_val(p, &ev.dz2 * n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    fn cd(z1: i64, z2: i64) -> CriticalData {
        CriticalData::new(&Rational::from(z1), &Rational::from(z2), 128).unwrap()
    }

    #[test]
    fn saddle_branches_and_square() {
        let c = cd(1, 3);
        let s = saddle_approx(&c, 200, 0.25, &Gates::default()).unwrap();
        let sq = Complex::with_val(128, s.plus.square_ref());
        let d = Complex::with_val(128, &sq - &s.squared);
        assert!(Float::with_val(128, d.abs_ref()) < Float::with_val(128, s.squared.abs_ref()) * 1e-25);
        assert!(saddle_approx(&c, 200, 0.0, &Gates::default()).is_err());
        assert!(saddle_approx(&c, 200, 0.6, &Gates::default()).is_err());
        // near T1 the critical points merge and φ_zz → 0
        assert!(saddle_approx(&c, 200, 0.5, &Gates::default()).is_err());
    }

    #[test]
    fn layer_curve_passes_through_the_saddle() {
        let c = cd(1, 3);
        let lam = Complex::with_val(128, c.kappa().pow(3u32)) * c.phi_eval(&c.zeta_end(), c.t_end()).unwrap().dz3;
        let curve = LayerCurve::new(Float::with_val(128, 0.1), lam);
        let u0 = curve.u(&Float::new(128));
        assert!(Float::with_val(128, u0.abs_ref()).to_f64() < 1e-30);
        for y in [-0.3, -0.01, 0.002, 0.05, 0.4] {
            assert!(curve.residual(&Float::with_val(128, y)) < 1e-10, "{y}");
        }
    }

    #[test]
    fn layer_gate_window() {
        let c = cd(1, 3);
        let n = 5000u32;
        let g = Gates::default();
        let nf = n as f64;
        let edge = nf.ln().powi(2) / nf.powf(2.0 / 3.0);
        assert!(boundary_layer_approx(&c, n, c.t_end() - 0.5 * edge, Layer::AtT, &g).is_ok());
        assert!(boundary_layer_approx(&c, n, c.t_end() - 2.0 * edge, Layer::AtT, &g).is_err());
        assert!(boundary_layer_approx(&cd(1, 7), n, 0.7, Layer::AtT1Minus, &g).is_err());
    }

    #[test]
    fn smallt_is_imaginary_at_zero() {
        let c = cd(1, 3);
        let v = smallt_formula(&c, 50, 0.0).unwrap();
        assert!(v.real().to_f64().abs() < 1e-30 * v.imag().to_f64().abs());
        assert!(v.imag().is_sign_negative());
        assert!(smallt_approx(&c, 50, 0.0, &Gates::default()).is_err());
    }

    #[test]
    fn g_symmetries() {
        let c = cd(1, 3);
        for (re, im) in [(0.7, 0.4), (1.3, 1.1), (0.2, 2.0)] {
            let z = Complex::with_val(128, (re, im));
            let g = g_zeta(&c, 40, &z).unwrap();
            let gm = g_zeta(&c, 40, &Complex::with_val(128, -&z)).unwrap();
            let gc = g_zeta(&c, 40, &Complex::with_val(128, z.conj_ref())).unwrap();
            let scale = Float::with_val(128, g.abs_ref());
            assert!(Float::with_val(128, Complex::with_val(128, &g - &gm).abs_ref()) < Float::with_val(128, &scale * 1e-25));
            let gcc = Complex::with_val(128, gc.conj_ref());
            assert!(Float::with_val(128, Complex::with_val(128, &g - &gcc).abs_ref()) < Float::with_val(128, &scale * 1e-25));
        }
        for y in [0.5, 2.5] {
            let g = g_zeta(&c, 40, &Complex::with_val(128, (0, y))).unwrap();
            assert!(g.imag().to_f64().abs() <= 1e-10 * Float::with_val(128, g.abs_ref()).to_f64());
        }
        assert!(g_zeta(&c, 40, &Complex::with_val(128, (1, 0))).is_err());
    }
}
