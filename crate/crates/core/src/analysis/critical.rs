//! Thresholds, critical curves ζ₁, ζ₂ and the phase φ(z,t) with its derivatives.

use crate::error::{Error, Result};
use crate::sheffer::QuadraticQ;
use rug::ops::Pow;
use rug::{Complex, Float, Rational};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// z1² − 6z1z2 + z2² ≥ 0, so T = T1.
    #[serde(rename = "T_IS_T1")]
    TIsT1,
    /// z1² − 6z1z2 + z2² < 0, so T = T2.
    #[serde(rename = "T_IS_T2")]
    TIsT2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    One,
    Two,
}

/// Which degenerate point a boundary layer sits at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    AtT,
    AtT1Minus,
    AtT1Plus,
}

/// φ and its z-derivatives at a point, plus ψ.
#[derive(Clone, Debug)]
pub struct PhiEval {
    pub value: Complex,
    pub dz: Complex,
    pub dz2: Complex,
    pub dz3: Complex,
    /// ∂²φ/∂z∂t.
    pub dzt: Complex,
    pub psi: Complex,
}

#[derive(Clone, Debug)]
pub struct CriticalData {
    pub z1: Float,
    pub z2: Float,
    pub t1: Float,
    pub t2: Float,
    pub t: Float,
    pub regime: Regime,
    exact: (Rational, Rational),
}

fn cx(prec: u32, v: impl Into<Float>) -> Complex {
    Complex::with_val(prec, (v.into(), 0))
}

impl CriticalData {
    pub fn new(z1: &Rational, z2: &Rational, prec: u32) -> Result<Self> {
        if z1 == z2 {
            return Err(Error::Invalid("z1 = z2 makes T1 = 0 and degenerates the curves".into()));
        }
        if z1.cmp0().is_le() || z2 < z1 {
            return Err(Error::Invalid(format!("need z2 > z1 > 0, got ({z1}, {z2})")));
        }
        let f = |r: &Rational| Float::with_val(prec, r);
        let (a, b) = (f(z1), f(z2));
        let t1 = Float::with_val(prec, &b - &a) / Float::with_val(prec, &a + &b);
        let t2 = Float::with_val(prec, &a + &b) / (Float::with_val(prec, &a * &b).sqrt() * 4u32);
        let disc = Rational::from(z1 * z1) - Rational::from(z1 * z2) * 6u32 + Rational::from(z2 * z2);
        let regime = if disc.cmp0().is_ge() { Regime::TIsT1 } else { Regime::TIsT2 };
        let t = match regime {
            Regime::TIsT1 => t1.clone(),
            Regime::TIsT2 => t2.clone(),
        };
        Ok(Self { z1: a, z2: b, t1, t2, t, regime, exact: (z1.clone(), z2.clone()) })
    }

    pub fn from_f64(z1: f64, z2: f64, prec: u32) -> Result<Self> {
        let r = |v: f64| Rational::from_f64(v).ok_or_else(|| Error::Invalid(format!("{v} is not finite")));
        Self::new(&r(z1)?, &r(z2)?, prec)
    }

    pub fn from_q(q: &QuadraticQ, prec: u32) -> Result<Self> {
        let (z1, z2) = q.root_params()?;
        Self::new(z1, z2, prec)
    }

    /// The same data recomputed at another precision.
    pub fn with_prec(&self, prec: u32) -> Self {
        Self::new(&self.exact.0, &self.exact.1, prec).expect("validated on construction")
    }

    pub fn roots(&self) -> (&Rational, &Rational) {
        (&self.exact.0, &self.exact.1)
    }

    pub fn prec(&self) -> u32 {
        self.z1.prec()
    }

    pub fn t_end(&self) -> f64 {
        self.t.to_f64()
    }

    fn s(&self) -> Float {
        Float::with_val(self.prec(), &self.z1 + &self.z2) / 2u32
    }

    fn time(&self, t: f64) -> Result<Float> {
        let p = self.prec();
        let mut tt = Float::with_val(p, t);
        if !(t >= 0.0) {
            return Err(Error::OutOfWindow(format!("t = {t} must lie in [0, T]")));
        }
        if tt > self.t {
            // a caller passing T rounded to f64 lands a hair outside
            let slack = Float::with_val(p, &self.t * 1e-15);
            if Float::with_val(p, &tt - &self.t) > slack {
                return Err(Error::OutOfWindow(format!("t = {t} exceeds T = {}", self.t_end())));
            }
            tt = self.t.clone();
        }
        Ok(tt)
    }

    /// ζ_k(t) for 0 ≤ t ≤ T on the principal branches.
    pub fn zeta(&self, t: f64, branch: Branch) -> Result<Complex> {
        let tt = self.time(t)?;
        Ok(self.zeta_at(&tt, branch))
    }

    pub fn zeta_at(&self, t: &Float, branch: Branch) -> Complex {
        let p = self.prec();
        let s = self.s();
        if *t == self.t && branch == Branch::One {
            return self.zeta_end();
        }
        let one = Float::with_val(p, 1);
        let two_t2 = Float::with_val(p, t * t) * 2u32;
        let base = Float::with_val(p, &one - &two_t2);
        let i_t = Complex::with_val(p, (0, t));
        let z = if *t < self.t1 || (self.regime == Regime::TIsT1) {
            let r = Float::with_val(p, &self.t1 * &self.t1) - Float::with_val(p, t * t);
            let r = r.max(&Float::new(p)).sqrt();
            let tr2 = Float::with_val(p, t * &r) * 2u32;
            match branch {
                Branch::One => {
                    let root = Complex::with_val(p, (&base, -tr2)).sqrt();
                    i_t - r + root
                }
                Branch::Two => {
                    let root = Complex::with_val(p, (&base, tr2)).sqrt();
                    i_t + r + root
                }
            }
        } else {
            let r = Float::with_val(p, t * t) - Float::with_val(p, &self.t1 * &self.t1);
            let r = r.max(&Float::new(p)).sqrt();
            let tr2 = Float::with_val(p, t * &r) * 2u32;
            let i_r = Complex::with_val(p, (0, &r));
            match branch {
                Branch::One => {
                    let inner = Float::with_val(p, &base - &tr2).max(&Float::new(p));
                    i_t + i_r + cx(p, inner.sqrt())
                }
                Branch::Two => {
                    let inner = Float::with_val(p, &base + &tr2);
                    i_t - i_r + cx(p, inner).sqrt()
                }
            }
        };
        z * s
    }

    /// ζ₁(T) as the one-sided limit t → T⁻.
    ///
    /// In the T = T1 regime the square root in the ζ₁ formula sits on its cut
    /// at t = T1, so the limit takes the lower-half-plane value.
    pub fn zeta_end(&self) -> Complex {
        let p = self.prec();
        let s = self.s();
        let im = match self.regime {
            Regime::TIsT2 => {
                let r = (Float::with_val(p, &self.t2 * &self.t2) - Float::with_val(p, &self.t1 * &self.t1)).sqrt();
                Float::with_val(p, &self.t2 + r)
            }
            Regime::TIsT1 => {
                let r = (Float::with_val(p, &self.t1 * &self.t1) * 2u32 - 1u32).sqrt();
                Float::with_val(p, &self.t1 - r)
            }
        };
        Complex::with_val(p, (0, im * s))
    }

    /// ζ₁(T1) = ζ₂(T1) where the two critical points meet (T = T2 regime).
    pub fn zeta_t1(&self) -> Complex {
        self.zeta_at(&self.t1.clone(), Branch::One)
    }

    fn on_cut(&self, z: &Complex) -> bool {
        let (re, im) = (z.real(), z.imag());
        (im.is_zero() && (re.is_zero() || Float::with_val(self.prec(), re.abs_ref()) >= self.z1)) || !z.real().is_finite()
    }

    fn logs(&self, z: &Complex) -> [Complex; 4] {
        let p = z.prec().0;
        [
            Complex::with_val(p, &self.z1 - z).ln(),
            Complex::with_val(p, &self.z2 - z).ln(),
            Complex::with_val(p, &self.z1 + z).ln(),
            Complex::with_val(p, &self.z2 + z).ln(),
        ]
    }

    /// φ(z,t) for complex t; no cut check.
    pub fn phi_c(&self, z: &Complex, t: &Complex) -> Complex {
        let p = z.prec().0;
        let [a, b, c, d] = self.logs(z);
        let f = Complex::with_val(p, &a + &b) - c - d;
        let it = Complex::with_val(p, t * Complex::with_val(p, (0, 1)));
        Complex::with_val(p, z.ln_ref()) - it * f
    }

    pub fn phi(&self, z: &Complex, t: f64) -> Complex {
        self.phi_c(z, &Complex::with_val(z.prec().0, (t, 0)))
    }

    /// ψ(z) = exp(½ Σ Log(z_k ∓ z)) / z.
    pub fn psi(&self, z: &Complex) -> Complex {
        let p = z.prec().0;
        let [a, b, c, d] = self.logs(z);
        let sum = Complex::with_val(p, &a + &b) + c + d;
        (sum / 2u32).exp() / z
    }

    /// φ, its z-derivatives, ∂²φ/∂z∂t and ψ at (z, t).
    pub fn phi_eval(&self, z: &Complex, t: f64) -> Result<PhiEval> {
        if self.on_cut(z) {
            return Err(Error::OnCut(format!("z = {}", z.to_string_radix(10, Some(12)))));
        }
        let p = z.prec().0;
        let tc = Complex::with_val(p, (t, 0));
        Ok(self.phi_eval_c(z, &tc))
    }

    pub fn phi_eval_c(&self, z: &Complex, t: &Complex) -> PhiEval {
        let p = z.prec().0;
        let i = Complex::with_val(p, (0, 1));
        let it = Complex::with_val(p, t * &i);
        let inv = |w: Complex| -> Complex { w.recip() };
        let r = [
            inv(Complex::with_val(p, &self.z1 - z)),
            inv(Complex::with_val(p, &self.z2 - z)),
            inv(Complex::with_val(p, &self.z1 + z)),
            inv(Complex::with_val(p, &self.z2 + z)),
        ];
        let rz = inv(z.clone());
        let sum1 = Complex::with_val(p, &r[0] + &r[1]) + &r[2] + &r[3];
        let sq = |w: &Complex| Complex::with_val(p, w.square_ref());
        let cu = |w: &Complex| Complex::with_val(p, w.square_ref()) * w;
        let dz = Complex::with_val(p, &rz + Complex::with_val(p, &it * &sum1));
        let sum2 = sq(&r[0]) + sq(&r[1]) - sq(&r[2]) - sq(&r[3]);
        let dz2 = Complex::with_val(p, &it * &sum2) - sq(&rz);
        let sum3 = cu(&r[0]) + cu(&r[1]) + cu(&r[2]) + cu(&r[3]);
        let dz3 = (cu(&rz) + Complex::with_val(p, &it * &sum3)) * 2u32;
        let dzt = i * sum1;
        PhiEval { value: self.phi_c(z, t), dz, dz2, dz3, dzt, psi: self.psi(z) }
    }

    /// Closed-form φ_zz at a critical point, with t eliminated through t(ζ).
    pub fn phi_zz_closed(&self, zeta: &Complex) -> Complex {
        let p = zeta.prec().0;
        let z2 = Complex::with_val(p, zeta.square_ref());
        let a2 = Float::with_val(p, self.z1.square_ref());
        let b2 = Float::with_val(p, self.z2.square_ref());
        let ab = Float::with_val(p, &self.z1 * &self.z2);
        let mid = Float::with_val(p, &a2 + &b2) - Float::with_val(p, &ab * 4u32);
        let ab2 = Float::with_val(p, ab.square_ref());
        let num = Complex::with_val(p, &z2 + &ab) * (Complex::with_val(p, z2.square_ref()) + Complex::with_val(p, &z2 * &mid) + &ab2);
        let den = Complex::with_val(p, &z2 * Complex::with_val(p, &z2 - &a2)) * Complex::with_val(p, &z2 - &b2) * Complex::with_val(p, &z2 - &ab);
        num / den
    }

    /// t as a function of a critical point: it = (ζ²−z1²)(ζ²−z2²) / (2ζ(z1+z2)(ζ²−z1z2)).
    pub fn t_of_zeta(&self, zeta: &Complex) -> Complex {
        let p = zeta.prec().0;
        let z2 = Complex::with_val(p, zeta.square_ref());
        let a2 = Float::with_val(p, self.z1.square_ref());
        let b2 = Float::with_val(p, self.z2.square_ref());
        let ab = Float::with_val(p, &self.z1 * &self.z2);
        let sum = Float::with_val(p, &self.z1 + &self.z2);
        let num = Complex::with_val(p, &z2 - &a2) * Complex::with_val(p, &z2 - &b2);
        let den = Complex::with_val(p, zeta * &sum) * Complex::with_val(p, &z2 - &ab) * 2u32;
        let it = num / den;
        it * Complex::with_val(p, (0, -1))
    }

    /// Relative residual of the critical-point quartic at (z, t).
    pub fn quartic_residual(&self, z: &Complex, t: f64) -> f64 {
        let p = z.prec().0;
        let i = Complex::with_val(p, (0, 1));
        let sum = Float::with_val(p, &self.z1 + &self.z2);
        let ab = Float::with_val(p, &self.z1 * &self.z2);
        let sq = Float::with_val(p, self.z1.square_ref()) + Float::with_val(p, self.z2.square_ref());
        let zp = |k: i32| Complex::with_val(p, z.pow(k));
        let terms = [
            zp(4),
            Complex::with_val(p, &i * &sum) * zp(3) * (-2.0 * t),
            zp(2) * Float::with_val(p, -&sq),
            Complex::with_val(p, &i * &ab) * &sum * zp(1) * (2.0 * t),
            Complex::with_val(p, (Float::with_val(p, ab.square_ref()), 0)),
        ];
        let mut total = Complex::new(p);
        let mut scale = Float::new(p);
        for term in &terms {
            total += term;
            scale += Float::with_val(p, term.abs_ref());
        }
        (Float::with_val(p, total.abs_ref()) / scale).to_f64()
    }

    /// The constant c of the T-layer expansion as printed.
    pub fn c_printed(&self) -> Complex {
        let p = self.prec();
        let s = self.s();
        match self.regime {
            Regime::TIsT1 => {
                let two_t1 = Float::with_val(p, &self.t1 * 2u32);
                let r = two_t1.clone().sqrt();
                let den = (Float::with_val(p, self.t1.square_ref()) * 2u32 - 1u32).sqrt();
                let v = Float::with_val(p, &self.t1 * &r) / den - r;
                cx(p, v * s)
            }
            Regime::TIsT2 => {
                let ab = Float::with_val(p, &self.z1 * &self.z2);
                let num = Float::with_val(p, 32).sqrt() * ab.pow(0.75f64);
                let sum = Float::with_val(p, &self.z1 + &self.z2);
                let disc = Float::with_val(p, &self.z1 * &self.z2) * 6u32 - Float::with_val(p, self.z1.square_ref()) - Float::with_val(p, self.z2.square_ref());
                cx(p, num / (sum * disc).sqrt())
            }
        }
    }

    /// lim (ζ₁(t) − ζ₁(T)) / √(T−t) as t → T⁻.
    ///
    /// Agrees with the printed c when T = T1 and carries an extra factor
    /// (z1+z2)/2 when T = T2.
    pub fn kappa(&self) -> Complex {
        match self.regime {
            Regime::TIsT1 => self.c_printed(),
            Regime::TIsT2 => self.c_printed() * self.s(),
        }
    }

    /// d, the T1-layer constant for t → T1⁻.
    pub fn d(&self) -> Complex {
        let p = self.prec();
        let (pre, q) = self.t1_parts();
        Complex::with_val(p, (1, q)) * Float::with_val(p, -&pre)
    }

    /// d̂, the T1-layer constant for t → T1⁺.
    pub fn d_hat(&self) -> Complex {
        let p = self.prec();
        let (pre, q) = self.t1_parts();
        Complex::with_val(p, (-q, 1)) * pre
    }

    /// ((z1+z2)√T1/√2, T1/√(1−2T1²)).
    fn t1_parts(&self) -> (Float, Float) {
        let p = self.prec();
        let pre = Float::with_val(p, &self.z1 + &self.z2) * self.t1.clone().sqrt() / Float::with_val(p, 2).sqrt();
        let den = (Float::with_val(p, 1) - Float::with_val(p, self.t1.square_ref()) * 2u32).sqrt();
        (pre, Float::with_val(p, &self.t1 / den))
    }

    /// Local constant K with ζ₁(t) − ζ_c ≈ K√|t − t_c| for the given layer.
    pub fn layer_constant(&self, layer: Layer) -> Complex {
        match layer {
            Layer::AtT => self.kappa(),
            Layer::AtT1Minus => self.d(),
            Layer::AtT1Plus => self.d_hat(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    fn f64c(z: &Complex) -> (f64, f64) {
        (z.real().to_f64(), z.imag().to_f64())
    }

    #[test]
    fn thresholds_of_sample_pairs() {
        let a = CriticalData::from_f64(1.0, 3.0, P).unwrap();
        assert_eq!(a.regime, Regime::TIsT2);
        assert!((a.t1.to_f64() - 0.5).abs() < 1e-15);
        assert!((a.t_end() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let b = CriticalData::from_f64(1.0, 7.0, P).unwrap();
        assert_eq!(b.regime, Regime::TIsT1);
        assert!((b.t_end() - 0.75).abs() < 1e-15);
        assert!(CriticalData::from_f64(2.0, 2.0, P).is_err());
        assert!(CriticalData::from_f64(3.0, 1.0, P).is_err());
    }

    #[test]
    fn t2_minus_t1_identity() {
        for (z1, z2) in [(1.0, 3.0), (1.0, 7.0), (2.0, 5.0), (1.0, 1.001)] {
            let c = CriticalData::from_f64(z1, z2, P).unwrap();
            let lhs = Float::with_val(P, &c.t2 - &c.t1).to_f64();
            let disc = z1 * z1 - 6.0 * z1 * z2 + z2 * z2;
            let rhs_sq = disc * disc / (16.0 * z1 * z2 * (z1 + z2) * (z1 + z2));
            assert!(lhs >= 0.0);
            // (T2 − T1)(T2 + T1) = disc² / (16 z1 z2 (z1+z2)²)
            let sum = Float::with_val(P, &c.t2 + &c.t1).to_f64();
            assert!((lhs * sum - rhs_sq).abs() < 1e-12 * (1.0 + rhs_sq), "{z1} {z2}");
        }
    }

    #[test]
    fn zeta_at_zero_is_the_roots() {
        let c = CriticalData::from_f64(1.0, 3.0, P).unwrap();
        assert_eq!(f64c(&c.zeta(0.0, Branch::One).unwrap()), (1.0, 0.0));
        assert_eq!(f64c(&c.zeta(0.0, Branch::Two).unwrap()), (3.0, 0.0));
        assert!(c.zeta(0.6, Branch::One).is_err());
        assert!(c.zeta(-0.1, Branch::One).is_err());
    }

    #[test]
    fn t_end_limits() {
        let c = CriticalData::from_f64(1.0, 3.0, P).unwrap();
        let (re, im) = f64c(&c.zeta_end());
        assert!(re.abs() < 1e-30 && (im - 3f64.sqrt()).abs() < 1e-14);
        let c = CriticalData::from_f64(1.0, 7.0, P).unwrap();
        let e = c.zeta_end();
        let near = c.zeta(0.75 - 1e-12, Branch::One).unwrap();
        assert!(Complex::with_val(P, &e - &near).abs().real().to_f64() < 1e-4);
        let ev = c.phi_eval(&e, 0.75).unwrap();
        assert!(ev.dz2.abs().real().to_f64() < 1e-20);
    }

    #[test]
    fn closed_forms_agree() {
        let c = CriticalData::from_f64(1.0, 3.0, P).unwrap();
        for t in [0.1, 0.25, 0.4, 0.55] {
            let z = c.zeta(t, Branch::One).unwrap();
            let ev = c.phi_eval(&z, t).unwrap();
            assert!(ev.dz.abs().real().to_f64() < 1e-30);
            let d = Complex::with_val(P, &ev.dz2 - c.phi_zz_closed(&z));
            assert!(d.abs().real().to_f64() < 1e-25 * (1.0 + ev.dz2.abs().real().to_f64()));
            let tz = c.t_of_zeta(&z);
            assert!((tz.real().to_f64() - t).abs() < 1e-25 && tz.imag().to_f64().abs() < 1e-25);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let c = CriticalData::from_f64(1.0, 3.0, P).unwrap();
        let z = Complex::with_val(P, (0.7, 0.9));
        let h = Complex::with_val(P, (1e-12, 0));
        let t = 0.3;
        let e0 = c.phi_eval(&z, t).unwrap();
        let zp = Complex::with_val(P, &z + &h);
        let zm = Complex::with_val(P, &z - &h);
        let (ep, em) = (c.phi_eval(&zp, t).unwrap(), c.phi_eval(&zm, t).unwrap());
        let fd = |a: &Complex, b: &Complex| Complex::with_val(P, a - b) / 2e-12;
        for (num, exact) in [(fd(&ep.value, &em.value), &e0.dz), (fd(&ep.dz, &em.dz), &e0.dz2), (fd(&ep.dz2, &em.dz2), &e0.dz3)] {
            let err = Complex::with_val(P, &num - exact).abs().real().to_f64();
            assert!(err < 1e-6 * Float::with_val(P, exact.abs_ref()).to_f64(), "{err}");
        }
    }

    #[test]
    fn cut_points_are_rejected() {
        let c = CriticalData::from_f64(1.0, 3.0, P).unwrap();
        for (re, im) in [(2.0, 0.0), (-1.5, 0.0), (0.0, 0.0)] {
            assert!(c.phi_eval(&Complex::with_val(P, (re, im)), 0.1).is_err());
        }
        assert!(c.phi_eval(&Complex::with_val(P, (0.5, 0.0)), 0.1).is_ok());
    }

    #[test]
    fn printed_and_corrected_layer_constants() {
        let c = CriticalData::from_f64(1.0, 7.0, P).unwrap();
        assert!((c.c_printed().real().to_f64() - c.kappa().real().to_f64()).abs() < 1e-30);
        let c = CriticalData::from_f64(1.0, 3.0, P).unwrap();
        let k = c.kappa().real().to_f64();
        assert!((k - 2.0 * 3f64.powf(0.75)).abs() < 1e-12);
    }
}
