//! Complex log-gamma by the Stirling series after lifting the argument.

use super::quad::pi;
use crate::error::{Error, Result};
use rug::{Complex, Float};

/// log Γ(z) at the precision of `z`.
///
/// For Re z > 0 this is the principal branch (real on the positive axis).
/// Elsewhere it is the continuation lnΓ(z+N) − Σ Log(z+k) used for the lift.
pub fn log_gamma(z: &Complex) -> Result<Complex> {
    let p = z.prec().0;
    let (re, im) = (z.real(), z.imag());
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::Invalid("log_gamma of a non-finite argument".into()));
    }
    if im.is_zero() && *re <= 0 && re.is_integer() {
        return Err(Error::Invalid(format!("Γ has a pole at {}", re.to_f64())));
    }
    let wp = p + 32;
    let r0 = 0.12 * wp as f64 + 10.0;
    let mut w = Complex::with_val(wp, z);
    let mut shift = Complex::new(wp);
    let absz = Float::with_val(wp, w.abs_ref()).to_f64();
    if absz < r0 || w.real().to_f64() < 0.0 {
        let target = (r0 * r0 - w.imag().to_f64().powi(2)).max(0.0).sqrt();
        let steps = (target - w.real().to_f64()).ceil().max(1.0) as u64;
        for _ in 0..steps {
            shift += Complex::with_val(wp, w.ln_ref());
            w += 1u32;
        }
    }
    // (w − ½) Log w − w + ½ ln 2π + Σ B_2k / (2k(2k−1) w^{2k−1})
    let two_pi = Float::with_val(wp, pi(wp) * 2u32);
    let mut acc = Complex::with_val(wp, &w - 0.5f64) * Complex::with_val(wp, w.ln_ref()) - &w;
    acc += Float::with_val(wp, two_pi.ln_ref()) / 2u32;
    let inv = Complex::with_val(wp, w.recip_ref());
    let inv2 = Complex::with_val(wp, inv.square_ref());
    let four_pi2 = Float::with_val(wp, two_pi.square_ref());
    let eps = Float::with_val(wp, Float::i_exp(1, -(wp as i32)));
    // c_k = 2 (2k−2)! / (2π)^{2k}, so that B_2k/(2k(2k−1)) = (−1)^{k+1} c_k ζ(2k)
    let mut c = Float::with_val(wp, 2u32) / &four_pi2;
    let mut wpow = inv.clone();
    let mut prev = Float::with_val(wp, f64::INFINITY);
    for k in 1..10_000u32 {
        let zeta = Float::with_val(wp, Float::zeta_u(2 * k));
        let mut term = Complex::with_val(wp, &wpow * Float::with_val(wp, &c * &zeta));
        if k % 2 == 0 {
            term = -term;
        }
        let size = Float::with_val(wp, term.abs_ref());
        if size > prev {
            break;
        }
        acc += &term;
        if size <= Float::with_val(wp, &eps * Float::with_val(wp, acc.abs_ref())) {
            break;
        }
        prev = size;
        c *= (2 * k) * (2 * k - 1);
        c /= &four_pi2;
        wpow *= &inv2;
    }
    Ok(Complex::with_val(p, acc - shift))
}
