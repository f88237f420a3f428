//! Text forms used by serialized output: rationals as "p/q", complex as decimal strings.

use rug::{Complex, Float, Rational};
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

pub fn rational(r: &Rational) -> String {
    r.to_string()
}

/// Decimal string with every significant digit the precision carries.
pub fn float(f: &Float) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let digits = (f.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1;
    f.to_string_radix(10, Some(digits))
}

/// Complex value as a `{re, im}` pair of decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplexText {
    pub re: String,
    pub im: String,
}

pub fn complex(c: &Complex) -> ComplexText {
    ComplexText { re: float(c.real()), im: float(c.imag()) }
}

pub fn ser_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rational(r))
}

pub fn ser_rationals<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for r in v {
        seq.serialize_element(&rational(r))?;
    }
    seq.end()
}

pub fn ser_triangle<S: Serializer>(t: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<String>> = t.iter().map(|r| r.iter().map(rational).collect()).collect();
    rows.serialize(s)
}

pub fn ser_complex<S: Serializer>(c: &Complex, s: S) -> Result<S::Ok, S::Error> {
    complex(c).serialize(s)
}

pub fn ser_float<S: Serializer>(f: &Float, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&float(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(rational(&Rational::from((-6, 4))), "-3/2");
        assert_eq!(rational(&Rational::from(32)), "32");
        let c = Complex::with_val(64, (1.5, -0.25));
        let t = complex(&c);
        assert!(t.re.starts_with("1.5"));
        assert!(t.im.starts_with("-2.5"));
        assert_eq!(float(&Float::new(64)), "0");
    }
}
