//! Roots of H_n at high precision and the critical-line checks built on them.

use crate::analysis::CriticalData;
use crate::error::{Error, Result};
use crate::sheffer::{h_poly, PolyInX, QuadraticQ};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::float::Constant;
use rug::{Complex, Float, Rational};
use serde::Serialize;
use std::ops::RangeInclusive;

/// Default precision for root finding.
pub const ROOT_PRECISION: u32 = 256;
/// Default on-line tolerance on |Re x − 1/2|.
pub const LINE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct RootOptions {
    pub prec: u32,
    /// Seed for the jitter of the starting circle.
    pub seed: u64,
    pub max_sweeps: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { prec: ROOT_PRECISION, seed: 0x5eed, max_sweeps: 2000 }
    }
}

/// Residual bound 10^{−prec/8} demanded of every root.
pub fn residual_bound(prec: u32) -> f64 {
    10f64.powf(-(prec as f64) / 8.0)
}

/// |p(x)| / Σ|c_k||x|^k, the backward error of x as a root of p.
pub fn normalized_residual(p: &PolyInX, x: &Complex) -> Float {
    let prec = x.prec().0;
    let v = p.eval_complex(x);
    let r = Float::with_val(prec, x.abs_ref());
    let mut den = Float::new(prec);
    for c in p.coeffs().iter().rev() {
        den *= &r;
        den += Float::with_val(prec, c).abs();
    }
    let num = Float::with_val(prec, v.abs_ref());
    if den.is_zero() {
        return num;
    }
    num / den
}

/// p(x), p'(x) and Σ|c_k||x|^k.
fn horner_d(c: &[Float], x: &Complex) -> (Complex, Complex, Float) {
    let p = x.prec().0;
    let d = c.len() - 1;
    let ax = Float::with_val(p, x.abs_ref());
    let mut v = Complex::with_val(p, (&c[d], 0));
    let mut dv = Complex::new(p);
    let mut m = Float::with_val(p, c[d].abs_ref());
    for k in (0..d).rev() {
        dv *= x;
        dv += &v;
        v *= x;
        v += &c[k];
        m *= &ax;
        m += Float::with_val(p, c[k].abs_ref());
    }
    (v, dv, m)
}

/// p(y + c) by repeated synthetic division.
fn taylor_shift(p: &[Rational], c: &Rational) -> Vec<Rational> {
    let mut b = p.to_vec();
    let d = b.len();
    for i in 0..d {
        for k in (i..d - 1).rev() {
            let t = Rational::from(c * &b[k + 1]);
            b[k] += t;
        }
    }
    b
}

fn start_points(core: &[Rational], wp: u32, seed: u64) -> Vec<Complex> {
    let d = core.len() - 1;
    let center = -Rational::from(&core[d - 1] / &core[d]) / d as u32;
    let shifted = taylor_shift(core, &center);
    let lead = Float::with_val(64, &shifted[d]).abs().ln().to_f64();
    let mut radius = f64::NEG_INFINITY;
    for (k, b) in shifted.iter().enumerate().take(d) {
        if b.cmp0().is_ne() {
            let lr = (Float::with_val(64, b).abs().ln().to_f64() - lead) / (d - k) as f64;
            radius = radius.max(lr);
        }
    }
    let radius = if radius.is_finite() { radius.exp() } else { 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let two_pi = Float::with_val(wp, Constant::Pi) * 2u32;
    let c = Complex::with_val(wp, (Float::with_val(wp, &center), 0));
    (0..d)
        .map(|j| {
            let frac = (j as f64 + 0.3 + 0.4 * unit()) / d as f64 + 0.07;
            let r = radius * (1.0 + 0.05 * unit());
            let theta = Float::with_val(wp, &two_pi * frac);
            let (s, co) = theta.sin_cos(Float::new(wp));
            Complex::with_val(wp, (co * r, s * r)) + &c
        })
        .collect()
}

/// All roots of `p` with multiplicity at `prec` bits, sorted by (Im, Re).
pub fn poly_roots(p: &PolyInX, prec: u32) -> Result<Vec<Complex>> {
    poly_roots_with(p, &RootOptions { prec, ..Default::default() })
}

/// Aberth–Ehrlich iteration from a jittered circle around the root centroid.
pub fn poly_roots_with(p: &PolyInX, opts: &RootOptions) -> Result<Vec<Complex>> {
    if p.is_zero() {
        return Err(Error::Invalid("the zero polynomial has no root set".into()));
    }
    if opts.prec < 32 {
        return Err(Error::Invalid(format!("precision {} is below 32 bits", opts.prec)));
    }
    let prec = opts.prec;
    let coeffs = p.coeffs();
    let at_origin = coeffs.iter().take_while(|c| c.cmp0().is_eq()).count();
    let core = &coeffs[at_origin..];
    let d = core.len() - 1;
    let mut roots = vec![Complex::new(prec); at_origin];
    if d == 0 {
        return Ok(roots);
    }
    let wp = prec + 32;
    let c: Vec<Float> = core.iter().map(|r| Float::with_val(wp, r)).collect();
    let mut z = start_points(core, wp, opts.seed);
    let eps = Float::with_val(wp, Float::i_exp(1, 8 - wp as i32));
    let noise = Float::with_val(wp, Float::i_exp(4 * d as i32, -(wp as i32)));
    let mut done = vec![false; d];
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps && done.iter().any(|f| !f) {
        sweeps += 1;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let (v, dv, m) = horner_d(&c, &z[i]);
            // below the rounding floor of Horner's rule further steps are noise
            let floor = m * &noise;
            if Float::with_val(wp, v.abs_ref()) <= floor {
                done[i] = true;
                continue;
            }
            let mut s = Complex::new(wp);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    s += Complex::with_val(wp, &z[i] - zj).recip();
                }
            }
            let w = if dv.is_zero() {
                // stationary point: kick off it
                Complex::with_val(wp, s.recip_ref())
            } else {
                let ratio = Complex::with_val(wp, &v / &dv);
                let denom = Complex::with_val(wp, 1u32 - Complex::with_val(wp, &ratio * &s));
                ratio / denom
            };
            if !w.real().is_finite() || !w.imag().is_finite() {
                continue;
            }
            z[i] -= &w;
            let size = Float::with_val(wp, w.abs_ref());
            let scale = Float::with_val(wp, z[i].abs_ref()).max(&Float::with_val(wp, 1u32));
            if size <= Float::with_val(wp, &eps * &scale) {
                done[i] = true;
            }
        }
    }
    let bound = residual_bound(prec);
    let mut worst = 0.0f64;
    for x in &z {
        let r = normalized_residual(p, &Complex::with_val(prec, x)).to_f64();
        worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
    }
    if worst > bound {
        let pending = done.iter().filter(|f| !**f).count();
        return Err(Error::NonConvergence(format!(
            "root iteration stopped after {sweeps} sweeps with {pending} of {d} roots unsettled; worst residual {worst:.3e} > {bound:.1e}"
        )));
    }
    roots.extend(z.into_iter().map(|x| Complex::with_val(prec, x)));
    roots.sort_by(|a, b| {
        a.imag().partial_cmp(b.imag()).unwrap_or(std::cmp::Ordering::Equal).then(a.real().partial_cmp(b.real()).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(roots)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrivialZero {
    Zero,
    One,
    Half,
}

impl TrivialZero {
    fn value(self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::One => 1.0,
            Self::Half => 0.5,
        }
    }

    fn exact(self) -> Rational {
        match self {
            Self::Zero => Rational::new(),
            Self::One => Rational::from(1),
            Self::Half => Rational::from((1, 2)),
        }
    }
}

/// Trivial zeros forced for index n: 0 and 1 once n > 2, and 1/2 for odd n.
pub fn expected_trivial(n: usize) -> Vec<TrivialZero> {
    let mut v = vec![];
    if n > 2 {
        v.push(TrivialZero::Zero);
    }
    if n % 2 == 1 {
        v.push(TrivialZero::Half);
    }
    if n > 2 {
        v.push(TrivialZero::One);
    }
    v
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RootClass {
    TrivialZero { at: TrivialZero },
    OnLine { distance: f64 },
    OffLine { distance: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct RootEntry {
    #[serde(serialize_with = "crate::fmt::ser_complex")]
    pub value: Complex,
    /// Im x / n, the curve parameter of a point on the line.
    pub t: f64,
    pub residual: f64,
    pub class: RootClass,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrivialCheck {
    pub expected: Vec<TrivialZero>,
    pub found: Vec<TrivialZero>,
    /// H_n vanishes exactly at every expected point.
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootReport {
    pub q: QuadraticQ,
    pub n: usize,
    pub degree: usize,
    pub prec: u32,
    pub tol: f64,
    pub residual_bound: f64,
    pub roots: Vec<RootEntry>,
    pub trivial: TrivialCheck,
    /// max over roots x of the distance from 1 − x to the root set
    pub reflection_error: f64,
    /// max over roots x of the distance from x̄ to the root set
    pub conjugation_error: f64,
    pub symmetric: bool,
    /// |Σ roots + c_{d−1}/c_d|
    pub vieta_error: f64,
    pub on_line: usize,
    pub off_line: usize,
}

impl RootReport {
    pub fn all_nontrivial_on_line(&self) -> bool {
        self.off_line == 0
    }

    /// On-line roots with t in (0, t_end).
    pub fn on_line_upper(&self, t_end: f64) -> usize {
        self.roots.iter().filter(|r| matches!(r.class, RootClass::OnLine { .. }) && r.t > 0.0 && r.t < t_end).count()
    }

    pub fn max_line_distance(&self) -> f64 {
        self.roots
            .iter()
            .map(|r| match r.class {
                RootClass::OnLine { distance } | RootClass::OffLine { distance } => distance,
                RootClass::TrivialZero { .. } => 0.0,
            })
            .fold(0.0, f64::max)
    }
}

fn c64(z: &Complex) -> (f64, f64) {
    (z.real().to_f64(), z.imag().to_f64())
}

fn nearest(set: &[(f64, f64)], p: (f64, f64)) -> f64 {
    set.iter().map(|q| (q.0 - p.0).hypot(q.1 - p.1)).fold(f64::INFINITY, f64::min)
}

/// Roots of H_n classified against the critical line Re x = 1/2.
pub fn critical_line_report(q: &QuadraticQ, n: usize, tol: f64, prec: u32) -> Result<RootReport> {
    if n == 0 {
        return Err(Error::Invalid("need n ≥ 1".into()));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    if prec < 64 {
        return Err(Error::Invalid(format!("precision {prec} is below 64 bits")));
    }
    let h = h_poly(q, n)?;
    let degree = h.degree().ok_or_else(|| Error::Invalid(format!("H_{n} vanishes identically")))?;
    let roots = poly_roots(&h, prec)?;
    let pts: Vec<(f64, f64)> = roots.iter().map(c64).collect();

    let expected = expected_trivial(n);
    let exact = expected.iter().all(|z| h.eval(&z.exact()).cmp0().is_eq());
    let mut class: Vec<Option<RootClass>> = vec![None; roots.len()];
    let mut found = vec![];
    for &z in &expected {
        let best =
            pts.iter().enumerate().filter(|(i, _)| class[*i].is_none()).map(|(i, p)| (i, (p.0 - z.value()).hypot(p.1))).min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, dist)) = best {
            if dist <= tol {
                class[i] = Some(RootClass::TrivialZero { at: z });
                found.push(z);
            }
        }
    }

    let mut entries = Vec::with_capacity(roots.len());
    let (mut on_line, mut off_line) = (0, 0);
    for (i, x) in roots.into_iter().enumerate() {
        let residual = normalized_residual(&h, &x).to_f64();
        let c = class[i].take().unwrap_or_else(|| {
            let distance = (pts[i].0 - 0.5).abs();
            if distance <= tol {
                on_line += 1;
                RootClass::OnLine { distance }
            } else {
                off_line += 1;
                RootClass::OffLine { distance }
            }
        });
        entries.push(RootEntry { t: pts[i].1 / n as f64, value: x, residual, class: c });
    }

    let reflection_error = pts.iter().map(|p| nearest(&pts, (1.0 - p.0, -p.1))).fold(0.0, f64::max);
    let conjugation_error = pts.iter().map(|p| nearest(&pts, (p.0, -p.1))).fold(0.0, f64::max);
    let sum = entries.iter().fold(Complex::new(prec), |acc, e| acc + &e.value);
    let want = -Rational::from(&h.coeffs()[degree - 1] / &h.coeffs()[degree]);
    let vieta = Complex::with_val(prec, &sum - &want);
    let vieta_error = Float::with_val(prec, vieta.abs_ref()).to_f64();

    Ok(RootReport {
        q: q.clone(),
        n,
        degree,
        prec,
        tol,
        residual_bound: residual_bound(prec),
        roots: entries,
        trivial: TrivialCheck { expected, found, exact },
        symmetric: reflection_error <= 2.0 * tol && conjugation_error <= 2.0 * tol,
        reflection_error,
        conjugation_error,
        vieta_error,
        on_line,
        off_line,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OffLineCase {
    pub n: usize,
    pub off_line: usize,
    pub max_distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdReport {
    pub q: QuadraticQ,
    pub n_min: usize,
    pub n_max: usize,
    pub tol: f64,
    pub prec: u32,
    /// Smallest n in the scanned range from which on no index has an off-line root.
    pub n0: Option<usize>,
    pub exceptions: Vec<OffLineCase>,
}

impl ThresholdReport {
    /// Indices at or above `from` that still have off-line roots.
    pub fn exceptions_from(&self, from: usize) -> Vec<usize> {
        self.exceptions.iter().filter(|e| e.n >= from).map(|e| e.n).collect()
    }
}

/// Scans `ns` and reports the empirical index past which every non-trivial root is on the line.
pub fn empirical_threshold(q: &QuadraticQ, ns: RangeInclusive<usize>, tol: f64, prec: u32) -> Result<ThresholdReport> {
    let (n_min, n_max) = (*ns.start(), *ns.end());
    if n_min == 0 || n_min > n_max {
        return Err(Error::Invalid(format!("bad index range {n_min}..={n_max}")));
    }
    let reports: Vec<Result<RootReport>> = ns.into_par_iter().map(|n| critical_line_report(q, n, tol, prec)).collect();
    let mut exceptions = vec![];
    for r in reports {
        let r = r?;
        if r.off_line > 0 {
            exceptions.push(OffLineCase { n: r.n, off_line: r.off_line, max_distance: r.max_line_distance() });
        }
    }
    let n0 = match exceptions.last() {
        None => Some(n_min),
        Some(e) if e.n < n_max => Some(e.n + 1),
        Some(_) => None,
    };
    Ok(ThresholdReport { q: q.clone(), n_min, n_max, tol, prec, n0, exceptions })
}

#[derive(Clone, Debug, Serialize)]
pub struct LineCount {
    pub n: usize,
    pub count: usize,
    /// Grid points strictly inside (0, T) that were sampled.
    pub samples: usize,
    pub t_end: f64,
}

/// `samples` equally spaced points strictly inside (0, t_end).
pub fn open_grid(t_end: f64, samples: usize) -> Vec<f64> {
    (1..=samples).map(|k| t_end * k as f64 / (samples + 1) as f64).collect()
}

/// Sign changes of the real parity component of H_n(1/2 + int) over the grid.
///
/// For even n the value on the line is real; for odd n it is i times a real
/// number, and that real number is used. Grid points at 0 or T are skipped.
pub fn line_zero_count(q: &QuadraticQ, n: usize, t_grid: &[f64], prec: u32) -> Result<LineCount> {
    if n == 0 {
        return Err(Error::Invalid("need n ≥ 1".into()));
    }
    if prec < 64 {
        return Err(Error::Invalid(format!("precision {prec} is below 64 bits")));
    }
    let t_end = CriticalData::from_q(q, 64)?.t_end();
    if t_grid.len() < 2 {
        return Err(Error::Invalid("grid needs at least two points".into()));
    }
    for w in t_grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Invalid(format!("grid is not strictly increasing at {} → {}", w[0], w[1])));
        }
    }
    if !(t_grid[0] >= 0.0) || !(t_grid[t_grid.len() - 1] <= t_end) {
        return Err(Error::Invalid(format!("grid must lie in [0, T] with T = {t_end}")));
    }
    let h = h_poly(q, n)?;
    let c: Vec<Float> = h.coeffs().iter().map(|r| Float::with_val(prec, r)).collect();
    let floor = Float::with_val(prec, Float::i_exp(1, 16 - prec as i32));
    let mut prev: Option<(f64, Float)> = None;
    let (mut count, mut samples) = (0, 0);
    for &t in t_grid.iter().filter(|&&t| t > 0.0 && t < t_end) {
        samples += 1;
        let x = Complex::with_val(prec, (0.5, Float::with_val(prec, n as f64) * t));
        let mut v = Complex::new(prec);
        let r = Float::with_val(prec, x.abs_ref());
        let mut scale = Float::new(prec);
        for ck in c.iter().rev() {
            v *= &x;
            v += ck;
            scale *= &r;
            scale += Float::with_val(prec, ck.abs_ref());
        }
        let val = if n % 2 == 0 { v.real().clone() } else { v.imag().clone() };
        if Float::with_val(prec, val.abs_ref()) <= Float::with_val(prec, &scale * &floor) {
            return Err(Error::NonConvergence(format!("sign of H_{n}(1/2+int) at t = {t} is below the rounding level; raise the precision")));
        }
        if let Some((tp, vp)) = &prev {
            let ratio = Float::with_val(prec, &val / vp).abs().to_f64();
            if !(1e-6..=1e6).contains(&ratio) {
                return Err(Error::Invalid(format!("grid too coarse between t = {tp} and t = {t}: magnitudes differ by more than 1e6")));
            }
            if val.is_sign_negative() != vp.is_sign_negative() {
                count += 1;
            }
        }
        prev = Some((t, val));
    }
    Ok(LineCount { n, count, samples, t_end })
}
